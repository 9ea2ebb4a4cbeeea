// Copyright 2026 The Carve Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace carve;

namespace {

Metadata fig_tsp() {
    Metadata m;
    m.problem = Problem::tsp;
    m.name = "fig";
    m.num = 10;
    m.xs = {0, 10, 20, 30, 0, 40, 10, 20, 30, -10};
    m.ys = {0, 0, 0, 0, 20, 0, 20, 20, 20, 10};
    validate(m);
    return m;
}

Solution fig_tour() {
    Solution s;
    s.problem = Problem::tsp;
    s.routes = {{9, 0, 1, 2, 3, 5, 4, 8, 6, 7}};
    return s;
}

SubProblem fig_sub(const Metadata& m, const Solution& s) {
    const auto sel = compute_selection(m, s, {4, 6, 7, 8});
    return compress(m, s, sel);
}

}  // namespace

TEST_CASE("figure example compresses to one fixed path between 9 and 5") {
    const Metadata m = fig_tsp();
    const Solution s = fig_tour();
    const SubProblem sub = fig_sub(m, s);

    CHECK(sub.local_meta.num == 6);  // {4,6,7,8} plus endpoints {9,5}
    REQUIRE(sub.constraints.size() == 1);
    const auto& path = sub.constraints[0].path;
    CHECK(sub.global_of(path.entry) == 9);
    CHECK(sub.global_of(path.exit) == 5);
    CHECK(path.run_global == std::vector<int>{9, 0, 1, 2, 3, 5});
    // Internal cost equals the straight re-computation along the run.
    int64_t expect = 0;
    const std::vector<int> run = {9, 0, 1, 2, 3, 5};
    for (size_t i = 0; i + 1 < run.size(); ++i) expect += distance(m, run[i], run[i + 1]);
    CHECK(path.internal_cost == expect);
    CHECK(path.internal_demand == 0);
    for (int gid : {4, 5, 6, 7, 8, 9}) CHECK(sub.global_to_local.count(gid) == 1);
}

TEST_CASE("cvrp static run carries the interior demand") {
    Metadata m;
    m.problem = Problem::cvrp;
    m.name = "c";
    m.num = 7;
    m.depot = 0;
    m.xs = {0, 10, 20, 30, 40, 50, 60};
    m.ys = {0, 0, 0, 0, 0, 0, 0};
    m.capacities = {200};
    m.demand = {0, 5, 10, 20, 30, 7, 9};
    validate(m);
    Solution s;
    s.problem = Problem::cvrp;
    s.routes = {{0, 1, 2, 3, 4, 5, 0}, {0, 6, 0}};
    // Only node 6 is active: run [1,2,3,4,5] has interior 2,3,4.
    const auto sel = compute_selection(m, s, {6});
    const SubProblem sub = compress(m, s, sel);
    REQUIRE(sub.constraints.size() == 1);
    const auto& path = sub.constraints[0].path;
    CHECK(sub.global_of(path.entry) == 1);
    CHECK(sub.global_of(path.exit) == 5);
    CHECK(path.internal_demand == 10 + 20 + 30);
    // Endpoints keep their own demands in the local metadata.
    CHECK(sub.local_meta.demand[static_cast<size_t>(path.entry)] == 5);
    CHECK(sub.local_meta.demand[static_cast<size_t>(path.exit)] == 7);
}

TEST_CASE("bpp static items fuse into a pinned bulky item") {
    Metadata m;
    m.problem = Problem::bpp;
    m.name = "b";
    m.num = 4;
    m.weights = {10, 20, 5, 7};
    m.capacities = {50};
    validate(m);
    Solution s;
    s.problem = Problem::bpp;
    s.groups = {{0, 1}, {2, 3}};
    const auto sel = compute_selection(m, s, {2});
    const SubProblem sub = compress(m, s, sel);
    REQUIRE(sub.constraints.size() == 2);
    CHECK(sub.constraints[0].bulky.group == 0);
    CHECK(sub.constraints[0].bulky.weight == 30);
    CHECK(sub.constraints[1].bulky.group == 1);
    CHECK(sub.constraints[1].bulky.weight == 7);
    CHECK(sub.local_meta.num == 3);  // item 2 plus two bulky pseudo-items
}

TEST_CASE("unchanged local solutions integrate back to the original global") {
    SeededRng rng(61);
    for (const Problem p : {Problem::tsp, Problem::cvrp, Problem::bpp, Problem::mkp}) {
        for (int trial = 0; trial < 40; ++trial) {
            const Metadata m =
                testing::make_instance(p, 6 + static_cast<int>(rng.uniform_int(0, 12)), rng);
            const Solution s = testing::random_feasible(m, rng);
            const int cap = 1 + static_cast<int>(rng.uniform_int(0, 5));
            const auto sel = decompose(DecomposeStrategy::random, m, s, cap, rng);
            const SubProblem sub = compress(m, s, sel);
            CHECK(check_local_feasible(sub, sub.local_solution).feasible);
            const Solution back = integrate(sub.local_solution, sub, s);
            CHECK(back == s);
        }
    }
}

TEST_CASE("local objective mirrors the touched region") {
    const Metadata m = fig_tsp();
    const Solution s = fig_tour();
    const SubProblem sub = fig_sub(m, s);

    SECTION("identity arrangement has delta zero through integrate") {
        const double before = objective(m, s);
        const Solution back = integrate(sub.local_solution, sub, s);
        CHECK(objective(m, back) == before);
    }
    SECTION("reversing the whole tour reverses the fixed path at no cost") {
        // Locals: globals {4,5,6,7,8,9} ascending -> 4:0, 5:1, 6:2, 7:3,
        // 8:4, 9:5. Full reversal traverses the path (5,1) as (1,5).
        Solution reversed = sub.local_solution;
        auto& tour = reversed.routes[0];
        std::reverse(tour.begin(), tour.end());
        CHECK(check_local_feasible(sub, reversed).feasible);
        CHECK(local_objective(sub, reversed) ==
              local_objective(sub, sub.local_solution));
        const Solution back = integrate(reversed, sub, s);
        CHECK(check_feasible(m, back).feasible);
        CHECK(objective(m, back) == objective(m, s));
    }
    SECTION("repositioning a reversed path still pays only its internal cost") {
        // Place the path between different active neighbours, reversed. The
        // gap edges change; the internal cost term must not.
        Solution moved;
        moved.problem = Problem::tsp;
        moved.routes = {{1, 5, 0, 2, 3, 4}};  // path as (1,5), then actives
        CHECK(check_local_feasible(sub, moved).feasible);
        const auto& path = sub.constraints[0].path;
        int64_t expect = path.internal_cost;
        auto gap = [&](int a, int b) { return distance(sub.local_meta, a, b); };
        expect += gap(5, 0) + gap(0, 2) + gap(2, 3) + gap(3, 4) + gap(4, 1);
        CHECK(local_objective(sub, moved) == static_cast<double>(expect));
    }
}

TEST_CASE("crossing order costs more than perimeter order on a square") {
    // Four active corners of a 10x10 square plus two far-away static nodes.
    Metadata m;
    m.problem = Problem::tsp;
    m.name = "sq";
    m.num = 6;
    m.xs = {0, 10, 10, 0, 100, 110};
    m.ys = {0, 0, 10, 10, 0, 0};
    validate(m);
    Solution s;
    s.problem = Problem::tsp;
    s.routes = {{4, 5, 0, 2, 1, 3}};  // diagonals 0-2 and 1-3 crossed
    const auto sel = compute_selection(m, s, {0, 1, 2, 3});
    const SubProblem sub = compress(m, s, sel);

    Solution perimeter = sub.local_solution;
    auto& tour = perimeter.routes[0];
    std::vector<int> corner_locals;
    for (int gid : {0, 1, 2, 3}) corner_locals.push_back(sub.local_of(gid));
    size_t at = 0;
    for (size_t i = 0; i < tour.size(); ++i) {
        if (std::find(corner_locals.begin(), corner_locals.end(), tour[i]) !=
            corner_locals.end())
            tour[i] = corner_locals[at++];
    }
    REQUIRE(at == 4);
    CHECK(check_local_feasible(sub, perimeter).feasible);
    CHECK(local_objective(sub, perimeter) < local_objective(sub, sub.local_solution));
    // Crossing pays the two rounded diagonals (14 each) for two sides (10).
    CHECK(local_objective(sub, sub.local_solution) - local_objective(sub, perimeter) == 8);
}

TEST_CASE("delta consistency: global change equals local change exactly") {
    SeededRng rng(67);
    for (const Problem p : {Problem::tsp, Problem::cvrp, Problem::bpp, Problem::mkp}) {
        for (int trial = 0; trial < 50; ++trial) {
            const Metadata m =
                testing::make_instance(p, 6 + static_cast<int>(rng.uniform_int(0, 12)), rng);
            const Solution s = testing::random_feasible(m, rng);
            const int cap = 1 + static_cast<int>(rng.uniform_int(0, 5));
            const auto sel = decompose(DecomposeStrategy::random, m, s, cap, rng);
            const SubProblem sub = compress(m, s, sel);
            const auto outcome = reconstruct(ReconstructStrategy::heuristic, sub, rng);
            REQUIRE(outcome.solution.has_value());
            const Solution merged = integrate(*outcome.solution, sub, s);
            const double global_delta = objective(m, merged) - objective(m, s);
            const double local_delta = local_objective(sub, *outcome.solution) -
                                       local_objective(sub, sub.local_solution);
            CHECK(global_delta == local_delta);
        }
    }
}

TEST_CASE("integration refuses constraint-violating locals") {
    const Metadata m = fig_tsp();
    const Solution s = fig_tour();
    const SubProblem sub = fig_sub(m, s);
    // Active node 0 separates the path endpoints 5 and 1.
    Solution bad;
    bad.problem = Problem::tsp;
    bad.routes = {{5, 0, 1, 2, 3, 4}};
    const auto rep = check_local_feasible(sub, bad);
    CHECK(!rep.feasible);
    try {
        integrate(bad, sub, s);
        FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
        CHECK(!e.report().feasible);
        bool constraint = false;
        for (const auto& v : e.report().violations)
            if (v.kind == ViolationKind::constraint_broken) constraint = true;
        CHECK(constraint);
    }
}

TEST_CASE("empty active set is a degenerate subproblem") {
    const Metadata m = fig_tsp();
    const Solution s = fig_tour();
    ActiveSelection sel;
    CHECK_THROWS_AS(compress(m, s, sel), DegenerateSubproblemError);
}

TEST_CASE("constraint bookkeeping matches independent sums") {
    SeededRng rng(73);
    for (int trial = 0; trial < 40; ++trial) {
        const Problem p = rng.uniform01() < 0.5 ? Problem::tsp : Problem::cvrp;
        const Metadata m =
            testing::make_instance(p, 6 + static_cast<int>(rng.uniform_int(0, 10)), rng);
        const Solution s = testing::random_feasible(m, rng);
        const auto sel = decompose(DecomposeStrategy::random, m, s,
                                   1 + static_cast<int>(rng.uniform_int(0, 4)), rng);
        const SubProblem sub = compress(m, s, sel);
        for (const auto& con : sub.constraints) {
            if (con.kind != Constraint::Kind::fixed_path) continue;
            int64_t cost = 0;
            double interior_demand = 0;
            const auto& run = con.path.run_global;
            for (size_t i = 0; i + 1 < run.size(); ++i)
                cost += distance(m, run[i], run[i + 1]);
            for (size_t i = 1; i + 1 < run.size(); ++i)
                if (p == Problem::cvrp)
                    interior_demand += m.demand[static_cast<size_t>(run[i])];
            CHECK(con.path.internal_cost == cost);
            CHECK(con.path.internal_demand == interior_demand);
        }
    }
}

TEST_CASE("mkp bulky items stay pinned through the local checker") {
    Metadata m;
    m.problem = Problem::mkp;
    m.name = "k";
    m.num = 5;
    m.weights = {10, 20, 5, 8, 4};
    m.values = {1, 2, 3, 4, 5};
    m.capacities = {40, 30};
    validate(m);
    Solution s;
    s.problem = Problem::mkp;
    s.groups = {{0, 1}, {2, 3}};
    s.unassigned = {4};
    const auto sel = compute_selection(m, s, {3, 4});
    const SubProblem sub = compress(m, s, sel);

    Solution moved = sub.local_solution;
    REQUIRE(moved.groups.size() == 2);
    int bulky1 = -1;
    for (const auto& con : sub.constraints)
        if (con.kind == Constraint::Kind::bulky_item && con.bulky.group == 1)
            bulky1 = con.bulky.local_item;
    REQUIRE(bulky1 >= 0);
    auto& g1 = moved.groups[1];
    g1.erase(std::find(g1.begin(), g1.end(), bulky1));
    moved.groups[0].push_back(bulky1);
    const auto rep = check_local_feasible(sub, moved);
    CHECK(!rep.feasible);
    REQUIRE(!rep.violations.empty());
    CHECK(rep.violations[0].kind == ViolationKind::constraint_broken);
}
