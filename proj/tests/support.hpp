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

// Shared test fixtures: random instance/solution generators, single-fault
// corruptions, and independent brute-force oracles. Oracles here deliberately
// avoid the library's solver machinery; they enumerate from first principles.

#ifndef CARVE_TESTS_SUPPORT_HPP_
#define CARVE_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "carve/carve.hpp"

namespace carve::testing {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string data_path(const std::string& name) {
    return std::string(CARVE_DATA_DIR) + "/" + name;
}

inline std::string golden_path(const std::string& name) {
    return std::string(CARVE_GOLDEN_DIR) + "/" + name;
}

// The worked CVRP example instance from the wire-format documentation.
inline Metadata example_cvrp() {
    Metadata m;
    m.name = "CVRP-Example-001";
    m.problem = Problem::cvrp;
    m.num = 6;
    m.depot = 0;
    m.xs = {50, 20, 40, 60, 80, 30};
    m.ys = {50, 70, 60, 40, 30, 90};
    m.capacities = {100};
    m.demand = {0, 10, 20, 30, 25, 15};
    m.links = {{0, 5}, {4, 2}};
    validate(m);
    return m;
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

inline Metadata make_tsp(int num, SeededRng& rng) {
    Metadata m;
    m.problem = Problem::tsp;
    m.name = "tsp_r" + std::to_string(num);
    m.num = num;
    for (int i = 0; i < num; ++i) {
        m.xs.push_back(static_cast<double>(rng.uniform_int(0, 500)));
        m.ys.push_back(static_cast<double>(rng.uniform_int(0, 500)));
    }
    validate(m);
    return m;
}

inline Metadata make_cvrp(int num, SeededRng& rng) {
    Metadata m;
    m.problem = Problem::cvrp;
    m.name = "cvrp_r" + std::to_string(num);
    m.num = num;
    m.depot = 0;
    double total = 0;
    for (int i = 0; i < num; ++i) {
        m.xs.push_back(static_cast<double>(rng.uniform_int(0, 500)));
        m.ys.push_back(static_cast<double>(rng.uniform_int(0, 500)));
        const double d = i == 0 ? 0 : static_cast<double>(rng.uniform_int(1, 10));
        m.demand.push_back(d);
        total += d;
    }
    m.capacities = {std::max(10.0, std::ceil(total / 3.0))};
    validate(m);
    return m;
}

inline Metadata make_bpp(int num, SeededRng& rng) {
    Metadata m;
    m.problem = Problem::bpp;
    m.name = "bpp_r" + std::to_string(num);
    m.num = num;
    for (int i = 0; i < num; ++i)
        m.weights.push_back(static_cast<double>(rng.uniform_int(1, 50)));
    m.capacities = {100};
    validate(m);
    return m;
}

inline Metadata make_mkp(int num, int knapsacks, SeededRng& rng) {
    Metadata m;
    m.problem = Problem::mkp;
    m.name = "mkp_r" + std::to_string(num);
    m.num = num;
    for (int i = 0; i < num; ++i) {
        m.weights.push_back(static_cast<double>(rng.uniform_int(1, 60)));
        m.values.push_back(static_cast<double>(rng.uniform_int(1, 100)));
    }
    for (int k = 0; k < knapsacks; ++k)
        m.capacities.push_back(static_cast<double>(rng.uniform_int(80, 200)));
    validate(m);
    return m;
}

inline Metadata make_instance(Problem p, int num, SeededRng& rng) {
    switch (p) {
        case Problem::tsp: return make_tsp(num, rng);
        case Problem::cvrp: return make_cvrp(num, rng);
        case Problem::bpp: return make_bpp(num, rng);
        case Problem::mkp: return make_mkp(num, std::max(2, num / 4), rng);
    }
    throw std::runtime_error("bad problem");
}

// ---------------------------------------------------------------------------
// Random feasible solutions (independent of the library's heuristics)
// ---------------------------------------------------------------------------

inline Solution random_feasible(const Metadata& m, SeededRng& rng) {
    Solution s;
    s.problem = m.problem;
    switch (m.problem) {
        case Problem::tsp: {
            std::vector<int> tour(static_cast<size_t>(m.num));
            std::iota(tour.begin(), tour.end(), 0);
            rng.shuffle(tour);
            s.routes.push_back(std::move(tour));
            break;
        }
        case Problem::cvrp: {
            std::vector<int> customers;
            for (int i = 0; i < m.num; ++i)
                if (i != m.depot) customers.push_back(i);
            rng.shuffle(customers);
            std::vector<int> route = {m.depot};
            double load = 0;
            for (int c : customers) {
                if (load + m.demand[static_cast<size_t>(c)] > m.capacity()) {
                    route.push_back(m.depot);
                    s.routes.push_back(route);
                    route = {m.depot};
                    load = 0;
                }
                route.push_back(c);
                load += m.demand[static_cast<size_t>(c)];
            }
            route.push_back(m.depot);
            s.routes.push_back(route);
            break;
        }
        case Problem::bpp: {
            std::vector<int> items(static_cast<size_t>(m.num));
            std::iota(items.begin(), items.end(), 0);
            rng.shuffle(items);
            std::vector<double> residual;
            for (int item : items) {
                const double w = m.weights[static_cast<size_t>(item)];
                // random existing bin that fits, else a new bin
                std::vector<int> fits;
                for (size_t g = 0; g < residual.size(); ++g)
                    if (w <= residual[g]) fits.push_back(static_cast<int>(g));
                if (!fits.empty() && rng.uniform01() < 0.8) {
                    const int g = fits[static_cast<size_t>(
                        rng.uniform_int(0, static_cast<int64_t>(fits.size()) - 1))];
                    s.groups[static_cast<size_t>(g)].push_back(item);
                    residual[static_cast<size_t>(g)] -= w;
                } else {
                    s.groups.push_back({item});
                    residual.push_back(m.capacity() - w);
                }
            }
            break;
        }
        case Problem::mkp: {
            std::vector<int> items(static_cast<size_t>(m.num));
            std::iota(items.begin(), items.end(), 0);
            rng.shuffle(items);
            s.groups.assign(m.capacities.size(), {});
            std::vector<double> residual = m.capacities;
            for (int item : items) {
                const double w = m.weights[static_cast<size_t>(item)];
                const int pick =
                    static_cast<int>(rng.uniform_int(0, m.knapsack_count()));
                if (pick < m.knapsack_count() && w <= residual[static_cast<size_t>(pick)]) {
                    s.groups[static_cast<size_t>(pick)].push_back(item);
                    residual[static_cast<size_t>(pick)] -= w;
                } else {
                    s.unassigned.push_back(item);
                }
            }
            std::sort(s.unassigned.begin(), s.unassigned.end());
            break;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Single-fault corruptions
// ---------------------------------------------------------------------------

enum class Fault { drop, duplicate, overload };

// Applies one fault of the requested kind, or returns nullopt when that kind
// cannot be realized on this particular solution.
inline std::optional<Solution> corrupt(const Metadata& m, const Solution& s, Fault fault,
                                       SeededRng& rng) {
    Solution c = s;
    switch (m.problem) {
        case Problem::tsp: {
            auto& tour = c.routes.at(0);
            if (fault == Fault::drop) {
                if (tour.empty()) return std::nullopt;
                tour.erase(tour.begin() + rng.uniform_int(0, static_cast<int64_t>(tour.size()) - 1));
                return c;
            }
            if (fault == Fault::duplicate) {
                if (tour.empty()) return std::nullopt;
                const int node = tour[static_cast<size_t>(
                    rng.uniform_int(0, static_cast<int64_t>(tour.size()) - 1))];
                tour.insert(tour.begin() + rng.uniform_int(0, static_cast<int64_t>(tour.size())),
                            node);
                return c;
            }
            return std::nullopt;  // no capacity to overload
        }
        case Problem::cvrp: {
            std::vector<std::pair<size_t, size_t>> positions;  // (route, index)
            for (size_t r = 0; r < c.routes.size(); ++r)
                for (size_t i = 1; i + 1 < c.routes[r].size(); ++i) positions.emplace_back(r, i);
            if (positions.empty()) return std::nullopt;
            const auto [r, i] = positions[static_cast<size_t>(
                rng.uniform_int(0, static_cast<int64_t>(positions.size()) - 1))];
            const int node = c.routes[r][i];
            if (fault == Fault::drop) {
                c.routes[r].erase(c.routes[r].begin() + static_cast<long>(i));
                return c;
            }
            if (fault == Fault::duplicate) {
                // A duplicate in its own fresh route keeps every capacity intact.
                c.routes.push_back({m.depot, node, m.depot});
                return c;
            }
            // overload: move the largest-demand customer into the fullest other route
            auto route_load = [&](const std::vector<int>& route) {
                double load = 0;
                for (size_t k = 1; k + 1 < route.size(); ++k)
                    load += m.demand[static_cast<size_t>(route[k])];
                return load;
            };
            for (auto [sr, si] : positions) {
                const int cand = c.routes[sr][si];
                for (size_t tr = 0; tr < c.routes.size(); ++tr) {
                    if (tr == sr) continue;
                    if (route_load(c.routes[tr]) + m.demand[static_cast<size_t>(cand)] >
                        m.capacity()) {
                        c.routes[sr].erase(c.routes[sr].begin() + static_cast<long>(si));
                        c.routes[tr].insert(c.routes[tr].end() - 1, cand);
                        return c;
                    }
                }
            }
            return std::nullopt;
        }
        case Problem::bpp:
        case Problem::mkp: {
            std::vector<std::pair<size_t, size_t>> positions;
            for (size_t g = 0; g < c.groups.size(); ++g)
                for (size_t i = 0; i < c.groups[g].size(); ++i) positions.emplace_back(g, i);
            if (fault == Fault::drop) {
                if (!positions.empty()) {
                    const auto [g, i] = positions[static_cast<size_t>(
                        rng.uniform_int(0, static_cast<int64_t>(positions.size()) - 1))];
                    c.groups[g].erase(c.groups[g].begin() + static_cast<long>(i));
                    return c;
                }
                if (m.problem == Problem::mkp && !c.unassigned.empty()) {
                    c.unassigned.erase(c.unassigned.begin());
                    return c;
                }
                return std::nullopt;
            }
            if (fault == Fault::duplicate) {
                if (positions.empty()) return std::nullopt;
                const auto [g, i] = positions[static_cast<size_t>(
                    rng.uniform_int(0, static_cast<int64_t>(positions.size()) - 1))];
                const int item = c.groups[g][i];
                if (m.problem == Problem::bpp) {
                    c.groups.push_back({item});  // fresh bin: no capacity side effect
                } else {
                    c.unassigned.insert(
                        std::lower_bound(c.unassigned.begin(), c.unassigned.end(), item),
                        item);
                }
                return c;
            }
            // overload: move an item to a group whose residual cannot take it
            auto group_load = [&](const std::vector<int>& g) {
                double load = 0;
                for (int item : g) load += m.weights[static_cast<size_t>(item)];
                return load;
            };
            for (auto [sg, si] : positions) {
                const int item = c.groups[sg][si];
                for (size_t tg = 0; tg < c.groups.size(); ++tg) {
                    if (tg == sg) continue;
                    const double cap =
                        m.problem == Problem::bpp ? m.capacity() : m.capacities[tg];
                    if (group_load(c.groups[tg]) + m.weights[static_cast<size_t>(item)] > cap) {
                        c.groups[sg].erase(c.groups[sg].begin() + static_cast<long>(si));
                        c.groups[tg].push_back(item);
                        return c;
                    }
                }
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

inline ViolationKind expected_kind(Fault fault) {
    switch (fault) {
        case Fault::drop: return ViolationKind::missing;
        case Fault::duplicate: return ViolationKind::duplicate;
        case Fault::overload: return ViolationKind::capacity_exceeded;
    }
    throw std::runtime_error("bad fault");
}

// ---------------------------------------------------------------------------
// Brute-force routing oracle. Rebuilds the unit view from the constraint set
// alone and enumerates arrangements with std::next_permutation — a different
// mechanism from the solver's branch and bound.
// ---------------------------------------------------------------------------

struct OracleUnit {
    int a = -1;  // first port
    int b = -1;  // second port (== a for free nodes)
    int64_t internal = 0;
    double demand = 0;
};

inline std::vector<OracleUnit> oracle_units(const SubProblem& sub) {
    const Metadata& lm = sub.local_meta;
    auto demand_of = [&](int node) {
        return lm.problem == Problem::cvrp ? lm.demand[static_cast<size_t>(node)] : 0.0;
    };
    std::set<int> in_path;
    std::vector<OracleUnit> units;
    for (const auto& con : sub.constraints) {
        if (con.kind != Constraint::Kind::fixed_path) continue;
        if (con.path.entry == con.path.exit) continue;
        units.push_back({con.path.entry, con.path.exit, con.path.internal_cost,
                         demand_of(con.path.entry) + demand_of(con.path.exit) +
                             con.path.internal_demand});
        in_path.insert(con.path.entry);
        in_path.insert(con.path.exit);
    }
    for (int id = 0; id < lm.num; ++id) {
        if (in_path.count(id)) continue;
        if (lm.problem == Problem::cvrp && id == lm.depot) continue;
        units.push_back({id, id, 0, demand_of(id)});
    }
    return units;
}

// Orientation choices only matter for two-port units; flip_slot[i] is the
// bit index deciding unit i's direction, or -1 for free nodes.
inline std::pair<std::vector<int>, size_t> orientation_slots(
    const std::vector<OracleUnit>& units) {
    std::vector<int> slot(units.size(), -1);
    size_t bits = 0;
    for (size_t i = 0; i < units.size(); ++i)
        if (units[i].a != units[i].b) slot[i] = static_cast<int>(bits++);
    return {slot, bits};
}

// Minimal cycle cost over all unit permutations and path orientations.
inline int64_t oracle_tsp_min(const SubProblem& sub) {
    const Metadata& lm = sub.local_meta;
    const auto units = oracle_units(sub);
    const auto [slot, bits] = orientation_slots(units);
    const size_t n = units.size();
    int64_t best = std::numeric_limits<int64_t>::max();
    // Fix unit 0's position: cycles are rotation invariant.
    std::vector<size_t> rest;
    for (size_t i = 1; i < n; ++i) rest.push_back(i);
    do {
        std::vector<size_t> order = {0};
        order.insert(order.end(), rest.begin(), rest.end());
        for (uint64_t mask = 0; mask < (uint64_t{1} << bits); ++mask) {
            auto flipped = [&](size_t unit) {
                return slot[unit] >= 0 && (mask >> slot[unit] & 1);
            };
            int64_t cost = 0;
            for (size_t k = 0; k < n; ++k) {
                const auto& u = units[order[k]];
                const auto& v = units[order[(k + 1) % n]];
                const int out = flipped(order[k]) ? u.a : u.b;
                const int in = flipped(order[(k + 1) % n]) ? v.b : v.a;
                cost += u.internal + distance(lm, out, in);
            }
            best = std::min(best, cost);
        }
    } while (std::next_permutation(rest.begin(), rest.end()));
    return best;
}

// Minimal total cost over permutations x route splits x path orientations
// with capacity filtering.
inline int64_t oracle_cvrp_min(const SubProblem& sub) {
    const Metadata& lm = sub.local_meta;
    const auto units = oracle_units(sub);
    const auto [slot, bits] = orientation_slots(units);
    const size_t n = units.size();
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    int64_t best = std::numeric_limits<int64_t>::max();
    do {
        for (uint64_t split = 0; split < (n > 1 ? (uint64_t{1} << (n - 1)) : 1); ++split) {
            for (uint64_t mask = 0; mask < (uint64_t{1} << bits); ++mask) {
                auto flipped = [&](size_t unit) {
                    return slot[unit] >= 0 && (mask >> slot[unit] & 1);
                };
                int64_t cost = 0;
                double load = 0;
                bool feasible = true;
                int prev_port = lm.depot;
                for (size_t k = 0; k < n && feasible; ++k) {
                    const auto& u = units[perm[k]];
                    const int in = flipped(perm[k]) ? u.b : u.a;
                    const int out = flipped(perm[k]) ? u.a : u.b;
                    cost += distance(lm, prev_port, in) + u.internal;
                    load += u.demand;
                    if (load > lm.capacity()) feasible = false;
                    const bool route_ends = k == n - 1 || (split >> k & 1);
                    if (route_ends) {
                        cost += distance(lm, out, lm.depot);
                        prev_port = lm.depot;
                        load = 0;
                    } else {
                        prev_port = out;
                    }
                }
                if (feasible) best = std::min(best, cost);
            }
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Exhaustive minimal bin count for small bpp instances.
inline int oracle_min_bins(const std::vector<double>& weights, double capacity) {
    const size_t n = weights.size();
    int best = static_cast<int>(n);
    std::vector<double> bins;
    std::function<void(size_t)> dfs = [&](size_t idx) {
        if (static_cast<int>(bins.size()) >= best) return;
        if (idx == n) {
            best = static_cast<int>(bins.size());
            return;
        }
        for (size_t b = 0; b < bins.size(); ++b) {
            if (bins[b] + weights[idx] <= capacity) {
                bins[b] += weights[idx];
                dfs(idx + 1);
                bins[b] -= weights[idx];
            }
        }
        bins.push_back(weights[idx]);
        dfs(idx + 1);
        bins.pop_back();
    };
    dfs(0);
    return best;
}

// ---------------------------------------------------------------------------
// Fixed instances behind the prompt golden files. Each problem gets one
// deterministic (instance, solution, selection) triple.
// ---------------------------------------------------------------------------

struct GoldenCase {
    Metadata meta;
    Solution solution;
    SubProblem sub;
};

inline GoldenCase golden_tsp() {
    GoldenCase c;
    Metadata& m = c.meta;
    m.problem = Problem::tsp;
    m.name = "golden-tsp";
    m.num = 12;
    m.xs = {0, 20, 10, 40, 50, 60, 40, 20, 0, 60, 30, 60};
    m.ys = {0, 0, 0, 0, 0, 0, 20, 20, 20, 20, 0, 10};
    validate(m);
    c.solution.problem = Problem::tsp;
    c.solution.routes = {{0, 2, 1, 10, 3, 4, 5, 11, 9, 6, 7, 8}};
    // Runs [1,10,3], [5,11,9] and the singleton anchor [0]; local ids equal
    // global ids, so the constraints render as (1,3), (5,9).
    c.sub = compress(c.meta, c.solution,
                     compute_selection(c.meta, c.solution, {2, 4, 6, 7, 8}));
    return c;
}

inline GoldenCase golden_cvrp() {
    GoldenCase c;
    c.meta = example_cvrp();
    c.solution.problem = Problem::cvrp;
    c.solution.routes = {{0, 2, 3, 0}, {0, 1, 5, 4, 0}};
    c.sub = compress(c.meta, c.solution,
                     compute_selection(c.meta, c.solution, {3, 4}));
    return c;
}

inline GoldenCase golden_bpp() {
    GoldenCase c;
    Metadata& m = c.meta;
    m.problem = Problem::bpp;
    m.name = "golden-bpp";
    m.num = 6;
    m.weights = {40, 35, 25, 20, 10, 5};
    m.capacities = {60};
    validate(m);
    c.solution = ffd_pack(m);  // [[0,3],[1,2],[4,5]]
    c.sub = compress(c.meta, c.solution,
                     compute_selection(c.meta, c.solution, {3, 5}));
    return c;
}

inline GoldenCase golden_mkp() {
    GoldenCase c;
    Metadata& m = c.meta;
    m.problem = Problem::mkp;
    m.name = "golden-mkp";
    m.num = 4;
    m.weights = {30, 20, 15, 10};
    m.values = {50, 40, 30, 20};
    m.capacities = {50, 35};
    validate(m);
    c.solution.problem = Problem::mkp;
    c.solution.groups = {{0, 2}, {1}};
    c.solution.unassigned = {3};
    c.sub = compress(c.meta, c.solution,
                     compute_selection(c.meta, c.solution, {2, 3}));
    return c;
}

inline GoldenCase golden_case(Problem p) {
    switch (p) {
        case Problem::tsp: return golden_tsp();
        case Problem::cvrp: return golden_cvrp();
        case Problem::bpp: return golden_bpp();
        case Problem::mkp: return golden_mkp();
    }
    throw std::runtime_error("bad problem");
}

// Random subproblem for the exact-oracle comparison; keeps the unit count
// small enough for plain enumeration and guarantees at least one condensed
// path of two or more nodes.
struct RoutingSubCase {
    Metadata meta;
    Solution solution;
    SubProblem sub;
};

inline RoutingSubCase random_routing_subproblem(Problem p, SeededRng& rng, size_t max_units) {
    while (true) {
        const int num = static_cast<int>(rng.uniform_int(p == Problem::tsp ? 7 : 6,
                                                         p == Problem::tsp ? 11 : 9));
        Metadata m = p == Problem::tsp ? make_tsp(num, rng) : make_cvrp(num, rng);
        Solution s = random_feasible(m, rng);
        const auto eligible = eligible_elements(m, s);
        const int cap = static_cast<int>(
            rng.uniform_int(2, std::min<int64_t>(6, static_cast<int64_t>(eligible.size()))));
        const auto active = rng.sample(eligible, static_cast<size_t>(cap));
        const auto sel = compute_selection(m, s, active);
        bool has_long_run = false;
        for (const auto& run : sel.static_runs)
            if (run.size() >= 2) has_long_run = true;
        if (!has_long_run) continue;
        size_t units = active.size();
        for (const auto& run : sel.static_runs) units += 1;
        if (units > max_units) continue;
        RoutingSubCase c{std::move(m), std::move(s), {}};
        c.sub = compress(c.meta, c.solution, sel);
        return c;
    }
}

}  // namespace carve::testing

#endif  // CARVE_TESTS_SUPPORT_HPP_
