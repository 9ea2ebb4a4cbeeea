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

#ifndef CARVE_SUBPROBLEM_HPP_
#define CARVE_SUBPROBLEM_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "carve/error.hpp"
#include "carve/instance.hpp"
#include "carve/selection.hpp"
#include "carve/solution.hpp"

namespace carve {

// A static routing run condensed to its two endpoints. Both endpoints stay
// visible as local nodes; the interior nodes contribute internal_cost and
// internal_demand. entry == exit for runs of length one (zero internals).
// Ids are in local space; run_global remembers the full original node
// sequence, entry first, for re-expansion.
struct FixedPath {
    int entry = -1;
    int exit = -1;
    int64_t internal_cost = 0;
    double internal_demand = 0;
    bool reversible = true;
    std::vector<int> run_global;
};

// A group's static packing items fused into one pseudo-item pinned to that
// group. local_item is the pseudo-item's id in the local instance.
struct BulkyItem {
    int group = -1;
    double weight = 0;
    double value = 0;
    int local_item = -1;
    std::vector<int> items_global;
};

struct Constraint {
    enum class Kind { fixed_path, bulky_item };
    Kind kind = Kind::fixed_path;
    FixedPath path;
    BulkyItem bulky;
};

// Compressed local instance: metadata over local ids, the current local
// arrangement, the constraint set, and the local<->global id map. Immutable
// once built; source_meta must outlive the subproblem.
struct SubProblem {
    Metadata local_meta;
    Solution local_solution;
    std::vector<Constraint> constraints;
    std::vector<int> local_to_global;           // -1 for bulky pseudo-items
    std::map<int, int> global_to_local;
    std::vector<int> active_locals;
    std::vector<int> static_unassigned_global;  // mkp items that stay unassigned
    const Metadata* source_meta = nullptr;

    int active_count() const { return static_cast<int>(active_locals.size()); }
    int global_of(int local) const { return local_to_global.at(static_cast<size_t>(local)); }
    int local_of(int global) const { return global_to_local.at(global); }
    bool is_pseudo(int local) const { return global_of(local) < 0; }
};

// Integration refusal; carries the local feasibility report that caused it.
class IntegrationError : public Error {
  public:
    IntegrationError(const std::string& what, FeasibilityReport report)
        : Error(what), report_(std::move(report)) {}
    const FeasibilityReport& report() const { return report_; }

  private:
    FeasibilityReport report_;
};

namespace detail {

inline int64_t run_cost(const Metadata& m, const std::vector<int>& run) {
    int64_t total = 0;
    for (size_t i = 0; i + 1 < run.size(); ++i) total += distance(m, run[i], run[i + 1]);
    return total;
}

inline double run_interior_demand(const Metadata& m, const std::vector<int>& run) {
    if (m.problem != Problem::cvrp || run.size() < 3) return 0;
    double total = 0;
    for (size_t i = 1; i + 1 < run.size(); ++i)
        total += m.demand[static_cast<size_t>(run[i])];
    return total;
}

}  // namespace detail

// Compress (M, a, s) into the reduced instance (M', S', C). Routing keeps the
// active nodes plus one retained endpoint pair per static run; packing keeps
// the active items plus one bulky pseudo-item per group with static content.
inline SubProblem compress(const Metadata& m, const Solution& s, const ActiveSelection& sel) {
    if (sel.active.empty())
        throw DegenerateSubproblemError("cannot compress an empty active set");
    SubProblem sub;
    sub.source_meta = &m;
    sub.local_meta.problem = m.problem;
    sub.local_meta.name = m.name + "_sub";
    sub.local_solution.problem = m.problem;

    const std::set<int> active_set(sel.active.begin(), sel.active.end());

    if (is_routing(m.problem)) {
        // Local id assignment: depot first (cvrp), then retained globals ascending.
        std::set<int> retained(sel.active.begin(), sel.active.end());
        for (const auto& run : sel.static_runs) {
            retained.insert(run.front());
            retained.insert(run.back());
        }
        if (m.problem == Problem::cvrp) retained.erase(m.depot);
        std::vector<int> locals;
        if (m.problem == Problem::cvrp) locals.push_back(m.depot);
        locals.insert(locals.end(), retained.begin(), retained.end());

        sub.local_to_global = locals;
        for (size_t lid = 0; lid < locals.size(); ++lid)
            sub.global_to_local[locals[lid]] = static_cast<int>(lid);
        sub.local_meta.num = static_cast<int>(locals.size());
        for (int gid : locals) {
            sub.local_meta.xs.push_back(m.xs[static_cast<size_t>(gid)]);
            sub.local_meta.ys.push_back(m.ys[static_cast<size_t>(gid)]);
            if (m.problem == Problem::cvrp)
                sub.local_meta.demand.push_back(m.demand[static_cast<size_t>(gid)]);
        }
        if (m.problem == Problem::cvrp) {
            sub.local_meta.depot = 0;
            sub.local_meta.capacities = m.capacities;
        }
        for (int gid : sel.active) sub.active_locals.push_back(sub.local_of(gid));

        std::map<int, int> run_of;  // global node -> run index
        for (size_t r = 0; r < sel.static_runs.size(); ++r) {
            const auto& run = sel.static_runs[r];
            for (int node : run) run_of[node] = static_cast<int>(r);
            Constraint c;
            c.kind = Constraint::Kind::fixed_path;
            c.path.entry = sub.local_of(run.front());
            c.path.exit = sub.local_of(run.back());
            c.path.internal_cost = detail::run_cost(m, run);
            c.path.internal_demand = detail::run_interior_demand(m, run);
            c.path.run_global = run;
            sub.constraints.push_back(std::move(c));
        }

        // Condense the current arrangement: every run collapses to its
        // endpoint pair (or single node), actives map through directly.
        auto condense_walk = [&](const std::vector<int>& seq, size_t begin, size_t count,
                                 bool cyclic) {
            std::vector<int> out;
            size_t consumed = 0;
            size_t i = begin;
            const size_t n = seq.size();
            while (consumed < count) {
                const int node = seq[cyclic ? i % n : i];
                if (active_set.count(node)) {
                    out.push_back(sub.local_of(node));
                    ++i;
                    ++consumed;
                } else {
                    const auto& run =
                        sel.static_runs[static_cast<size_t>(run_of.at(node))];
                    out.push_back(sub.local_of(run.front()));
                    if (run.size() > 1) out.push_back(sub.local_of(run.back()));
                    i += run.size();
                    consumed += run.size();
                }
            }
            return out;
        };

        if (m.problem == Problem::tsp) {
            const auto& tour = s.routes.at(0);
            size_t first_active = 0;
            for (size_t i = 0; i < tour.size(); ++i)
                if (active_set.count(tour[i])) {
                    first_active = i;
                    break;
                }
            sub.local_solution.routes.push_back(
                condense_walk(tour, first_active, tour.size(), true));
        } else {
            for (const auto& route : s.routes) {
                std::vector<int> local_route = {0};
                if (route.size() >= 2) {
                    auto interior = condense_walk(route, 1, route.size() - 2, false);
                    local_route.insert(local_route.end(), interior.begin(), interior.end());
                }
                local_route.push_back(0);
                sub.local_solution.routes.push_back(std::move(local_route));
            }
        }
    } else {
        // Packing: actives ascending, then one bulky pseudo-item per group
        // that has static content.
        std::vector<int> actives(active_set.begin(), active_set.end());
        sub.local_to_global = actives;
        for (size_t lid = 0; lid < actives.size(); ++lid)
            sub.global_to_local[actives[lid]] = static_cast<int>(lid);
        for (int gid : sel.active) sub.active_locals.push_back(sub.local_of(gid));
        for (int gid : actives) {
            sub.local_meta.weights.push_back(m.weights[static_cast<size_t>(gid)]);
            if (m.problem == Problem::mkp)
                sub.local_meta.values.push_back(m.values[static_cast<size_t>(gid)]);
        }
        const size_t group_count = s.groups.size();
        std::vector<int> bulky_of_group(group_count, -1);
        for (size_t g = 0; g < group_count; ++g) {
            const auto& statics = sel.static_runs[g];
            if (statics.empty()) continue;
            Constraint c;
            c.kind = Constraint::Kind::bulky_item;
            c.bulky.group = static_cast<int>(g);
            c.bulky.items_global = statics;
            for (int item : statics) {
                c.bulky.weight += m.weights[static_cast<size_t>(item)];
                if (m.problem == Problem::mkp)
                    c.bulky.value += m.values[static_cast<size_t>(item)];
            }
            c.bulky.local_item = static_cast<int>(sub.local_to_global.size());
            bulky_of_group[g] = c.bulky.local_item;
            sub.local_to_global.push_back(-1);
            sub.local_meta.weights.push_back(c.bulky.weight);
            if (m.problem == Problem::mkp) sub.local_meta.values.push_back(c.bulky.value);
            sub.constraints.push_back(std::move(c));
        }
        sub.local_meta.num = static_cast<int>(sub.local_to_global.size());
        sub.local_meta.capacities = m.capacities;

        sub.local_solution.groups.assign(group_count, {});
        for (size_t g = 0; g < group_count; ++g) {
            if (bulky_of_group[g] >= 0)
                sub.local_solution.groups[g].push_back(bulky_of_group[g]);
            for (int item : s.groups[g])
                if (active_set.count(item))
                    sub.local_solution.groups[g].push_back(sub.local_of(item));
        }
        if (m.problem == Problem::mkp) {
            sub.static_unassigned_global = sel.static_runs[group_count];
            for (int item : s.unassigned)
                if (active_set.count(item))
                    sub.local_solution.unassigned.push_back(sub.local_of(item));
            std::sort(sub.local_solution.unassigned.begin(),
                      sub.local_solution.unassigned.end());
        }
    }
    validate(sub.local_meta);
    return sub;
}

namespace detail {

// Unordered endpoint pair -> constraint index, for paths with distinct ends.
inline std::map<std::pair<int, int>, size_t> path_pair_index(const SubProblem& sub) {
    std::map<std::pair<int, int>, size_t> index;
    for (size_t c = 0; c < sub.constraints.size(); ++c) {
        const auto& con = sub.constraints[c];
        if (con.kind != Constraint::Kind::fixed_path) continue;
        if (con.path.entry == con.path.exit) continue;
        index[std::minmax(con.path.entry, con.path.exit)] = c;
    }
    return index;
}

}  // namespace detail

// Objective of a local arrangement: gap edges are measured between local
// nodes, and each traversed fixed path contributes its internal cost in place
// of the direct edge between its endpoints. Packing matches the global
// objective restricted to local (incl. bulky) items. Total function: missing
// traversals are a feasibility matter, not an evaluation error.
inline double local_objective(const SubProblem& sub, const Solution& local) {
    const Metadata& lm = sub.local_meta;
    if (local.problem != lm.problem)
        throw UsageError("local solution problem type mismatch");
    if (!is_routing(lm.problem)) return objective(lm, local);

    const auto paths = detail::path_pair_index(sub);
    auto edge_cost = [&](int a, int b) -> int64_t {
        const auto it = paths.find(std::minmax(a, b));
        if (it != paths.end())
            return sub.constraints[it->second].path.internal_cost;
        return distance(lm, a, b);
    };
    int64_t total = 0;
    if (lm.problem == Problem::tsp) {
        const auto& tour = local.routes.at(0);
        for (size_t i = 0; i < tour.size(); ++i)
            if (tour.size() > 1)
                total += edge_cost(tour[i], tour[(i + 1) % tour.size()]);
    } else {
        for (const auto& route : local.routes)
            for (size_t i = 0; i + 1 < route.size(); ++i)
                total += edge_cost(route[i], route[i + 1]);
    }
    return static_cast<double>(total);
}

// All global-style checks in local id space, plus the constraint checks:
// every fixed path must appear as one atomic (possibly reversed) adjacency,
// bulky items must stay in their pinned groups, and cvrp route loads include
// the internal demands of the paths they traverse.
inline FeasibilityReport check_local_feasible(const SubProblem& sub, const Solution& local) {
    const Metadata& lm = sub.local_meta;
    FeasibilityReport rep;
    if (local.problem != lm.problem) {
        rep.add(ViolationKind::constraint_broken, "Solution problem type mismatch");
        return rep;
    }

    if (lm.problem == Problem::cvrp) {
        detail::CoverageCounter cover(lm.num);
        std::vector<int> out_of_range;
        const auto paths = detail::path_pair_index(sub);
        for (size_t r = 0; r < local.routes.size(); ++r) {
            const auto& route = local.routes[r];
            if (route.size() < 2 || route.front() != lm.depot || route.back() != lm.depot)
                rep.add(ViolationKind::bad_endpoints,
                        "Route " + std::to_string(r) + " must start and end at depot " +
                            std::to_string(lm.depot),
                        {static_cast<int>(r)});
            double load = 0;
            for (size_t i = 1; i + 1 < route.size(); ++i) {
                const int id = route[i];
                if (id == lm.depot) {
                    rep.add(ViolationKind::duplicate,
                            "Depot revisited inside route " + std::to_string(r), {id});
                    continue;
                }
                if (!cover.note(id)) {
                    out_of_range.push_back(id);
                    continue;
                }
                load += lm.demand[static_cast<size_t>(id)];
            }
            // Internal demands of the fixed paths traversed by this route.
            for (size_t i = 1; i + 2 < route.size(); ++i) {
                const auto it = paths.find(std::minmax(route[i], route[i + 1]));
                if (it != paths.end())
                    load += sub.constraints[it->second].path.internal_demand;
            }
            if (load > lm.capacity())
                rep.add(ViolationKind::capacity_exceeded,
                        "Route " + std::to_string(r) + " exceeds vehicle capacity: load " +
                            detail::number_str(load) + " > " +
                            detail::number_str(lm.capacity()),
                        {static_cast<int>(r)});
        }
        detail::report_coverage(cover, true, false, {lm.depot}, rep);
        if (!out_of_range.empty())
            rep.add(ViolationKind::constraint_broken,
                    "Element id(s) out of range: " + detail::id_list(out_of_range),
                    out_of_range);
    } else {
        rep = check_feasible(lm, local);
    }

    // Fixed-path adjacency.
    for (const auto& con : sub.constraints) {
        if (con.kind != Constraint::Kind::fixed_path) continue;
        const int a = con.path.entry, b = con.path.exit;
        if (a == b) continue;  // single retained node; coverage already checks it
        int traversals = 0;
        auto scan = [&](const std::vector<int>& seq, bool cyclic) {
            if (seq.size() < 2) return;
            const size_t last = cyclic ? seq.size() : seq.size() - 1;
            for (size_t i = 0; i < last; ++i) {
                const int u = seq[i], v = seq[(i + 1) % seq.size()];
                if ((u == a && v == b) || (u == b && v == a)) ++traversals;
            }
        };
        if (lm.problem == Problem::tsp) {
            for (const auto& tour : local.routes) scan(tour, true);
        } else if (lm.problem == Problem::cvrp) {
            for (const auto& route : local.routes) scan(route, false);
        }
        if (traversals != 1)
            rep.add(ViolationKind::constraint_broken,
                    "Fixed path (" + std::to_string(a) + "," + std::to_string(b) +
                        ") must be visited consecutively with no other nodes in between",
                    {a, b});
    }

    // Bulky pinning.
    for (const auto& con : sub.constraints) {
        if (con.kind != Constraint::Kind::bulky_item) continue;
        const auto& groups = local.groups;
        const size_t g = static_cast<size_t>(con.bulky.group);
        const bool present =
            g < groups.size() &&
            std::find(groups[g].begin(), groups[g].end(), con.bulky.local_item) !=
                groups[g].end();
        if (!present)
            rep.add(ViolationKind::constraint_broken,
                    "Bulky item " + std::to_string(con.bulky.local_item) + " must stay in " +
                        (lm.problem == Problem::bpp ? "bin " : "knapsack ") +
                        std::to_string(con.bulky.group),
                    {con.bulky.local_item});
    }
    return rep;
}

namespace detail {

// Expands a condensed local walk back to global ids. Positions belonging to a
// fixed-path pair splice the stored run, oriented by traversal direction.
inline void expand_walk(const SubProblem& sub, const std::vector<int>& seq, size_t begin,
                        size_t count, bool cyclic,
                        const std::map<std::pair<int, int>, size_t>& paths,
                        std::vector<int>& out) {
    const size_t n = seq.size();
    size_t consumed = 0;
    size_t i = begin;
    while (consumed < count) {
        const int u = seq[cyclic ? i % n : i];
        const bool has_next = consumed + 1 < count;
        const int v = has_next ? seq[cyclic ? (i + 1) % n : i + 1] : -1;
        const auto it = has_next ? paths.find(std::minmax(u, v)) : paths.end();
        if (it != paths.end()) {
            const auto& run = sub.constraints[it->second].path.run_global;
            const int entry = sub.constraints[it->second].path.entry;
            if (u == entry)
                out.insert(out.end(), run.begin(), run.end());
            else
                out.insert(out.end(), run.rbegin(), run.rend());
            i += 2;
            consumed += 2;
        } else {
            const int gid = sub.global_of(u);
            // Singleton runs expand through their stored sequence (one node).
            bool spliced = false;
            for (const auto& con : sub.constraints) {
                if (con.kind == Constraint::Kind::fixed_path && con.path.entry == u &&
                    con.path.exit == u) {
                    out.insert(out.end(), con.path.run_global.begin(),
                               con.path.run_global.end());
                    spliced = true;
                    break;
                }
            }
            if (!spliced) out.push_back(gid);
            ++i;
            ++consumed;
        }
    }
}

}  // namespace detail

// Splices a refined local solution back into the global one. Refuses (throws
// IntegrationError) if the local solution fails its feasibility check, so an
// infeasible agent output can never corrupt the global state.
inline Solution integrate(const Solution& local_new, const SubProblem& sub,
                          const Solution& global) {
    const auto rep = check_local_feasible(sub, local_new);
    if (!rep.feasible) {
        std::string what = "integration refused:";
        for (const auto& v : rep.violations) what += " [" + v.detail + "]";
        throw IntegrationError(what, rep);
    }
    const Metadata& m = *sub.source_meta;
    Solution out;
    out.problem = m.problem;

    if (m.problem == Problem::tsp) {
        const auto& tour = local_new.routes.at(0);
        const auto paths = detail::path_pair_index(sub);
        // Start at a position that does not cut a path traversal in half.
        size_t begin = 0;
        for (size_t i = 0; i < tour.size(); ++i) {
            const int prev = tour[(i + tour.size() - 1) % tour.size()];
            if (!paths.count(std::minmax(prev, tour[i]))) {
                begin = i;
                break;
            }
        }
        std::vector<int> expanded;
        detail::expand_walk(sub, tour, begin, tour.size(), true, paths, expanded);
        // Restore the original anchor as the first node.
        const int anchor = global.routes.at(0).at(0);
        const auto at = std::find(expanded.begin(), expanded.end(), anchor);
        std::rotate(expanded.begin(), at, expanded.end());
        out.routes.push_back(std::move(expanded));
    } else if (m.problem == Problem::cvrp) {
        const auto paths = detail::path_pair_index(sub);
        for (const auto& route : local_new.routes) {
            std::vector<int> expanded = {m.depot};
            if (route.size() >= 2)
                detail::expand_walk(sub, route, 1, route.size() - 2, false, paths, expanded);
            expanded.push_back(m.depot);
            out.routes.push_back(std::move(expanded));
        }
    } else {
        // Order-preserving splice: statics keep their original positions,
        // surviving actives keep theirs, arrivals append in local order.
        std::set<int> bulky_locals;
        std::vector<std::set<int>> static_of_group(global.groups.size());
        for (const auto& con : sub.constraints) {
            if (con.kind != Constraint::Kind::bulky_item) continue;
            bulky_locals.insert(con.bulky.local_item);
            static_of_group[static_cast<size_t>(con.bulky.group)]
                .insert(con.bulky.items_global.begin(), con.bulky.items_global.end());
        }
        const size_t total_groups = std::max(global.groups.size(), local_new.groups.size());
        out.groups.resize(total_groups);
        for (size_t g = 0; g < total_groups; ++g) {
            std::set<int> local_members;
            if (g < local_new.groups.size())
                local_members.insert(local_new.groups[g].begin(), local_new.groups[g].end());
            std::set<int> originally_here;
            if (g < global.groups.size()) {
                for (int item : global.groups[g]) {
                    originally_here.insert(item);
                    if (static_of_group[g].count(item)) {
                        out.groups[g].push_back(item);  // static: always stays
                    } else if (local_members.count(sub.local_of(item))) {
                        out.groups[g].push_back(item);  // active survivor
                    }
                }
            }
            if (g < local_new.groups.size()) {
                for (int lid : local_new.groups[g]) {
                    if (bulky_locals.count(lid)) continue;
                    const int gid = sub.global_of(lid);
                    if (!originally_here.count(gid)) out.groups[g].push_back(gid);
                }
            }
        }
        if (m.problem == Problem::mkp) {
            out.unassigned = sub.static_unassigned_global;
            for (int lid : local_new.unassigned)
                if (!bulky_locals.count(lid)) out.unassigned.push_back(sub.global_of(lid));
            std::sort(out.unassigned.begin(), out.unassigned.end());
        }
    }

    const auto global_rep = check_feasible(m, out);
    if (!global_rep.feasible) {
        std::string what = "integration produced an infeasible global solution:";
        for (const auto& v : global_rep.violations) what += " [" + v.detail + "]";
        throw IntegrationError(what, global_rep);
    }
    return out;
}

}  // namespace carve

#endif  // CARVE_SUBPROBLEM_HPP_
