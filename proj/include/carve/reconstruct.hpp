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

#ifndef CARVE_RECONSTRUCT_HPP_
#define CARVE_RECONSTRUCT_HPP_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carve/error.hpp"
#include "carve/gateway.hpp"
#include "carve/rng.hpp"
#include "carve/solution.hpp"
#include "carve/subproblem.hpp"

namespace carve {

enum class ReconstructStrategy { heuristic, exact, llm };

inline std::string to_string(ReconstructStrategy s) {
    switch (s) {
        case ReconstructStrategy::heuristic: return "heuristic";
        case ReconstructStrategy::exact: return "exact";
        case ReconstructStrategy::llm: return "llm";
    }
    return "?";
}

inline ReconstructStrategy reconstruct_strategy_from_string(const std::string& s) {
    if (s == "heuristic") return ReconstructStrategy::heuristic;
    if (s == "exact") return ReconstructStrategy::exact;
    if (s == "llm") return ReconstructStrategy::llm;
    throw ConfigError("unknown reconstructor strategy \"" + s + "\"");
}

// Revision rounds granted to the llm strategy before it gives up.
struct RevisionBudget {
    int rounds = 3;
};

// Active elements the exact solver will enumerate before declining.
inline constexpr int kDefaultExactThreshold = 10;

struct ReconstructionOutcome {
    std::optional<Solution> solution;
    std::vector<ExperienceRecord> experience;
    ReconstructStrategy strategy = ReconstructStrategy::heuristic;
    int rounds_used = 0;
};

// ---------------------------------------------------------------------------
// Routing arrangements are manipulated as sequences of rigid units: a free
// local node, or a fixed path condensed to two ports. Reversing a unit swaps
// its ports; internal cost and demand never change.
// ---------------------------------------------------------------------------

namespace detail {

struct Unit {
    int port_in = -1;
    int port_out = -1;
    int64_t internal_cost = 0;
    double demand = 0;  // port demands plus the path's internal demand
    bool is_path = false;

    void flip() { std::swap(port_in, port_out); }
};

// Parses a local arrangement into unit sequences (one per route; tsp yields
// one cyclic sequence). Fixed-path endpoint pairs must be adjacent, which
// holds for any solution that passed check_local_feasible.
inline std::vector<std::vector<Unit>> units_of(const SubProblem& sub, const Solution& local) {
    const Metadata& lm = sub.local_meta;
    const auto paths = path_pair_index(sub);
    auto demand_of = [&](int node) {
        return lm.problem == Problem::cvrp ? lm.demand[static_cast<size_t>(node)] : 0.0;
    };
    std::vector<std::vector<Unit>> out;
    auto walk = [&](const std::vector<int>& seq, size_t begin, size_t count, bool cyclic) {
        std::vector<Unit> units;
        const size_t n = seq.size();
        size_t consumed = 0;
        size_t i = begin;
        while (consumed < count) {
            const int u = seq[cyclic ? i % n : i];
            const bool has_next = consumed + 1 < count;
            const int v = has_next ? seq[cyclic ? (i + 1) % n : i + 1] : -1;
            const auto it = has_next ? paths.find(std::minmax(u, v)) : paths.end();
            Unit unit;
            if (it != paths.end()) {
                const auto& path = sub.constraints[it->second].path;
                unit.port_in = u;
                unit.port_out = v;
                unit.internal_cost = path.internal_cost;
                unit.demand = demand_of(u) + demand_of(v) + path.internal_demand;
                unit.is_path = true;
                i += 2;
                consumed += 2;
            } else {
                unit.port_in = unit.port_out = u;
                unit.demand = demand_of(u);
                ++i;
                ++consumed;
            }
            units.push_back(unit);
        }
        out.push_back(std::move(units));
    };
    if (lm.problem == Problem::tsp) {
        const auto& tour = local.routes.at(0);
        // Start clear of a path pair so it is collected as one unit.
        size_t begin = 0;
        for (size_t i = 0; i < tour.size(); ++i) {
            const int prev = tour[(i + tour.size() - 1) % tour.size()];
            if (!paths.count(std::minmax(prev, tour[i]))) {
                begin = i;
                break;
            }
        }
        walk(tour, begin, tour.size(), true);
    } else {
        for (const auto& route : local.routes) {
            if (route.size() < 2) continue;
            walk(route, 1, route.size() - 2, false);
        }
    }
    return out;
}

inline Solution units_to_solution(const SubProblem& sub,
                                  const std::vector<std::vector<Unit>>& unit_routes) {
    const Metadata& lm = sub.local_meta;
    Solution s;
    s.problem = lm.problem;
    if (lm.problem == Problem::tsp) {
        std::vector<int> tour;
        for (const auto& unit : unit_routes.at(0)) {
            tour.push_back(unit.port_in);
            if (unit.port_out != unit.port_in) tour.push_back(unit.port_out);
        }
        s.routes.push_back(std::move(tour));
    } else {
        for (const auto& units : unit_routes) {
            std::vector<int> route = {lm.depot};
            for (const auto& unit : units) {
                route.push_back(unit.port_in);
                if (unit.port_out != unit.port_in) route.push_back(unit.port_out);
            }
            route.push_back(lm.depot);
            s.routes.push_back(std::move(route));
        }
    }
    return s;
}

inline int64_t gap_cost(const Metadata& lm, const Unit& a, const Unit& b) {
    return distance(lm, a.port_out, b.port_in);
}

inline Unit depot_unit(const Metadata& lm) {
    Unit d;
    d.port_in = d.port_out = lm.depot;
    return d;
}

inline int64_t cycle_cost(const Metadata& lm, const std::vector<Unit>& units) {
    int64_t total = 0;
    for (const auto& u : units) total += u.internal_cost;
    const size_t n = units.size();
    if (n > 1)
        for (size_t i = 0; i < n; ++i) total += gap_cost(lm, units[i], units[(i + 1) % n]);
    return total;
}

inline int64_t route_cost(const Metadata& lm, const std::vector<Unit>& units) {
    if (units.empty()) return 0;
    const Unit depot = depot_unit(lm);
    int64_t total = gap_cost(lm, depot, units.front()) + gap_cost(lm, units.back(), depot);
    for (size_t i = 0; i + 1 < units.size(); ++i) total += gap_cost(lm, units[i], units[i + 1]);
    for (const auto& u : units) total += u.internal_cost;
    return total;
}

inline double route_demand(const std::vector<Unit>& units) {
    double total = 0;
    for (const auto& u : units) total += u.demand;
    return total;
}

// 2-opt: reverse units[i..j], flipping every unit inside. For cyclic tours
// the neighbours wrap; for depot-bounded routes they are virtual depot units.
// First-improvement with a deterministic scan, repeated to a fixed point.
inline bool two_opt(const Metadata& lm, std::vector<Unit>& units, bool cyclic) {
    const size_t n = units.size();
    if (n < (cyclic ? 3u : 2u)) return false;
    const Unit depot = depot_unit(lm);
    bool improved_any = false;
    bool improved = true;
    while (improved) {
        improved = false;
        for (size_t i = 0; i < n && !improved; ++i) {
            for (size_t j = i + 1; j < n && !improved; ++j) {
                if (cyclic && i == 0 && j == n - 1) continue;  // full reversal, no-op
                const Unit& prev = i > 0 ? units[i - 1] : (cyclic ? units[n - 1] : depot);
                const Unit& next = j < n - 1 ? units[j + 1] : (cyclic ? units[0] : depot);
                const int64_t old_cost =
                    gap_cost(lm, prev, units[i]) + gap_cost(lm, units[j], next);
                // Reversed, unit j leads with its old out-port and unit i
                // trails with its old in-port.
                const int64_t new_cost = distance(lm, prev.port_out, units[j].port_out) +
                                         distance(lm, units[i].port_in, next.port_in);
                if (new_cost < old_cost) {
                    std::reverse(units.begin() + static_cast<long>(i),
                                 units.begin() + static_cast<long>(j) + 1);
                    for (size_t k = i; k <= j; ++k) units[k].flip();
                    improved = true;
                    improved_any = true;
                }
            }
        }
    }
    return improved_any;
}

// Relocates one unit anywhere (any route, any slot, both orientations) when
// that lowers the summed cost. One improving move per call.
inline bool relocate_once(const Metadata& lm, std::vector<std::vector<Unit>>& routes,
                          bool cyclic) {
    auto cost_of = [&](const std::vector<std::vector<Unit>>& rs) {
        int64_t total = 0;
        for (const auto& r : rs) total += cyclic ? cycle_cost(lm, r) : route_cost(lm, r);
        return total;
    };
    const int64_t before = cost_of(routes);
    const bool capacitated = lm.problem == Problem::cvrp;
    for (size_t r = 0; r < routes.size(); ++r) {
        for (size_t i = 0; i < routes[r].size(); ++i) {
            const Unit unit = routes[r][i];
            auto base = routes;
            base[r].erase(base[r].begin() + static_cast<long>(i));
            const size_t target_routes = base.size() + (capacitated ? 1 : 0);
            for (size_t r2 = 0; r2 < target_routes; ++r2) {
                const bool fresh_route = r2 == base.size();
                if (capacitated) {
                    const double load =
                        unit.demand + (fresh_route ? 0.0 : route_demand(base[r2]));
                    if (load > lm.capacity()) continue;
                }
                const size_t slots = fresh_route ? 1 : base[r2].size() + 1;
                for (size_t pos = 0; pos < slots; ++pos) {
                    for (int orient = 0; orient < 2; ++orient) {
                        Unit placed = unit;
                        if (orient == 1) {
                            if (!placed.is_path) break;
                            placed.flip();
                        }
                        auto candidate = base;
                        if (fresh_route) candidate.emplace_back();
                        candidate[r2].insert(candidate[r2].begin() + static_cast<long>(pos),
                                             placed);
                        candidate.erase(
                            std::remove_if(candidate.begin(), candidate.end(),
                                           [](const std::vector<Unit>& u) { return u.empty(); }),
                            candidate.end());
                        if (cost_of(candidate) < before) {
                            routes = std::move(candidate);
                            return true;
                        }
                    }
                }
            }
        }
    }
    return false;
}

inline Solution heuristic_routing(const SubProblem& sub, const Solution& start) {
    const Metadata& lm = sub.local_meta;
    auto routes = units_of(sub, start);
    const bool cyclic = lm.problem == Problem::tsp;
    bool improved = true;
    while (improved) {
        improved = false;
        for (auto& r : routes)
            if (two_opt(lm, r, cyclic)) improved = true;
        while (relocate_once(lm, routes, cyclic)) improved = true;
    }
    return units_to_solution(sub, routes);
}

// Best-fit reinsertion of the active items; bulky pseudo-items stay pinned.
// Falls back to the input if reinsertion came out worse.
inline Solution heuristic_packing(const SubProblem& sub, const Solution& start) {
    const Metadata& lm = sub.local_meta;
    const bool mkp = lm.problem == Problem::mkp;
    Solution candidate;
    candidate.problem = lm.problem;

    std::vector<double> residual;
    if (mkp) {
        residual = lm.capacities;
    } else {
        residual.assign(start.groups.size(), lm.capacity());
    }
    candidate.groups.assign(residual.size(), {});
    for (const auto& con : sub.constraints) {
        if (con.kind != Constraint::Kind::bulky_item) continue;
        const size_t g = static_cast<size_t>(con.bulky.group);
        candidate.groups[g].push_back(con.bulky.local_item);
        residual[g] -= con.bulky.weight;
    }
    std::vector<int> order = sub.active_locals;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double wa = lm.weights[static_cast<size_t>(a)];
        const double wb = lm.weights[static_cast<size_t>(b)];
        if (!mkp) return wa > wb;
        const double va = lm.values[static_cast<size_t>(a)];
        const double vb = lm.values[static_cast<size_t>(b)];
        return va * wb > vb * wa;  // density descending
    });
    for (int item : order) {
        const double w = lm.weights[static_cast<size_t>(item)];
        int best_group = -1;
        double best_residual = std::numeric_limits<double>::max();
        for (size_t g = 0; g < residual.size(); ++g) {
            if (w > residual[g]) continue;
            if (residual[g] < best_residual) {
                best_residual = residual[g];
                best_group = static_cast<int>(g);
            }
        }
        if (best_group >= 0) {
            candidate.groups[static_cast<size_t>(best_group)].push_back(item);
            residual[static_cast<size_t>(best_group)] -= w;
        } else if (mkp) {
            candidate.unassigned.push_back(item);
        } else {
            candidate.groups.push_back({item});
            residual.push_back(lm.capacity() - w);
        }
    }
    std::sort(candidate.unassigned.begin(), candidate.unassigned.end());
    return local_objective(sub, candidate) <= local_objective(sub, start) ? candidate : start;
}

// ---------------------------------------------------------------------------
// Exact enumeration: branch and bound over unit arrangements with partial
// cost pruning. cvrp also branches on route splits (capacity-pruned) with
// canonical route starts. Deterministic; strict improvement only.
// ---------------------------------------------------------------------------

struct ExactState {
    const Metadata* lm = nullptr;
    std::vector<Unit> units;
    std::vector<bool> used;
    int64_t best_cost = std::numeric_limits<int64_t>::max();
    std::vector<std::vector<Unit>> best_routes;
};

inline void exact_tsp_dfs(ExactState& st, std::vector<Unit>& current, int64_t cost_so_far) {
    const size_t n = st.units.size();
    if (current.size() == n) {
        const int64_t total = cost_so_far + (n > 1 ? gap_cost(*st.lm, current.back(),
                                                              current.front())
                                                   : 0);
        if (total < st.best_cost) {
            st.best_cost = total;
            st.best_routes = {current};
        }
        return;
    }
    for (size_t k = 0; k < n; ++k) {
        if (st.used[k]) continue;
        for (int orient = 0; orient < 2; ++orient) {
            Unit next = st.units[k];
            if (orient == 1) {
                if (!next.is_path) break;
                next.flip();
            }
            const int64_t step =
                next.internal_cost + gap_cost(*st.lm, current.back(), next);
            if (cost_so_far + step >= st.best_cost) continue;
            st.used[k] = true;
            current.push_back(next);
            exact_tsp_dfs(st, current, cost_so_far + step);
            current.pop_back();
            st.used[k] = false;
        }
    }
}

inline void exact_cvrp_dfs(ExactState& st, std::vector<std::vector<Unit>>& routes,
                           size_t placed, double route_load, int64_t cost_so_far) {
    const size_t n = st.units.size();
    const Unit depot = depot_unit(*st.lm);
    if (placed == n) {
        int64_t total = cost_so_far;
        if (!routes.back().empty()) total += gap_cost(*st.lm, routes.back().back(), depot);
        if (total < st.best_cost) {
            st.best_cost = total;
            st.best_routes = routes;
            while (!st.best_routes.empty() && st.best_routes.back().empty())
                st.best_routes.pop_back();
        }
        return;
    }
    const bool route_open = !routes.back().empty();
    if (route_open) {
        for (size_t k = 0; k < n; ++k) {
            if (st.used[k]) continue;
            if (route_load + st.units[k].demand > st.lm->capacity()) continue;
            for (int orient = 0; orient < 2; ++orient) {
                Unit next = st.units[k];
                if (orient == 1) {
                    if (!next.is_path) break;
                    next.flip();
                }
                const int64_t step =
                    next.internal_cost + gap_cost(*st.lm, routes.back().back(), next);
                if (cost_so_far + step >= st.best_cost) continue;
                st.used[k] = true;
                routes.back().push_back(next);
                exact_cvrp_dfs(st, routes, placed + 1, route_load + next.demand,
                               cost_so_far + step);
                routes.back().pop_back();
                st.used[k] = false;
            }
        }
        const int64_t close_step = gap_cost(*st.lm, routes.back().back(), depot);
        if (cost_so_far + close_step < st.best_cost) {
            routes.emplace_back();
            exact_cvrp_dfs(st, routes, placed, 0, cost_so_far + close_step);
            routes.pop_back();
        }
    } else {
        // Fresh route: any unused unit may open it. Route orderings are
        // enumerated redundantly, which is wasteful but sound; a route's
        // cheapest representation need not start with its lowest unit, so
        // no start canonicalization applies.
        for (size_t k = 0; k < n; ++k) {
            if (st.used[k]) continue;
            if (st.units[k].demand > st.lm->capacity()) continue;
            for (int orient = 0; orient < 2; ++orient) {
                Unit next = st.units[k];
                if (orient == 1) {
                    if (!next.is_path) break;
                    next.flip();
                }
                const int64_t step = next.internal_cost + gap_cost(*st.lm, depot, next);
                if (cost_so_far + step >= st.best_cost) continue;
                st.used[k] = true;
                routes.back().push_back(next);
                exact_cvrp_dfs(st, routes, placed + 1, next.demand, cost_so_far + step);
                routes.back().pop_back();
                st.used[k] = false;
            }
        }
    }
}

inline Solution exact_routing(const SubProblem& sub) {
    const Metadata& lm = sub.local_meta;
    ExactState st;
    st.lm = &lm;
    for (const auto& r : units_of(sub, sub.local_solution))
        st.units.insert(st.units.end(), r.begin(), r.end());
    st.used.assign(st.units.size(), false);

    if (lm.problem == Problem::tsp) {
        // Fix the first unit's position and orientation; cycles are rotation
        // invariant and reflection is covered by flipping the other units.
        std::vector<Unit> current = {st.units.at(0)};
        st.used[0] = true;
        exact_tsp_dfs(st, current, st.units[0].internal_cost);
    } else {
        std::vector<std::vector<Unit>> routes(1);
        exact_cvrp_dfs(st, routes, 0, 0, 0);
    }
    return units_to_solution(sub, st.best_routes);
}

// Exhaustive packing: DFS over the active items with value-bound (mkp) or
// bin-count (bpp) pruning. Bulky items never move.
inline Solution exact_packing(const SubProblem& sub) {
    const Metadata& lm = sub.local_meta;
    const bool mkp = lm.problem == Problem::mkp;
    const auto& actives = sub.active_locals;

    Solution current;
    current.problem = lm.problem;
    std::vector<double> residual;
    if (mkp) {
        residual = lm.capacities;
    } else {
        residual.assign(sub.local_solution.groups.size(), lm.capacity());
    }
    current.groups.assign(residual.size(), {});
    for (const auto& con : sub.constraints) {
        if (con.kind != Constraint::Kind::bulky_item) continue;
        current.groups[static_cast<size_t>(con.bulky.group)].push_back(con.bulky.local_item);
        residual[static_cast<size_t>(con.bulky.group)] -= con.bulky.weight;
    }

    // Suffix value sums bound how much assigned value can still grow (mkp;
    // bulky value is a shared constant and cancels out of comparisons).
    std::vector<double> value_suffix(actives.size() + 1, 0);
    if (mkp)
        for (size_t i = actives.size(); i > 0; --i)
            value_suffix[i - 1] =
                value_suffix[i] + lm.values[static_cast<size_t>(actives[i - 1])];

    auto bins_used = [&current]() {
        int bins = 0;
        for (const auto& g : current.groups)
            if (!g.empty()) ++bins;
        return bins;
    };

    bool found = false;
    double best_obj = std::numeric_limits<double>::max();
    Solution best_solution;

    std::function<void(size_t, double)> dfs = [&](size_t idx, double assigned_value) {
        if (found) {
            if (mkp) {
                if (-(assigned_value + value_suffix[idx]) >= best_obj) return;
            } else {
                if (static_cast<double>(bins_used()) >= best_obj) return;
            }
        }
        if (idx == actives.size()) {
            const double obj = mkp ? -assigned_value : bins_used();
            if (!found || obj < best_obj) {
                best_obj = obj;
                best_solution = current;
                found = true;
            }
            return;
        }
        const int item = actives[idx];
        const double w = lm.weights[static_cast<size_t>(item)];
        const double v = mkp ? lm.values[static_cast<size_t>(item)] : 0;
        bool tried_empty = false;  // empty bins are interchangeable
        for (size_t g = 0; g < current.groups.size(); ++g) {
            if (w > residual[g]) continue;
            if (!mkp && current.groups[g].empty()) {
                if (tried_empty) continue;
                tried_empty = true;
            }
            current.groups[g].push_back(item);
            residual[g] -= w;
            dfs(idx + 1, assigned_value + v);
            residual[g] += w;
            current.groups[g].pop_back();
        }
        if (mkp) {
            current.unassigned.push_back(item);
            dfs(idx + 1, assigned_value);
            current.unassigned.pop_back();
        } else if (!tried_empty) {
            current.groups.push_back({item});
            residual.push_back(lm.capacity() - w);
            dfs(idx + 1, assigned_value);
            residual.pop_back();
            current.groups.pop_back();
        }
    };
    dfs(0, 0);
    std::sort(best_solution.unassigned.begin(), best_solution.unassigned.end());
    return best_solution;
}

}  // namespace detail

// Solves the compressed subproblem under its constraints.
//   heuristic : 2-opt + relocate over rigid units (routing) or best-fit
//               reinsertion (packing); never worse than its input.
//   exact     : exhaustive branch and bound, provably optimal; declines with
//               a CapabilityError above `exact_threshold` active elements.
//   llm       : prompt, parse, feasibility-check; re-prompts with the
//               accumulated infeasible attempts up to budget.rounds times.
inline ReconstructionOutcome reconstruct(ReconstructStrategy strategy, const SubProblem& sub,
                                         SeededRng& rng, const AgentContext* agent = nullptr,
                                         RevisionBudget budget = {},
                                         int exact_threshold = kDefaultExactThreshold) {
    (void)rng;  // heuristic and exact are deterministic
    ReconstructionOutcome outcome;
    outcome.strategy = strategy;
    switch (strategy) {
        case ReconstructStrategy::heuristic: {
            outcome.solution = is_routing(sub.local_meta.problem)
                                   ? detail::heuristic_routing(sub, sub.local_solution)
                                   : detail::heuristic_packing(sub, sub.local_solution);
            return outcome;
        }
        case ReconstructStrategy::exact: {
            if (sub.active_count() > exact_threshold)
                throw CapabilityError("exact reconstruction declines " +
                                      std::to_string(sub.active_count()) +
                                      " active elements (threshold " +
                                      std::to_string(exact_threshold) + ")");
            outcome.solution = is_routing(sub.local_meta.problem)
                                   ? detail::exact_routing(sub)
                                   : detail::exact_packing(sub);
            return outcome;
        }
        case ReconstructStrategy::llm: {
            if (!agent) throw UsageError("llm reconstruction needs an agent handle");
            for (int round = 1; round <= budget.rounds; ++round) {
                outcome.rounds_used = round;
                std::string reply;
                try {
                    reply =
                        agent->complete(build_reconstructor_prompt(sub, outcome.experience));
                } catch (const TransportError&) {
                    return outcome;  // no solution; the experience trail survives
                }
                ExperienceRecord rec;
                rec.attempt = reply;
                rec.round = round;
                const ParsedSolution parsed =
                    parse_solution(reply, sub.local_meta.problem, sub.local_meta.num);
                if (!parsed.ok()) {
                    rec.violations = {parsed.error};
                    outcome.experience.push_back(std::move(rec));
                    continue;
                }
                rec.parsed = parsed.solution;
                const FeasibilityReport rep = check_local_feasible(sub, *parsed.solution);
                if (rep.feasible) {
                    rec.feasible = true;
                    outcome.experience.push_back(std::move(rec));
                    outcome.solution = parsed.solution;
                    return outcome;
                }
                for (const auto& v : rep.violations) rec.violations.push_back(v.detail);
                outcome.experience.push_back(std::move(rec));
            }
            return outcome;
        }
    }
    throw UsageError("bad reconstruction strategy");
}

}  // namespace carve

#endif  // CARVE_RECONSTRUCT_HPP_
