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

#ifndef CARVE_HEURISTICS_HPP_
#define CARVE_HEURISTICS_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "carve/error.hpp"
#include "carve/instance.hpp"
#include "carve/rng.hpp"
#include "carve/solution.hpp"

namespace carve {

// Cheapest-position insertion of nodes drawn in random order. Deterministic
// given the seed; ties go to the earliest insertion position.
inline Solution random_insertion_tsp(const Metadata& m, SeededRng& rng) {
    if (m.problem != Problem::tsp) throw UsageError("random_insertion_tsp needs a tsp instance");
    std::vector<int> order(static_cast<size_t>(m.num));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::vector<int> tour;
    tour.reserve(order.size());
    tour.push_back(order[0]);
    for (size_t k = 1; k < order.size(); ++k) {
        const int node = order[k];
        size_t best_pos = 0;
        int64_t best_cost = std::numeric_limits<int64_t>::max();
        for (size_t i = 0; i < tour.size(); ++i) {
            const int a = tour[i];
            const int b = tour[(i + 1) % tour.size()];
            const int64_t delta = distance(m, a, node) + distance(m, node, b) -
                                  (tour.size() > 1 ? distance(m, a, b) : 0);
            if (delta < best_cost) {
                best_cost = delta;
                best_pos = i + 1;
            }
        }
        tour.insert(tour.begin() + static_cast<long>(best_pos), node);
    }
    Solution s;
    s.problem = Problem::tsp;
    s.routes.push_back(std::move(tour));
    return s;
}

// Greedy nearest neighbor: extend the current route to the closest unvisited
// customer that still fits the residual capacity; open a new route when none
// fits. Ties break toward the lowest node index.
inline Solution greedy_nn_cvrp(const Metadata& m, SeededRng& rng) {
    (void)rng;  // tie-breaking is deterministic
    if (m.problem != Problem::cvrp) throw UsageError("greedy_nn_cvrp needs a cvrp instance");
    for (int i = 0; i < m.num; ++i)
        if (i != m.depot && m.demand[static_cast<size_t>(i)] > m.capacity())
            throw InfeasibleInstanceError("demand of node " + std::to_string(i) +
                                          " exceeds vehicle capacity");

    std::vector<bool> visited(static_cast<size_t>(m.num), false);
    visited[static_cast<size_t>(m.depot)] = true;
    int remaining = m.num - 1;

    Solution s;
    s.problem = Problem::cvrp;
    while (remaining > 0) {
        std::vector<int> route = {m.depot};
        double residual = m.capacity();
        int current = m.depot;
        while (true) {
            int best = -1;
            int64_t best_dist = std::numeric_limits<int64_t>::max();
            for (int i = 0; i < m.num; ++i) {
                if (visited[static_cast<size_t>(i)]) continue;
                if (m.demand[static_cast<size_t>(i)] > residual) continue;
                const int64_t d = distance(m, current, i);
                if (d < best_dist) {
                    best_dist = d;
                    best = i;
                }
            }
            if (best < 0) break;
            visited[static_cast<size_t>(best)] = true;
            residual -= m.demand[static_cast<size_t>(best)];
            route.push_back(best);
            current = best;
            --remaining;
        }
        route.push_back(m.depot);
        s.routes.push_back(std::move(route));
    }
    return s;
}

namespace detail {

// bpp sorts by weight descending; mkp by value density descending (compared
// by cross-multiplication so zero weights order first). Ties break toward the
// lower item index.
inline std::vector<int> ffd_order(const Metadata& m) {
    std::vector<int> order(static_cast<size_t>(m.num));
    std::iota(order.begin(), order.end(), 0);
    if (m.problem == Problem::bpp) {
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return m.weights[static_cast<size_t>(a)] > m.weights[static_cast<size_t>(b)];
        });
    } else {
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            const double va = m.values[static_cast<size_t>(a)];
            const double wa = m.weights[static_cast<size_t>(a)];
            const double vb = m.values[static_cast<size_t>(b)];
            const double wb = m.weights[static_cast<size_t>(b)];
            return va * wb > vb * wa;  // va/wa > vb/wb
        });
    }
    return order;
}

}  // namespace detail

// First-fit decreasing. bpp opens new bins as needed; mkp works over the
// fixed knapsack list and leaves items that fit nowhere unassigned.
inline Solution ffd_pack(const Metadata& m) {
    if (m.problem != Problem::bpp && m.problem != Problem::mkp)
        throw UsageError("ffd_pack needs a bpp or mkp instance");
    Solution s;
    s.problem = m.problem;
    std::vector<double> residual;
    if (m.problem == Problem::mkp) {
        residual = m.capacities;
        s.groups.assign(residual.size(), {});
    }
    for (int item : detail::ffd_order(m)) {
        const double w = m.weights[static_cast<size_t>(item)];
        bool placed = false;
        for (size_t g = 0; g < residual.size(); ++g) {
            if (w <= residual[g]) {
                residual[g] -= w;
                s.groups[g].push_back(item);
                placed = true;
                break;
            }
        }
        if (!placed) {
            if (m.problem == Problem::bpp) {
                residual.push_back(m.capacity() - w);
                s.groups.push_back({item});
            } else {
                s.unassigned.push_back(item);
            }
        }
    }
    std::sort(s.unassigned.begin(), s.unassigned.end());
    return s;
}

// The fast initializer used at iteration zero, dispatched per problem type.
inline Solution bootstrap(const Metadata& m, SeededRng& rng) {
    switch (m.problem) {
        case Problem::tsp: return random_insertion_tsp(m, rng);
        case Problem::cvrp: return greedy_nn_cvrp(m, rng);
        case Problem::bpp:
        case Problem::mkp: return ffd_pack(m);
    }
    throw UsageError("bad problem type");
}

}  // namespace carve

#endif  // CARVE_HEURISTICS_HPP_
