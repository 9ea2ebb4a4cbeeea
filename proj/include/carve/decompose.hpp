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

#ifndef CARVE_DECOMPOSE_HPP_
#define CARVE_DECOMPOSE_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "carve/error.hpp"
#include "carve/gateway.hpp"
#include "carve/instance.hpp"
#include "carve/rng.hpp"
#include "carve/selection.hpp"
#include "carve/solution.hpp"

namespace carve {

enum class DecomposeStrategy { random, heuristic, llm };

inline std::string to_string(DecomposeStrategy s) {
    switch (s) {
        case DecomposeStrategy::random: return "random";
        case DecomposeStrategy::heuristic: return "heuristic";
        case DecomposeStrategy::llm: return "llm";
    }
    return "?";
}

inline DecomposeStrategy decompose_strategy_from_string(const std::string& s) {
    if (s == "random") return DecomposeStrategy::random;
    if (s == "heuristic") return DecomposeStrategy::heuristic;
    if (s == "llm") return DecomposeStrategy::llm;
    throw ConfigError("unknown decomposer strategy \"" + s + "\"");
}

namespace detail {

inline std::vector<int> random_active(const Metadata& m, const Solution& s, int cap,
                                      SeededRng& rng) {
    return rng.sample(eligible_elements(m, s), static_cast<size_t>(cap));
}

// Routing: largest detour cost dist(prev,n) + dist(n,next) - dist(prev,next).
// bpp: items of the least-filled groups. mkp: lowest-density assigned items.
inline std::vector<int> heuristic_active(const Metadata& m, const Solution& s, int cap,
                                         SeededRng& rng) {
    std::vector<int> picked;
    if (is_routing(m.problem)) {
        std::vector<std::pair<int64_t, int>> scored;  // (-detour, node) for stable sort
        auto score_route = [&](const std::vector<int>& seq, bool cyclic, int skip) {
            const size_t n = seq.size();
            if (n < 2) return;
            const size_t first = cyclic ? 0 : 1;
            const size_t last = cyclic ? n : n - 1;
            for (size_t i = first; i < last; ++i) {
                const int node = seq[i];
                if (node == skip) continue;
                const int prev = seq[(i + n - 1) % n];
                const int next = seq[(i + 1) % n];
                const int64_t detour = distance(m, prev, node) + distance(m, node, next) -
                                       distance(m, prev, next);
                scored.emplace_back(-detour, node);
            }
        };
        if (m.problem == Problem::tsp) {
            score_route(s.routes.at(0), true, s.routes.at(0).at(0));
        } else {
            for (const auto& route : s.routes) score_route(route, false, m.depot);
        }
        std::sort(scored.begin(), scored.end());
        for (const auto& [neg, node] : scored) {
            (void)neg;
            if (static_cast<int>(picked.size()) >= cap) break;
            picked.push_back(node);
        }
    } else if (m.problem == Problem::bpp) {
        std::vector<std::pair<double, int>> by_fill;  // (load, group)
        for (size_t g = 0; g < s.groups.size(); ++g) {
            if (s.groups[g].empty()) continue;
            double load = 0;
            for (int item : s.groups[g]) load += m.weights[static_cast<size_t>(item)];
            by_fill.emplace_back(load, static_cast<int>(g));
        }
        std::sort(by_fill.begin(), by_fill.end());
        for (const auto& [load, g] : by_fill) {
            (void)load;
            std::vector<int> items = s.groups[static_cast<size_t>(g)];
            std::sort(items.begin(), items.end());
            for (int item : items) {
                if (static_cast<int>(picked.size()) >= cap) break;
                picked.push_back(item);
            }
            if (static_cast<int>(picked.size()) >= cap) break;
        }
    } else {
        std::vector<std::pair<double, int>> by_density;  // (value*denominator trick below)
        for (const auto& group : s.groups)
            for (int item : group) {
                const double w = m.weights[static_cast<size_t>(item)];
                const double v = m.values[static_cast<size_t>(item)];
                // density v/w ascending; zero weights sort last (infinite density)
                const double key = w > 0 ? v / w : std::numeric_limits<double>::infinity();
                by_density.emplace_back(key, item);
            }
        std::sort(by_density.begin(), by_density.end());
        for (const auto& [key, item] : by_density) {
            (void)key;
            if (static_cast<int>(picked.size()) >= cap) break;
            picked.push_back(item);
        }
    }
    if (picked.empty()) return random_active(m, s, cap, rng);
    return picked;
}

inline std::vector<int> clip_to_eligible(const std::vector<int>& reply,
                                         const std::vector<int>& eligible, int cap) {
    const std::set<int> ok(eligible.begin(), eligible.end());
    std::vector<int> out;
    for (int id : reply) {
        if (static_cast<int>(out.size()) >= cap) break;
        if (ok.count(id) && std::find(out.begin(), out.end(), id) == out.end())
            out.push_back(id);
    }
    return out;
}

}  // namespace detail

// Produces the active/static partition (a, s) for one iteration. The llm
// strategy asks the agent, filters its reply to eligible ids, re-prompts once
// on an entirely invalid reply, and finally falls back to random selection.
// Transport failures propagate for the orchestrator to decide.
inline ActiveSelection decompose(DecomposeStrategy strategy, const Metadata& m,
                                 const Solution& s, int cap, SeededRng& rng,
                                 const AgentContext* agent = nullptr) {
    if (cap < 1) throw ConfigError("active cap must be >= 1");
    std::vector<int> active;
    switch (strategy) {
        case DecomposeStrategy::random:
            active = detail::random_active(m, s, cap, rng);
            break;
        case DecomposeStrategy::heuristic:
            active = detail::heuristic_active(m, s, cap, rng);
            break;
        case DecomposeStrategy::llm: {
            if (!agent) throw UsageError("llm decomposition needs an agent handle");
            const auto eligible = eligible_elements(m, s);
            const PromptPair prompt = build_decomposer_prompt(m, s, cap);
            active = detail::clip_to_eligible(parse_active_reply(agent->complete(prompt)),
                                              eligible, cap);
            if (active.empty())
                active = detail::clip_to_eligible(parse_active_reply(agent->complete(prompt)),
                                                  eligible, cap);
            if (active.empty()) active = detail::random_active(m, s, cap, rng);
            break;
        }
    }
    if (active.empty()) throw DegenerateSubproblemError("no eligible elements to select");
    return compute_selection(m, s, active);
}

}  // namespace carve

#endif  // CARVE_DECOMPOSE_HPP_
