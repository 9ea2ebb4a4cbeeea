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

#ifndef CARVE_SELECTION_HPP_
#define CARVE_SELECTION_HPP_

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "carve/error.hpp"
#include "carve/instance.hpp"
#include "carve/solution.hpp"

namespace carve {

// Active/static partition of a solution.
//   routing : static_runs are the maximal contiguous runs of non-active nodes
//             in visit order (cyclic on the tsp tour), run_route[i] giving the
//             owning route. The depot / tour anchor is never active.
//   packing : static_runs[g] lists group g's non-active items; for mkp one
//             trailing list holds the non-active unassigned items.
struct ActiveSelection {
    std::vector<int> active;
    std::vector<std::vector<int>> static_runs;
    std::vector<int> run_route;
};

// Elements a decomposer may select, sorted ascending. The first node of the
// stored tsp tour acts as an anchor and is excluded so static runs always
// have stable endpoints.
inline std::vector<int> eligible_elements(const Metadata& m, const Solution& s) {
    std::vector<int> out;
    out.reserve(static_cast<size_t>(m.num));
    int banned = -1;
    if (m.problem == Problem::tsp) {
        if (s.routes.empty() || s.routes[0].empty())
            throw UsageError("tsp solution has no tour to decompose");
        banned = s.routes[0][0];
    } else if (m.problem == Problem::cvrp) {
        banned = m.depot;
    }
    for (int i = 0; i < m.num; ++i)
        if (i != banned) out.push_back(i);
    return out;
}

// Derives the static runs implied by an active set. `active` must be a
// deduplicated subset of eligible_elements(m, s).
inline ActiveSelection compute_selection(const Metadata& m, const Solution& s,
                                         std::vector<int> active) {
    if (active.empty()) throw UsageError("active set must not be empty");
    ActiveSelection sel;
    sel.active = std::move(active);
    const std::set<int> is_active(sel.active.begin(), sel.active.end());

    if (m.problem == Problem::tsp) {
        const auto& tour = s.routes.at(0);
        const size_t n = tour.size();
        // Start scanning right after an active position so a wrap-around run
        // is collected in one piece.
        size_t first_active = 0;
        for (size_t i = 0; i < n; ++i)
            if (is_active.count(tour[i])) {
                first_active = i;
                break;
            }
        std::vector<int> run;
        for (size_t k = 1; k <= n; ++k) {
            const int node = tour[(first_active + k) % n];
            if (is_active.count(node)) {
                if (!run.empty()) {
                    sel.static_runs.push_back(std::move(run));
                    sel.run_route.push_back(0);
                    run.clear();
                }
            } else {
                run.push_back(node);
            }
        }
        if (!run.empty()) {
            sel.static_runs.push_back(std::move(run));
            sel.run_route.push_back(0);
        }
    } else if (m.problem == Problem::cvrp) {
        for (size_t r = 0; r < s.routes.size(); ++r) {
            const auto& route = s.routes[r];
            std::vector<int> run;
            for (size_t i = 1; i + 1 < route.size(); ++i) {
                const int node = route[i];
                if (is_active.count(node)) {
                    if (!run.empty()) {
                        sel.static_runs.push_back(std::move(run));
                        sel.run_route.push_back(static_cast<int>(r));
                        run.clear();
                    }
                } else {
                    run.push_back(node);
                }
            }
            if (!run.empty()) {
                sel.static_runs.push_back(std::move(run));
                sel.run_route.push_back(static_cast<int>(r));
            }
        }
    } else {
        for (const auto& group : s.groups) {
            std::vector<int> statics;
            for (int item : group)
                if (!is_active.count(item)) statics.push_back(item);
            sel.static_runs.push_back(std::move(statics));
        }
        if (m.problem == Problem::mkp) {
            std::vector<int> statics;
            for (int item : s.unassigned)
                if (!is_active.count(item)) statics.push_back(item);
            sel.static_runs.push_back(std::move(statics));
        }
    }
    return sel;
}

// Extracts ids from the first <sub>...</sub> block of an agent reply.
// Non-integer tokens are dropped; duplicates keep their first occurrence.
// Returns an empty list when no block is present.
inline std::vector<int> parse_active_reply(const std::string& text) {
    std::vector<int> out;
    const auto open = text.find("<sub>");
    if (open == std::string::npos) return out;
    const auto close = text.find("</sub>", open);
    if (close == std::string::npos) return out;
    const std::string body = text.substr(open + 5, close - open - 5);
    std::set<int> seen;
    size_t at = 0;
    while (at <= body.size()) {
        auto comma = body.find(',', at);
        if (comma == std::string::npos) comma = body.size();
        const std::string tok = detail::trim(body.substr(at, comma - at));
        at = comma + 1;
        if (tok.empty()) continue;
        try {
            size_t pos = 0;
            const int id = std::stoi(tok, &pos);
            if (pos != tok.size()) continue;
            if (seen.insert(id).second) out.push_back(id);
        } catch (const std::exception&) {
            // prose or stray token; skip
        }
        if (comma == body.size()) break;
    }
    return out;
}

}  // namespace carve

#endif  // CARVE_SELECTION_HPP_
