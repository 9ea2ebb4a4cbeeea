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

#ifndef CARVE_SOLUTION_HPP_
#define CARVE_SOLUTION_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "carve/error.hpp"
#include "carve/instance.hpp"

namespace carve {

// Value-type solution.
//   tsp  : routes holds one tour visiting every node once (closure implied).
//   cvrp : each route starts and ends at the depot.
//   bpp  : groups[i] is the item list of bin i.
//   mkp  : groups[i] is knapsack i; unassigned holds the leftover items,
//          kept sorted ascending.
struct Solution {
    Problem problem = Problem::tsp;
    std::vector<std::vector<int>> routes;
    std::vector<std::vector<int>> groups;
    std::vector<int> unassigned;

    bool operator==(const Solution&) const = default;
};

enum class ViolationKind { missing, duplicate, capacity_exceeded, bad_endpoints, constraint_broken };

inline std::string to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::missing: return "missing";
        case ViolationKind::duplicate: return "duplicate";
        case ViolationKind::capacity_exceeded: return "capacity_exceeded";
        case ViolationKind::bad_endpoints: return "bad_endpoints";
        case ViolationKind::constraint_broken: return "constraint_broken";
    }
    return "?";
}

struct Violation {
    ViolationKind kind;
    std::string detail;
    std::vector<int> ids;
};

struct FeasibilityReport {
    bool feasible = true;
    std::vector<Violation> violations;

    void add(ViolationKind kind, std::string detail, std::vector<int> ids = {}) {
        feasible = false;
        violations.push_back({kind, std::move(detail), std::move(ids)});
    }
};

namespace detail {

inline std::string id_list(const std::vector<int>& ids) {
    std::ostringstream out;
    for (size_t i = 0; i < ids.size(); ++i) {
        if (i) out << ", ";
        out << ids[i];
    }
    return out.str();
}

inline std::string number_str(double v) {
    if (v == std::floor(v) && std::abs(v) < 9.0e15)
        return std::to_string(static_cast<int64_t>(v));
    std::ostringstream out;
    out << v;
    return out.str();
}

}  // namespace detail

// Internal objective; every problem minimizes. mkp is the negated total value
// of assigned items, so reports negate it back via reported_objective.
inline double objective(const Metadata& m, const Solution& s) {
    if (s.problem != m.problem)
        throw UsageError("solution problem type does not match instance");
    auto guard = [&](int id) {
        if (id < 0 || id >= m.num)
            throw UsageError("solution references element " + std::to_string(id) +
                             " outside 0.." + std::to_string(m.num - 1));
        return id;
    };
    switch (m.problem) {
        case Problem::tsp: {
            if (s.routes.size() != 1) throw UsageError("tsp solution needs exactly one tour");
            const auto& tour = s.routes[0];
            int64_t total = 0;
            for (size_t i = 0; i + 1 < tour.size(); ++i)
                total += distance(m, guard(tour[i]), guard(tour[i + 1]));
            if (tour.size() > 1) total += distance(m, guard(tour.back()), guard(tour.front()));
            return static_cast<double>(total);
        }
        case Problem::cvrp: {
            int64_t total = 0;
            for (const auto& route : s.routes)
                for (size_t i = 0; i + 1 < route.size(); ++i)
                    total += distance(m, guard(route[i]), guard(route[i + 1]));
            return static_cast<double>(total);
        }
        case Problem::bpp: {
            int bins = 0;
            for (const auto& g : s.groups)
                if (!g.empty()) ++bins;
            return bins;
        }
        case Problem::mkp: {
            double value = 0;
            for (const auto& g : s.groups)
                for (int item : g) value += m.values[static_cast<size_t>(guard(item))];
            return -value;
        }
    }
    throw UsageError("bad problem type");
}

// Objective in natural sign for reporting (maximization problems negated back).
inline double reported_objective(Problem p, double internal) {
    return p == Problem::mkp ? -internal : internal;
}

namespace detail {

// Coverage scan shared by the problem checkers: every id in 0..num-1 must
// appear exactly `expected` times (expected = 0 means "at most once").
struct CoverageCounter {
    std::vector<int> count;
    explicit CoverageCounter(int num) : count(static_cast<size_t>(num), 0) {}
    bool note(int id) {
        if (id < 0 || id >= static_cast<int>(count.size())) return false;
        ++count[static_cast<size_t>(id)];
        return true;
    }
};

inline void report_coverage(const CoverageCounter& c, bool routing, bool allow_unvisited,
                            const std::vector<int>& skip, FeasibilityReport& rep) {
    std::vector<int> missing, duplicated;
    for (int id = 0; id < static_cast<int>(c.count.size()); ++id) {
        if (std::find(skip.begin(), skip.end(), id) != skip.end()) continue;
        const int n = c.count[static_cast<size_t>(id)];
        if (n == 0 && !allow_unvisited) missing.push_back(id);
        if (n > 1) duplicated.push_back(id);
    }
    const char* noun = routing ? "visit node(s)" : "item(s)";
    if (!missing.empty())
        rep.add(ViolationKind::missing,
                std::string("Missing ") + noun + ": " + id_list(missing), missing);
    if (!duplicated.empty())
        rep.add(ViolationKind::duplicate,
                std::string("Duplicate ") + noun + ": " + id_list(duplicated), duplicated);
}

}  // namespace detail

// Checks the inherent constraints of the problem type and reports every
// violation found; nothing is thrown. Detail strings are written to be fed
// back to an agent verbatim. `links` pairs are only enforced when
// `enforce_links` is set.
inline FeasibilityReport check_feasible(const Metadata& m, const Solution& s,
                                        bool enforce_links = false) {
    FeasibilityReport rep;
    if (s.problem != m.problem) {
        rep.add(ViolationKind::constraint_broken, "Solution problem type mismatch");
        return rep;
    }
    std::vector<int> out_of_range;
    auto note_all = [&](detail::CoverageCounter& c, const std::vector<int>& ids) {
        for (int id : ids)
            if (!c.note(id)) out_of_range.push_back(id);
    };
    switch (m.problem) {
        case Problem::tsp: {
            detail::CoverageCounter cover(m.num);
            if (s.routes.size() != 1) {
                rep.add(ViolationKind::bad_endpoints, "Expected exactly one tour, got " +
                                                          std::to_string(s.routes.size()));
            }
            for (const auto& tour : s.routes) note_all(cover, tour);
            detail::report_coverage(cover, true, false, {}, rep);
            if (enforce_links && s.routes.size() == 1) {
                const auto& tour = s.routes[0];
                for (auto [a, b] : m.links) {
                    bool adjacent = false;
                    for (size_t i = 0; i < tour.size(); ++i) {
                        const int u = tour[i], v = tour[(i + 1) % tour.size()];
                        if ((u == a && v == b) || (u == b && v == a)) adjacent = true;
                    }
                    if (!adjacent)
                        rep.add(ViolationKind::constraint_broken,
                                "Required link (" + std::to_string(a) + "," +
                                    std::to_string(b) + ") not present in the tour",
                                {a, b});
                }
            }
            break;
        }
        case Problem::cvrp: {
            detail::CoverageCounter cover(m.num);
            for (size_t r = 0; r < s.routes.size(); ++r) {
                const auto& route = s.routes[r];
                if (route.size() < 2 || route.front() != m.depot || route.back() != m.depot) {
                    rep.add(ViolationKind::bad_endpoints,
                            "Route " + std::to_string(r) + " must start and end at depot " +
                                std::to_string(m.depot),
                            {static_cast<int>(r)});
                }
                double load = 0;
                std::vector<int> interior(route.begin() + (route.empty() ? 0 : 1),
                                          route.end() - (route.size() < 2 ? 0 : 1));
                for (int id : interior) {
                    if (id == m.depot) {
                        rep.add(ViolationKind::duplicate,
                                "Depot " + std::to_string(m.depot) + " revisited inside route " +
                                    std::to_string(r),
                                {id});
                        continue;
                    }
                    if (!cover.note(id)) {
                        out_of_range.push_back(id);
                        continue;
                    }
                    load += m.demand[static_cast<size_t>(id)];
                }
                if (load > m.capacity())
                    rep.add(ViolationKind::capacity_exceeded,
                            "Route " + std::to_string(r) + " exceeds vehicle capacity: load " +
                                detail::number_str(load) + " > " +
                                detail::number_str(m.capacity()),
                            {static_cast<int>(r)});
            }
            detail::report_coverage(cover, true, false, {m.depot}, rep);
            break;
        }
        case Problem::bpp:
        case Problem::mkp: {
            detail::CoverageCounter cover(m.num);
            const bool mkp = m.problem == Problem::mkp;
            if (mkp && static_cast<int>(s.groups.size()) > m.knapsack_count())
                rep.add(ViolationKind::constraint_broken,
                        "Solution uses " + std::to_string(s.groups.size()) +
                            " knapsacks but only " + std::to_string(m.knapsack_count()) +
                            " exist");
            for (size_t g = 0; g < s.groups.size(); ++g) {
                double load = 0;
                for (int id : s.groups[g]) {
                    if (!cover.note(id)) {
                        out_of_range.push_back(id);
                        continue;
                    }
                    load += m.weights[static_cast<size_t>(id)];
                }
                const double cap = mkp ? (static_cast<int>(g) < m.knapsack_count()
                                              ? m.capacities[g]
                                              : 0.0)
                                       : m.capacity();
                if (load > cap)
                    rep.add(ViolationKind::capacity_exceeded,
                            std::string(mkp ? "Knapsack " : "Bin ") + std::to_string(g) +
                                " exceeds capacity: load " + detail::number_str(load) + " > " +
                                detail::number_str(cap),
                            {static_cast<int>(g)});
            }
            if (mkp) note_all(cover, s.unassigned);
            detail::report_coverage(cover, false, false, {}, rep);
            break;
        }
    }
    if (!out_of_range.empty())
        rep.add(ViolationKind::constraint_broken,
                "Element id(s) out of range: " + detail::id_list(out_of_range), out_of_range);
    return rep;
}

// ---------------------------------------------------------------------------
// XML-ish wire format: <sol> wrapping <route>, <bin_i> or <knapsack_i> tags
// with comma-separated ids. The scanner is lenient about prose around the
// tags (agent replies embed the block in text) but strict inside them.
// ---------------------------------------------------------------------------

inline std::string serialize_solution(const Solution& s) {
    std::ostringstream out;
    out << "<sol>\n";
    auto emit_ids = [&](const std::vector<int>& ids) {
        for (size_t i = 0; i < ids.size(); ++i) {
            if (i) out << ",";
            out << ids[i];
        }
    };
    switch (s.problem) {
        case Problem::tsp:
            for (const auto& tour : s.routes) {
                out << "<route>";
                emit_ids(tour);
                if (tour.size() > 1) out << "," << tour.front();  // explicit closure
                out << "</route>\n";
            }
            break;
        case Problem::cvrp:
            for (const auto& route : s.routes) {
                out << "<route>";
                emit_ids(route);
                out << "</route>\n";
            }
            break;
        case Problem::bpp:
        case Problem::mkp: {
            const char* tag = s.problem == Problem::bpp ? "bin" : "knapsack";
            for (size_t g = 0; g < s.groups.size(); ++g) {
                out << "<" << tag << "_" << g << ">";
                emit_ids(s.groups[g]);
                out << "</" << tag << "_" << g << ">\n";
            }
            break;
        }
    }
    out << "</sol>";
    return out.str();
}

// Outcome of scanning agent text for a solution block. A failed parse is data,
// not an exception, so replies can be scored and fed back as experience.
struct ParsedSolution {
    std::optional<Solution> solution;
    std::string error;

    bool ok() const { return solution.has_value(); }
};

namespace detail {

inline bool parse_id_list(const std::string& body, std::vector<int>& out, std::string& error) {
    const std::string t = trim(body);
    if (t.empty()) return true;
    std::istringstream in(t);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        const std::string v = trim(tok);
        try {
            size_t pos = 0;
            const int id = std::stoi(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            out.push_back(id);
        } catch (const std::exception&) {
            error = "non-integer id \"" + v + "\" in solution block";
            return false;
        }
    }
    return true;
}

}  // namespace detail

// `num_elements` is the instance's element count; it bounds parsed ids and,
// for mkp, determines the unassigned complement.
inline ParsedSolution parse_solution(const std::string& text, Problem problem,
                                     int num_elements) {
    ParsedSolution result;
    const auto open = text.find("<sol>");
    if (open == std::string::npos) {
        result.error = "no <sol> block found";
        return result;
    }
    const auto close = text.find("</sol>", open);
    if (close == std::string::npos) {
        result.error = "<sol> block is not closed";
        return result;
    }
    const std::string body = text.substr(open + 5, close - open - 5);

    Solution s;
    s.problem = problem;
    const std::string tag = is_routing(problem) ? "route"
                            : problem == Problem::bpp ? "bin"
                                                      : "knapsack";
    size_t at = 0;
    while (true) {
        const auto tag_open = body.find("<" + tag, at);
        if (tag_open == std::string::npos) break;
        size_t content_begin;
        int group_index = -1;
        if (is_routing(problem)) {
            if (body.compare(tag_open, tag.size() + 2, "<" + tag + ">") != 0) {
                result.error = "malformed <" + tag + "> tag";
                return result;
            }
            content_begin = tag_open + tag.size() + 2;
        } else {
            const auto idx_begin = tag_open + tag.size() + 2;  // past "<tag_"
            if (tag_open + tag.size() + 1 >= body.size() ||
                body[tag_open + tag.size() + 1] != '_') {
                result.error = "malformed <" + tag + "_i> tag";
                return result;
            }
            const auto idx_end = body.find('>', idx_begin);
            if (idx_end == std::string::npos) {
                result.error = "malformed <" + tag + "_i> tag";
                return result;
            }
            const std::string idx = body.substr(idx_begin, idx_end - idx_begin);
            try {
                size_t pos = 0;
                group_index = std::stoi(idx, &pos);
                if (pos != idx.size() || group_index < 0) throw std::invalid_argument(idx);
            } catch (const std::exception&) {
                result.error = "bad group index \"" + idx + "\"";
                return result;
            }
            content_begin = idx_end + 1;
        }
        const std::string close_tag =
            is_routing(problem) ? "</" + tag + ">"
                                : "</" + tag + "_" + std::to_string(group_index) + ">";
        const auto content_end = body.find(close_tag, content_begin);
        if (content_end == std::string::npos) {
            result.error = "unclosed " + close_tag.substr(2, close_tag.size() - 3) + " tag";
            return result;
        }
        std::vector<int> ids;
        if (!detail::parse_id_list(body.substr(content_begin, content_end - content_begin),
                                   ids, result.error))
            return result;
        for (int id : ids)
            if (id < 0 || id >= num_elements) {
                result.error = "element id " + std::to_string(id) + " outside 0.." +
                               std::to_string(num_elements - 1);
                return result;
            }
        if (is_routing(problem)) {
            s.routes.push_back(std::move(ids));
        } else {
            if (static_cast<size_t>(group_index) >= s.groups.size())
                s.groups.resize(static_cast<size_t>(group_index) + 1);
            if (!s.groups[static_cast<size_t>(group_index)].empty()) {
                result.error = "group " + std::to_string(group_index) + " given twice";
                return result;
            }
            s.groups[static_cast<size_t>(group_index)] = std::move(ids);
        }
        at = content_end + close_tag.size();
    }

    if (problem == Problem::tsp) {
        if (s.routes.size() != 1) {
            result.error = "tsp expects exactly one <route> block, got " +
                           std::to_string(s.routes.size());
            return result;
        }
        auto& tour = s.routes[0];
        if (tour.size() >= 2 && tour.front() == tour.back()) tour.pop_back();
    }
    if (is_routing(problem) && s.routes.empty()) {
        result.error = "no <route> block found";
        return result;
    }
    if (problem == Problem::mkp) {
        std::set<int> assigned;
        for (const auto& g : s.groups) assigned.insert(g.begin(), g.end());
        for (int id = 0; id < num_elements; ++id)
            if (!assigned.count(id)) s.unassigned.push_back(id);
    }
    result.solution = std::move(s);
    return result;
}

}  // namespace carve

#endif  // CARVE_SOLUTION_HPP_
