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

#ifndef CARVE_INSTANCE_HPP_
#define CARVE_INSTANCE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "carve/error.hpp"

namespace carve {

enum class Problem { tsp, cvrp, bpp, mkp };

inline std::string to_string(Problem p) {
    switch (p) {
        case Problem::tsp: return "tsp";
        case Problem::cvrp: return "cvrp";
        case Problem::bpp: return "bpp";
        case Problem::mkp: return "mkp";
    }
    return "?";
}

inline Problem problem_from_string(const std::string& s) {
    if (s == "tsp") return Problem::tsp;
    if (s == "cvrp") return Problem::cvrp;
    if (s == "bpp") return Problem::bpp;
    if (s == "mkp") return Problem::mkp;
    throw SchemaError("unknown problem type \"" + s + "\"");
}

inline bool is_routing(Problem p) { return p == Problem::tsp || p == Problem::cvrp; }

// Canonical problem instance. Exactly the fields that apply to the problem
// type are populated; `validate` enforces the per-problem key/length rules.
// Immutable by convention after construction.
struct Metadata {
    std::string name;
    Problem problem = Problem::tsp;
    int num = 0;                             // node count (routing) / item count (packing)
    int depot = -1;                          // cvrp only
    std::vector<double> xs, ys;              // routing coordinates
    std::vector<double> weights;             // bpp, mkp
    std::vector<double> values;              // mkp
    std::vector<double> capacities;          // cvrp/bpp: single entry; mkp: one per knapsack
    std::vector<double> demand;              // cvrp
    std::vector<std::pair<int, int>> links;  // optional routing side constraints

    double capacity() const { return capacities.at(0); }
    int knapsack_count() const { return static_cast<int>(capacities.size()); }

    bool operator==(const Metadata&) const = default;
};

inline void validate(const Metadata& m) {
    const std::string where = "instance \"" + m.name + "\": ";
    if (m.num <= 0) throw SchemaError(where + "num must be positive");
    auto expect_len = [&](const std::vector<double>& v, const char* key) {
        if (static_cast<int>(v.size()) != m.num)
            throw SchemaError(where + std::string(key) + " length " +
                              std::to_string(v.size()) + " != num " + std::to_string(m.num));
    };
    auto expect_absent = [&](bool absent, const char* key) {
        if (!absent)
            throw SchemaError(where + std::string(key) + " does not apply to " +
                              to_string(m.problem));
    };
    switch (m.problem) {
        case Problem::tsp:
            expect_len(m.xs, "x");
            expect_len(m.ys, "y");
            expect_absent(m.weights.empty(), "weights");
            expect_absent(m.values.empty(), "values");
            expect_absent(m.capacities.empty(), "capacity");
            expect_absent(m.demand.empty(), "demand");
            expect_absent(m.depot < 0, "depot");
            break;
        case Problem::cvrp:
            expect_len(m.xs, "x");
            expect_len(m.ys, "y");
            expect_len(m.demand, "demand");
            expect_absent(m.weights.empty(), "weights");
            expect_absent(m.values.empty(), "values");
            if (m.capacities.size() != 1) throw SchemaError(where + "cvrp needs one capacity");
            if (m.depot < 0 || m.depot >= m.num)
                throw SchemaError(where + "depot out of range");
            if (m.demand[static_cast<size_t>(m.depot)] != 0)
                throw SchemaError(where + "depot demand must be 0");
            break;
        case Problem::bpp:
            expect_len(m.weights, "weights");
            expect_absent(m.xs.empty() && m.ys.empty(), "x/y");
            expect_absent(m.values.empty(), "values");
            expect_absent(m.demand.empty(), "demand");
            expect_absent(m.depot < 0, "depot");
            expect_absent(m.links.empty(), "link");
            if (m.capacities.size() != 1) throw SchemaError(where + "bpp needs one capacity");
            break;
        case Problem::mkp:
            expect_len(m.weights, "weights");
            expect_len(m.values, "values");
            expect_absent(m.xs.empty() && m.ys.empty(), "x/y");
            expect_absent(m.demand.empty(), "demand");
            expect_absent(m.depot < 0, "depot");
            expect_absent(m.links.empty(), "link");
            if (m.capacities.empty())
                throw SchemaError(where + "mkp needs at least one knapsack capacity");
            break;
    }
    for (double c : m.capacities)
        if (c <= 0) throw SchemaError(where + "capacities must be positive");
    for (double w : m.weights)
        if (w < 0) throw SchemaError(where + "weights must be nonnegative");
    for (double d : m.demand)
        if (d < 0) throw SchemaError(where + "demands must be nonnegative");
    for (double v : m.values)
        if (v < 0) throw SchemaError(where + "values must be nonnegative");
    for (auto [a, b] : m.links)
        if (a < 0 || a >= m.num || b < 0 || b >= m.num)
            throw SchemaError(where + "link endpoint out of range");
}

// TSPLIB EUC_2D distance: nearest integer, halves rounded up.
inline int64_t nint(double x) { return static_cast<int64_t>(std::floor(x + 0.5)); }

inline int64_t distance(const Metadata& m, int i, int j) {
    if (!is_routing(m.problem))
        throw UsageError("distance() applies to routing problems only");
    if (i < 0 || j < 0 || i >= m.num || j >= m.num)
        throw BoundsError("node index out of range: " + std::to_string(i) + "," +
                          std::to_string(j) + " on " + std::to_string(m.num) + " nodes");
    const double dx = m.xs[static_cast<size_t>(i)] - m.xs[static_cast<size_t>(j)];
    const double dy = m.ys[static_cast<size_t>(i)] - m.ys[static_cast<size_t>(j)];
    return nint(std::sqrt(dx * dx + dy * dy));
}

enum class Rounding { nint };

// Lightweight distance accessor bound to one instance.
struct DistanceMatrixView {
    const Metadata* meta = nullptr;
    Rounding rounding = Rounding::nint;
    int64_t operator()(int i, int j) const { return distance(*meta, i, j); }
};

enum class InstanceFormat { tsplib, cvrplib, json };

inline InstanceFormat format_from_string(const std::string& s) {
    if (s == "tsplib") return InstanceFormat::tsplib;
    if (s == "cvrplib") return InstanceFormat::cvrplib;
    if (s == "json") return InstanceFormat::json;
    throw ParseError("unknown instance format \"" + s + "\"");
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<double> json_number_list(const nlohmann::json& j, const std::string& key) {
    if (!j.is_array()) throw SchemaError("key \"" + key + "\" must be a list of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw SchemaError("key \"" + key + "\" must be a list of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline Metadata parse_json_instance(const std::string& raw) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("instance document must be a JSON object");
    if (!doc.contains("type") || !doc["type"].is_string())
        throw SchemaError("missing mandatory key \"type\"");
    Metadata m;
    m.problem = problem_from_string(doc["type"].get<std::string>());

    // Key sets per problem type; anything else is rejected.
    std::set<std::string> required = {"name", "type", "num"};
    std::set<std::string> optional;
    switch (m.problem) {
        case Problem::tsp:
            required.insert({"x", "y"});
            optional.insert("link");
            break;
        case Problem::cvrp:
            required.insert({"depot", "x", "y", "capacity", "demand"});
            optional.insert("link");
            break;
        case Problem::bpp:
            required.insert({"weights", "capacity"});
            break;
        case Problem::mkp:
            required.insert({"weights", "values", "capacity"});
            break;
    }
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!required.count(key) && !optional.count(key))
            throw SchemaError("unknown key \"" + key + "\" for " + to_string(m.problem));
    }
    for (const auto& key : required)
        if (!doc.contains(key)) throw SchemaError("missing mandatory key \"" + key + "\"");

    if (!doc["name"].is_string()) throw SchemaError("key \"name\" must be a string");
    m.name = doc["name"].get<std::string>();
    if (!doc["num"].is_number_integer() || doc["num"].get<int64_t>() <= 0)
        throw SchemaError("key \"num\" must be a positive integer");
    m.num = doc["num"].get<int>();

    if (doc.contains("x")) m.xs = json_number_list(doc["x"], "x");
    if (doc.contains("y")) m.ys = json_number_list(doc["y"], "y");
    if (doc.contains("weights")) m.weights = json_number_list(doc["weights"], "weights");
    if (doc.contains("values")) m.values = json_number_list(doc["values"], "values");
    if (doc.contains("demand")) m.demand = json_number_list(doc["demand"], "demand");
    if (doc.contains("depot")) {
        if (!doc["depot"].is_number_integer())
            throw SchemaError("key \"depot\" must be an integer");
        m.depot = doc["depot"].get<int>();
    }
    if (doc.contains("capacity")) {
        if (m.problem == Problem::mkp) {
            m.capacities = json_number_list(doc["capacity"], "capacity");
        } else {
            if (!doc["capacity"].is_number())
                throw SchemaError("key \"capacity\" must be a number");
            m.capacities = {doc["capacity"].get<double>()};
        }
    }
    if (doc.contains("link")) {
        if (!doc["link"].is_array()) throw SchemaError("key \"link\" must be a list of pairs");
        for (const auto& pair : doc["link"]) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
                !pair[1].is_number_integer())
                throw SchemaError("key \"link\" must be a list of index pairs");
            m.links.emplace_back(pair[0].get<int>(), pair[1].get<int>());
        }
    }
    validate(m);
    return m;
}

struct SectionLine {
    size_t number;
    std::string text;
};

// Shared plain-text scaffolding for the TSPLIB and CVRPLIB parsers: splits
// "KEY : VALUE" headers from section bodies.
class TsplibDocument {
  public:
    explicit TsplibDocument(const std::string& raw) {
        std::istringstream in(raw);
        std::string line;
        size_t line_no = 0;
        std::string current_section;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string t = trim(line);
            if (t.empty()) continue;
            if (t == "EOF") break;
            const auto colon = t.find(':');
            const bool header_like =
                colon != std::string::npos &&
                t.substr(0, colon).find(' ') == std::string::npos;
            if (header_like) {
                current_section.clear();
                headers_[trim(t.substr(0, colon))] = trim(t.substr(colon + 1));
            } else if (t.find("SECTION") != std::string::npos) {
                current_section = t;
                sections_[current_section];  // ensure present even if empty
            } else if (!current_section.empty()) {
                sections_[current_section].push_back({line_no, t});
            } else {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": unexpected content \"" + t + "\"");
            }
        }
    }

    std::string header(const std::string& key, bool required) const {
        auto it = headers_.find(key);
        if (it == headers_.end()) {
            if (required) throw SchemaError("missing mandatory key " + key);
            return "";
        }
        return it->second;
    }

    const std::vector<SectionLine>* section(const std::string& name) const {
        auto it = sections_.find(name);
        return it == sections_.end() ? nullptr : &it->second;
    }

  private:
    std::map<std::string, std::string> headers_;
    std::map<std::string, std::vector<SectionLine>> sections_;
};

inline long parse_long(const std::string& tok, size_t line_no) {
    try {
        size_t pos = 0;
        const long v = std::stol(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": expected integer, got \"" +
                         tok + "\"");
    }
}

inline double parse_double(const std::string& tok, size_t line_no) {
    try {
        size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": expected number, got \"" +
                         tok + "\"");
    }
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> toks;
    std::string t;
    while (in >> t) toks.push_back(t);
    return toks;
}

inline void read_coords(const TsplibDocument& doc, Metadata& m) {
    const auto* coords = doc.section("NODE_COORD_SECTION");
    if (!coords) throw SchemaError("missing mandatory key NODE_COORD_SECTION");
    m.xs.assign(static_cast<size_t>(m.num), 0.0);
    m.ys.assign(static_cast<size_t>(m.num), 0.0);
    std::vector<bool> seen(static_cast<size_t>(m.num), false);
    for (const auto& ln : *coords) {
        const auto toks = split_ws(ln.text);
        if (toks.size() != 3)
            throw ParseError("line " + std::to_string(ln.number) +
                             ": expected \"id x y\", got \"" + ln.text + "\"");
        const long id = parse_long(toks[0], ln.number);
        if (id < 1 || id > m.num)
            throw ParseError("line " + std::to_string(ln.number) + ": node id " +
                             std::to_string(id) + " outside 1.." + std::to_string(m.num));
        m.xs[static_cast<size_t>(id - 1)] = parse_double(toks[1], ln.number);
        m.ys[static_cast<size_t>(id - 1)] = parse_double(toks[2], ln.number);
        seen[static_cast<size_t>(id - 1)] = true;
    }
    for (int i = 0; i < m.num; ++i)
        if (!seen[static_cast<size_t>(i)])
            throw SchemaError("no coordinates for node " + std::to_string(i + 1));
}

inline Metadata parse_tsplib(const std::string& raw) {
    const TsplibDocument doc(raw);
    const std::string type = doc.header("TYPE", false);
    if (!type.empty() && type != "TSP")
        throw UnsupportedFormatError("TSPLIB TYPE " + type + " not supported (TSP only)");
    const std::string ewt = doc.header("EDGE_WEIGHT_TYPE", true);
    if (ewt != "EUC_2D")
        throw UnsupportedFormatError("EDGE_WEIGHT_TYPE " + ewt + " not supported (EUC_2D only)");
    Metadata m;
    m.problem = Problem::tsp;
    m.name = doc.header("NAME", false);
    m.num = static_cast<int>(parse_long(doc.header("DIMENSION", true), 0));
    if (m.num <= 0) throw SchemaError("DIMENSION must be positive");
    read_coords(doc, m);
    validate(m);
    return m;
}

inline Metadata parse_cvrplib(const std::string& raw) {
    const TsplibDocument doc(raw);
    const std::string type = doc.header("TYPE", false);
    if (!type.empty() && type != "CVRP")
        throw UnsupportedFormatError("CVRPLIB TYPE " + type + " not supported (CVRP only)");
    const std::string ewt = doc.header("EDGE_WEIGHT_TYPE", false);
    if (!ewt.empty() && ewt != "EUC_2D")
        throw UnsupportedFormatError("EDGE_WEIGHT_TYPE " + ewt + " not supported (EUC_2D only)");
    Metadata m;
    m.problem = Problem::cvrp;
    m.name = doc.header("NAME", false);
    m.num = static_cast<int>(parse_long(doc.header("DIMENSION", true), 0));
    if (m.num <= 0) throw SchemaError("DIMENSION must be positive");
    m.capacities = {parse_double(doc.header("CAPACITY", true), 0)};
    read_coords(doc, m);

    const auto* demands = doc.section("DEMAND_SECTION");
    if (!demands) throw SchemaError("missing mandatory key DEMAND_SECTION");
    m.demand.assign(static_cast<size_t>(m.num), 0.0);
    for (const auto& ln : *demands) {
        const auto toks = split_ws(ln.text);
        if (toks.size() != 2)
            throw ParseError("line " + std::to_string(ln.number) +
                             ": expected \"id demand\", got \"" + ln.text + "\"");
        const long id = parse_long(toks[0], ln.number);
        if (id < 1 || id > m.num)
            throw ParseError("line " + std::to_string(ln.number) + ": node id out of range");
        m.demand[static_cast<size_t>(id - 1)] = parse_double(toks[1], ln.number);
    }

    const auto* depots = doc.section("DEPOT_SECTION");
    if (!depots) throw SchemaError("missing mandatory key DEPOT_SECTION");
    std::vector<long> ids;
    for (const auto& ln : *depots)
        for (const auto& tok : split_ws(ln.text)) ids.push_back(parse_long(tok, ln.number));
    while (!ids.empty() && ids.back() == -1) ids.pop_back();
    if (ids.size() != 1)
        throw UnsupportedFormatError("exactly one depot expected, got " +
                                     std::to_string(ids.size()));
    m.depot = static_cast<int>(ids[0] - 1);
    validate(m);
    return m;
}

}  // namespace detail

inline Metadata parse_instance(const std::string& raw, InstanceFormat format) {
    switch (format) {
        case InstanceFormat::json: return detail::parse_json_instance(raw);
        case InstanceFormat::tsplib: return detail::parse_tsplib(raw);
        case InstanceFormat::cvrplib: return detail::parse_cvrplib(raw);
    }
    throw UsageError("bad instance format");
}

namespace detail {

// Numbers that are integral print without a decimal point, matching the value
// types listed for the JSON schema.
inline std::string json_number_text(double v) {
    if (v == std::floor(v) && std::abs(v) < 9.0e15)
        return std::to_string(static_cast<int64_t>(v));
    std::ostringstream out;
    out << v;
    return out.str();
}

inline std::string json_inline_array(const std::vector<double>& v) {
    std::string out = "[";
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += json_number_text(v[i]);
    }
    return out + "]";
}

}  // namespace detail

// Serializes in the fixed schema key order: name, type, num, depot, x, y,
// weights, values, capacity, demand, link. Only keys that apply to the
// problem type are emitted; arrays stay on one line.
inline std::string serialize_json(const Metadata& m) {
    std::vector<std::pair<std::string, std::string>> fields;
    fields.emplace_back("name", "\"" + m.name + "\"");
    fields.emplace_back("type", "\"" + to_string(m.problem) + "\"");
    fields.emplace_back("num", std::to_string(m.num));
    if (m.problem == Problem::cvrp) fields.emplace_back("depot", std::to_string(m.depot));
    if (is_routing(m.problem)) {
        fields.emplace_back("x", detail::json_inline_array(m.xs));
        fields.emplace_back("y", detail::json_inline_array(m.ys));
    } else {
        fields.emplace_back("weights", detail::json_inline_array(m.weights));
        if (m.problem == Problem::mkp)
            fields.emplace_back("values", detail::json_inline_array(m.values));
    }
    if (m.problem == Problem::mkp)
        fields.emplace_back("capacity", detail::json_inline_array(m.capacities));
    else if (m.problem != Problem::tsp)
        fields.emplace_back("capacity", detail::json_number_text(m.capacities.at(0)));
    if (m.problem == Problem::cvrp)
        fields.emplace_back("demand", detail::json_inline_array(m.demand));
    if (is_routing(m.problem) && !m.links.empty()) {
        std::string links = "[";
        for (size_t i = 0; i < m.links.size(); ++i) {
            if (i) links += ", ";
            links += "[" + std::to_string(m.links[i].first) + ", " +
                     std::to_string(m.links[i].second) + "]";
        }
        fields.emplace_back("link", links + "]");
    }
    std::string out = "{\n";
    for (size_t i = 0; i < fields.size(); ++i) {
        out += "  \"" + fields[i].first + "\": " + fields[i].second;
        out += i + 1 < fields.size() ? ",\n" : "\n";
    }
    return out + "}";
}

}  // namespace carve

#endif  // CARVE_INSTANCE_HPP_
