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

#ifndef CARVE_GATEWAY_HPP_
#define CARVE_GATEWAY_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "carve/error.hpp"
#include "carve/instance.hpp"
#include "carve/solution.hpp"
#include "carve/subproblem.hpp"

namespace carve {

struct PromptPair {
    std::string system;
    std::string user;
};

struct TokenStats {
    int64_t api_calls = 0;
    int64_t input_tokens = 0;
    int64_t output_tokens = 0;
    bool estimated = false;
};

// Monotone per-run accounting; safe to update from concurrent requests.
class TokenLedger {
  public:
    void add(int64_t calls, int64_t input, int64_t output, bool estimated) {
        api_calls_ += calls;
        input_tokens_ += input;
        output_tokens_ += output;
        if (estimated) estimated_ = true;
    }

    TokenStats snapshot() const {
        return {api_calls_.load(), input_tokens_.load(), output_tokens_.load(),
                estimated_.load()};
    }

  private:
    std::atomic<int64_t> api_calls_{0};
    std::atomic<int64_t> input_tokens_{0};
    std::atomic<int64_t> output_tokens_{0};
    std::atomic<bool> estimated_{false};
};

struct ModelConfig {
    std::string model = "gpt-4o";
    std::string api_base = "https://api.openai.com";
    std::string api_path = "/v1/chat/completions";
    double timeout_seconds = 120;
    int retry_budget = 2;
    double temperature = 1.0;
    int max_tokens = 0;  // 0 = provider default
};

struct TransportReply {
    std::string text;
    int64_t input_tokens = -1;   // -1 = not reported by the provider
    int64_t output_tokens = -1;
};

class Transport {
  public:
    virtual ~Transport() = default;
    virtual TransportReply send(const PromptPair& prompt, const ModelConfig& config) = 0;
};

// Scripted transport for tests and offline runs: replays a fixed reply list
// and records every request. Running past the script raises a non-transient
// transport error.
class MockTransport : public Transport {
  public:
    MockTransport() = default;
    explicit MockTransport(std::vector<std::string> replies) : replies_(std::move(replies)) {}

    // Script file: a JSON array of reply strings, one per expected call.
    static std::vector<std::string> load_script(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open mock script " + path);
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("mock script " + path + ": " + e.what());
        }
        if (!doc.is_array()) throw ParseError("mock script must be a JSON array of strings");
        std::vector<std::string> replies;
        for (const auto& r : doc) {
            if (!r.is_string()) throw ParseError("mock script must be a JSON array of strings");
            replies.push_back(r.get<std::string>());
        }
        return replies;
    }

    TransportReply send(const PromptPair& prompt, const ModelConfig&) override {
        std::lock_guard<std::mutex> lock(mutex_);
        requests_.push_back(prompt);
        if (next_ >= replies_.size())
            throw TransportError("mock script exhausted after " +
                                     std::to_string(replies_.size()) + " replies",
                                 /*transient=*/false);
        return {replies_[next_++], -1, -1};
    }

    std::vector<PromptPair> requests() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return requests_;
    }

    size_t replies_left() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return replies_.size() - next_;
    }

  private:
    std::vector<std::string> replies_;
    size_t next_ = 0;
    std::vector<PromptPair> requests_;
    mutable std::mutex mutex_;
};

namespace detail {

inline int64_t estimate_tokens(const std::string& text) {
    return static_cast<int64_t>((text.size() + 3) / 4);
}

}  // namespace detail

// One chat completion with retry on transient failures (exponential backoff).
// The ledger gains one call plus the provider-reported usage; when the
// provider omits usage, tokens are estimated as ceil(chars/4) and the ledger
// is flagged estimated.
inline std::string complete(Transport& transport, const PromptPair& prompt,
                            const ModelConfig& config, TokenLedger& ledger) {
    for (int attempt = 0;; ++attempt) {
        try {
            const TransportReply reply = transport.send(prompt, config);
            const bool estimate_in = reply.input_tokens < 0;
            const bool estimate_out = reply.output_tokens < 0;
            const int64_t in = estimate_in
                                   ? detail::estimate_tokens(prompt.system + prompt.user)
                                   : reply.input_tokens;
            const int64_t out =
                estimate_out ? detail::estimate_tokens(reply.text) : reply.output_tokens;
            ledger.add(1, in, out, estimate_in || estimate_out);
            return reply.text;
        } catch (const TransportError& e) {
            if (!e.transient() || attempt >= config.retry_budget) throw;
            const double delay = std::min(0.25 * static_cast<double>(1 << attempt), 4.0);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
    }
}

// Everything a strategy needs to talk to an agent: a shareable transport and
// the run-owned ledger.
struct AgentContext {
    Transport* transport = nullptr;
    ModelConfig config;
    TokenLedger* ledger = nullptr;

    std::string complete(const PromptPair& prompt) const {
        if (!transport || !ledger)
            throw ConfigError("agent context is missing a transport or ledger");
        return carve::complete(*transport, prompt, config, *ledger);
    }
};

// One reconstruction attempt kept for experience accumulation. feasible
// implies parsed is present and violations is empty.
struct ExperienceRecord {
    std::string attempt;
    std::optional<Solution> parsed;
    bool feasible = false;
    std::vector<std::string> violations;
    int round = 0;
};

// ---------------------------------------------------------------------------
// Prompt construction. The wording of every template block is fixed; tests
// pin the exact bytes against golden files.
// ---------------------------------------------------------------------------

namespace prompt_text {

inline std::string solution_mark(Problem p) { return is_routing(p) ? "route" : "pack"; }
inline std::string element_word(Problem p) { return is_routing(p) ? "node" : "item"; }
inline std::string elements_word(Problem p) { return is_routing(p) ? "nodes" : "items"; }

inline std::string metadata_format(Problem p) {
    switch (p) {
        case Problem::tsp:
            return "{\"name\": string, \"type\": string, \"num\": int, "
                   "\"x\": list of int, \"y\": list of int}";
        case Problem::cvrp:
            return "{\"name\": string, \"type\": string, \"num\": int, \"depot\": int, "
                   "\"x\": list of int, \"y\": list of int, \"capacity\": int, "
                   "\"demand\": list of int}";
        case Problem::bpp:
            return "{\"name\": string, \"type\": string, \"num\": int, "
                   "\"weights\": list of int, \"capacity\": int}";
        case Problem::mkp:
            return "{\"name\": string, \"type\": string, \"num\": int, "
                   "\"weights\": list of int, \"values\": list of int, "
                   "\"capacity\": list of int}";
    }
    return "";
}

inline std::vector<std::string> requirements(Problem p) {
    switch (p) {
        case Problem::tsp:
            return {"Must visit all the points exactly once, except the depot.",
                    "The start and end points must remain fixed.",
                    "The fixed path prevents any other visits in between; allow reversing "
                    "of the fixed path where necessary."};
        case Problem::cvrp:
            return {"Must visit all the customer nodes exactly once.",
                    "Each route must start and end at the depot.",
                    "Vehicle capacity must not be exceeded.",
                    "The fixed path prevents any other visits in between; allow reversing "
                    "of the fixed path where necessary."};
        case Problem::bpp:
            return {"Packed items' total weight in each bin must be less than or equal to "
                    "the bin's capacity."};
        case Problem::mkp:
            return {"Selected items' total weight must be less than or equal to the "
                    "knapsack's capacity."};
    }
    return {};
}

inline std::string optimization_object(Problem p) {
    switch (p) {
        case Problem::tsp:
            return "Find the shortest possible tour that visits all nodes exactly once and "
                   "returns to the starting depot.";
        case Problem::cvrp:
            return "Design a set of routes to deliver all customer demands using vehicles "
                   "with limited capacity, minimizing the total distance while visiting "
                   "each customer exactly once.";
        case Problem::bpp:
            return "Given a set of items with their weights, your task is to find the best "
                   "packing solution that minimizes the number of bins used while "
                   "respecting each bin's capacity.";
        case Problem::mkp:
            return "Given a set of items with their values and weights, your task is to "
                   "find the best packing solution that maximizes the total value while "
                   "respecting each knapsack's capacity.";
    }
    return "";
}

inline std::string solution_format(Problem p) {
    switch (p) {
        case Problem::tsp:
            return "<sol>\n<route>0,1,2,...,0</route>\n</sol>";
        case Problem::cvrp:
            return "<sol>\n<route>0,1,2,...,0</route>\n<route>0,3,4,...,0</route>\n...\n</sol>";
        case Problem::bpp:
            return "<sol>\n<bin_0>0,1,2,...</bin_0>\n<bin_1>3,4,...</bin_1>\n...\n</sol>\n\n"
                   "Where bin_i is the i-th bin.";
        case Problem::mkp:
            return "<sol>\n<knapsack_0>0,1,2,...</knapsack_0>\n<knapsack_1>3,4,...</knapsack_1>"
                   "\n...\n</sol>\n\nWhere knapsack_i is the i-th knapsack.";
    }
    return "";
}

}  // namespace prompt_text

// Decomposer prompt: the system half carries the metadata JSON and the
// <sub>...</sub> reply format, the user half the current solution and the
// element budget.
inline PromptPair build_decomposer_prompt(const Metadata& m, const Solution& s, int cap) {
    PromptPair pp;
    {
        std::ostringstream sys;
        sys << "You are an expert in optimization with smart heuristics. The user will "
               "provide you an initial solution, whose data are formatted as "
            << prompt_text::metadata_format(m.problem)
            << ". Help the user analysis the initial solution and point out which part is "
               "yet to be optimized using any creative heuristic methods you can. Ensure "
               "to output the answer in the specified required format.\n\n"
               "The problem inputs are:\n\n"
            << serialize_json(m)
            << "\n\n**Format**: Return only the node index, enclosed in <sub> and </sub>, "
               "separated by commas.\n\n"
               "For example: <sub>1,2,3</sub>";
        pp.system = sys.str();
    }
    {
        std::ostringstream user;
        user << "For the given optimization problem (" << to_string(m.problem)
             << "), my current solution is:\n\n"
             << serialize_solution(s) << "\n\nThese " << prompt_text::solution_mark(m.problem)
             << " are not optimal. I want to improve them by remove some "
             << prompt_text::element_word(m.problem)
             << " from the current solution, reconstruct them optimally.\n\n"
                "Please identify no more than "
             << cap << " " << prompt_text::element_word(m.problem)
             << " that could be improved.";
        pp.user = user.str();
    }
    return pp;
}

namespace detail {

inline std::string constraint_lines(const SubProblem& sub) {
    std::ostringstream out;
    if (is_routing(sub.local_meta.problem)) {
        std::vector<std::string> pairs;
        for (const auto& con : sub.constraints) {
            if (con.kind != Constraint::Kind::fixed_path) continue;
            if (con.path.entry == con.path.exit) continue;
            pairs.push_back("(" + std::to_string(con.path.entry) + "," +
                            std::to_string(con.path.exit) + ")");
        }
        if (pairs.empty()) return "";
        out << "Fixed visiting path as ";
        for (size_t i = 0; i < pairs.size(); ++i) {
            if (i) out << ", ";
            out << pairs[i];
        }
    } else {
        const bool mkp = sub.local_meta.problem == Problem::mkp;
        bool first = true;
        for (const auto& con : sub.constraints) {
            if (con.kind != Constraint::Kind::bulky_item) continue;
            if (!first) out << "\n";
            first = false;
            out << "Bulky item " << con.bulky.local_item << " (weight "
                << number_str(con.bulky.weight);
            if (mkp) out << ", value " << number_str(con.bulky.value);
            out << ") must stay in " << (mkp ? "knapsack " : "bin ") << con.bulky.group << ".";
        }
    }
    return out.str();
}

}  // namespace detail

// Reconstructor prompt over the compressed instance. Infeasible experience
// records are appended as <sol> + <reason> pairs for revision rounds.
inline PromptPair build_reconstructor_prompt(const SubProblem& sub,
                                             const std::vector<ExperienceRecord>& experience) {
    const Problem p = sub.local_meta.problem;
    PromptPair pp;
    {
        std::ostringstream sys;
        sys << "Act as an expert in combinatorial optimization. Your goal is find the best "
               "solution with given constraints, use any heuristic as you can.\n\n"
               "**Goal: Find the best solution, avoid the infeasible solutions.**\n\n"
               "**Requirements:**\n\n";
        for (const auto& req : prompt_text::requirements(p)) sys << "- " << req << "\n\n";
        sys << "- Check the feasibility of your solution to ensure the above conditions.\n\n"
               "OUTPUT FORMAT: After your solving, present your answer as:\n\n"
            << prompt_text::solution_format(p);
        pp.system = sys.str();
    }
    {
        std::ostringstream user;
        user << "Given a set of " << prompt_text::elements_word(p)
             << ", your task is to find the best solution while respecting the following "
                "constraints.\n\n"
             << prompt_text::optimization_object(p) << "\n\nThe problem inputs are:\n\n"
             << serialize_json(sub.local_meta);
        const std::string constraints = detail::constraint_lines(sub);
        if (!constraints.empty()) user << "\n\n" << constraints;
        user << "\n\nCurrent solution:\n\n" << serialize_solution(sub.local_solution);
        bool any_infeasible = false;
        for (const auto& rec : experience)
            if (!rec.feasible) any_infeasible = true;
        if (any_infeasible) {
            user << "\n\nAnalysis the following infeasible solution(s) and generate a new "
                    "solution to meet the given constraints.";
            for (const auto& rec : experience) {
                if (rec.feasible) continue;
                user << "\n\n"
                     << (rec.parsed ? serialize_solution(*rec.parsed) : rec.attempt)
                     << "\n\n<reason>\n";
                for (size_t i = 0; i < rec.violations.size(); ++i)
                    user << (i ? "\n" : "") << rec.violations[i];
                user << "\n</reason>";
            }
        }
        pp.user = user.str();
    }
    return pp;
}

}  // namespace carve

#endif  // CARVE_GATEWAY_HPP_
