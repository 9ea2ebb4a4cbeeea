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

#ifndef CARVE_BENCH_HPP_
#define CARVE_BENCH_HPP_

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "carve/error.hpp"
#include "carve/gateway.hpp"
#include "carve/instance.hpp"
#include "carve/orchestrator.hpp"
#include "carve/rng.hpp"

namespace carve {

// Optimality gap |v - v*| / v* * 100, reported to three decimals.
inline double gap(double v, double v_star) {
    if (v_star <= 0) throw DomainError("gap needs a positive reference value");
    return std::abs(v - v_star) / v_star * 100.0;
}

inline std::string format_gap(double g) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << g;
    return out.str();
}

// Synthetic multiple-knapsack instance: integer capacities ~ U(100, 500),
// item values and weights ~ U(1, 100).
inline Metadata generate_mkp(int n_items, int n_knapsacks, SeededRng& rng) {
    if (n_items < 1 || n_knapsacks < 1)
        throw ConfigError("generate_mkp needs at least one item and one knapsack");
    Metadata m;
    m.problem = Problem::mkp;
    m.name = "mkp_" + std::to_string(n_items) + "_" + std::to_string(n_knapsacks) + "_" +
             std::to_string(rng.seed());
    m.num = n_items;
    for (int k = 0; k < n_knapsacks; ++k)
        m.capacities.push_back(static_cast<double>(rng.uniform_int(100, 500)));
    for (int i = 0; i < n_items; ++i) {
        m.values.push_back(static_cast<double>(rng.uniform_int(1, 100)));
        m.weights.push_back(static_cast<double>(rng.uniform_int(1, 100)));
    }
    validate(m);
    return m;
}

struct ManifestEntry {
    std::string path;
    InstanceFormat format = InstanceFormat::json;
    Problem problem = Problem::tsp;
    std::optional<double> optimum;  // known optimum or lower bound
};

inline constexpr int kManifestVersion = 1;

struct BenchmarkManifest {
    int version = kManifestVersion;
    std::vector<ManifestEntry> entries;
    OrchestratorConfig config;
    std::string model = "gpt-4o";
    std::string mock_script;  // empty = live transport when llm strategies are set
    int workers = 1;
    std::string output_dir;
};

inline BenchmarkManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("manifest " + path + ": " + e.what());
    }
    BenchmarkManifest man;
    if (!doc.contains("version") || !doc["version"].is_number_integer())
        throw SchemaError("manifest must carry an integer \"version\"");
    man.version = doc["version"].get<int>();
    if (man.version != kManifestVersion)
        throw SchemaError("unsupported manifest version " + std::to_string(man.version));
    if (!doc.contains("entries") || !doc["entries"].is_array() || doc["entries"].empty())
        throw SchemaError("manifest needs a non-empty \"entries\" list");
    for (const auto& e : doc["entries"]) {
        ManifestEntry entry;
        entry.path = e.at("path").get<std::string>();
        entry.format = format_from_string(e.at("format").get<std::string>());
        entry.problem = problem_from_string(e.at("problem").get<std::string>());
        if (e.contains("optimum")) entry.optimum = e["optimum"].get<double>();
        man.entries.push_back(std::move(entry));
    }
    if (doc.contains("config")) {
        const auto& c = doc["config"];
        auto& cfg = man.config;
        if (c.contains("decomposer"))
            cfg.decomposer = decompose_strategy_from_string(c["decomposer"].get<std::string>());
        if (c.contains("reconstructor"))
            cfg.reconstructor =
                reconstruct_strategy_from_string(c["reconstructor"].get<std::string>());
        if (c.contains("time_limit")) cfg.time_limit_seconds = c["time_limit"].get<double>();
        if (c.contains("reject_threshold"))
            cfg.rejection_threshold = c["reject_threshold"].get<int>();
        if (c.contains("active_cap")) cfg.active_cap = c["active_cap"].get<int>();
        if (c.contains("temperature")) cfg.acceptance_temperature = c["temperature"].get<double>();
        if (c.contains("seed")) cfg.seed = c["seed"].get<uint64_t>();
        if (c.contains("revision_rounds")) cfg.revision.rounds = c["revision_rounds"].get<int>();
        if (c.contains("exact_threshold")) cfg.exact_threshold = c["exact_threshold"].get<int>();
    }
    if (doc.contains("model")) man.model = doc["model"].get<std::string>();
    if (doc.contains("mock_script")) man.mock_script = doc["mock_script"].get<std::string>();
    if (doc.contains("workers")) man.workers = doc["workers"].get<int>();
    if (doc.contains("output_dir")) man.output_dir = doc["output_dir"].get<std::string>();
    return man;
}

struct BenchRow {
    std::string name;
    std::optional<double> optimum;
    std::optional<double> objective;
    std::string gap_text;  // percentage, "inf", "infe", or "error"
    int64_t api_calls = 0;
    int64_t input_tokens = 0;
    int64_t output_tokens = 0;
    double elapsed_seconds = 0;
    std::string error;
};

// The gap column mirrors the result-table conventions: "inf" marks a run that
// hit the time limit without a feasible solution, "infe" an infeasible final
// solution, a bare number the optimality gap, "-" no known reference.
inline BenchRow make_row(const std::string& name, const std::optional<double>& optimum,
                         const RunResult& result, double time_limit_seconds) {
    BenchRow row;
    row.name = name;
    row.optimum = optimum;
    row.objective = result.best_objective;
    row.api_calls = result.ledger.api_calls;
    row.input_tokens = result.ledger.input_tokens;
    row.output_tokens = result.ledger.output_tokens;
    row.elapsed_seconds = result.elapsed_seconds;
    if (!result.best_feasible) {
        row.gap_text = result.elapsed_seconds >= time_limit_seconds ? "inf" : "infe";
    } else if (optimum) {
        row.gap_text = format_gap(gap(result.best_objective, *optimum));
    } else {
        row.gap_text = "-";
    }
    return row;
}

struct BenchReport {
    std::vector<BenchRow> rows;
    int64_t total_api_calls = 0;
    int64_t total_input_tokens = 0;
    int64_t total_output_tokens = 0;

    std::string table() const {
        std::ostringstream out;
        out << std::left << std::setw(20) << "name" << std::right << std::setw(14) << "optimum"
            << std::setw(14) << "objective" << std::setw(10) << "gap(%)" << std::setw(8)
            << "calls" << std::setw(12) << "in_tok" << std::setw(12) << "out_tok"
            << std::setw(10) << "time(s)" << "\n";
        for (const auto& r : rows) {
            out << std::left << std::setw(20) << r.name << std::right;
            if (!r.error.empty()) {
                out << std::setw(14) << "-" << std::setw(14) << "-" << std::setw(10) << "error"
                    << std::setw(8) << 0 << std::setw(12) << 0 << std::setw(12) << 0
                    << std::setw(10) << "-" << "\n";
                continue;
            }
            out << std::setw(14)
                << (r.optimum ? detail::number_str(*r.optimum) : std::string("-"))
                << std::setw(14)
                << (r.objective ? detail::number_str(*r.objective) : std::string("-"))
                << std::setw(10) << r.gap_text << std::setw(8) << r.api_calls << std::setw(12)
                << r.input_tokens << std::setw(12) << r.output_tokens << std::setw(10)
                << std::fixed << std::setprecision(3) << r.elapsed_seconds << "\n";
        }
        out << std::left << std::setw(20) << "total" << std::right << std::setw(14) << ""
            << std::setw(14) << "" << std::setw(10) << "" << std::setw(8) << total_api_calls
            << std::setw(12) << total_input_tokens << std::setw(12) << total_output_tokens
            << std::setw(10) << "" << "\n";
        return out.str();
    }
};

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline nlohmann::ordered_json iteration_record_json(const std::string& instance,
                                                    const IterationRecord& it) {
    return {{"record", "iteration"},
            {"instance", instance},
            {"iteration", it.iteration},
            {"local_delta", it.local_delta},
            {"accepted", it.accepted},
            {"elapsed", it.elapsed_seconds}};
}

inline nlohmann::ordered_json run_record_json(const BenchRow& row, const RunResult& result) {
    return {{"record", "run"},
            {"instance", row.name},
            {"objective", result.best_objective},
            {"initial_objective", result.initial_objective},
            {"gap", row.gap_text},
            {"iterations", result.iterations},
            {"api_calls", result.ledger.api_calls},
            {"input_tokens", result.ledger.input_tokens},
            {"output_tokens", result.ledger.output_tokens},
            {"tokens_estimated", result.ledger.estimated},
            {"termination", to_string(result.termination)},
            {"elapsed", result.elapsed_seconds}};
}

}  // namespace detail

// Runs every manifest entry (optionally in parallel) and assembles the report
// in manifest order. Each run owns its rng (seed = config seed + entry index),
// its ledger, and — when a mock script is configured — its own replay of the
// script. A per-iteration JSONL stream is written to `log` when given.
inline BenchReport run_benchmark(const BenchmarkManifest& manifest, std::ostream* log = nullptr) {
    const size_t n = manifest.entries.size();
    std::vector<BenchRow> rows(n);
    std::vector<std::optional<RunResult>> results(n);

    const bool needs_agent = manifest.config.decomposer == DecomposeStrategy::llm ||
                             manifest.config.reconstructor == ReconstructStrategy::llm;

    std::atomic<size_t> cursor{0};
    auto worker = [&]() {
        while (true) {
            const size_t i = cursor.fetch_add(1);
            if (i >= n) return;
            const auto& entry = manifest.entries[i];
            BenchRow& row = rows[i];
            row.name = entry.path;
            try {
                const Metadata m =
                    parse_instance(detail::read_file(entry.path), entry.format);
                if (m.problem != entry.problem)
                    throw SchemaError("instance problem type " + to_string(m.problem) +
                                      " does not match manifest entry " +
                                      to_string(entry.problem));
                OrchestratorConfig cfg = manifest.config;
                cfg.seed = manifest.config.seed + i;

                TokenLedger ledger;
                std::unique_ptr<MockTransport> mock;
                AgentContext agent;
                const AgentContext* agent_ptr = nullptr;
                if (needs_agent) {
                    if (manifest.mock_script.empty())
                        throw ConfigError(
                            "llm strategies in a manifest need a mock_script (use the CLI "
                            "for live runs)");
                    mock = std::make_unique<MockTransport>(
                        MockTransport::load_script(manifest.mock_script));
                    agent.transport = mock.get();
                    agent.config.model = manifest.model;
                    agent.ledger = &ledger;
                    agent_ptr = &agent;
                }
                const RunResult result = run(m, cfg, agent_ptr);
                row = make_row(m.name.empty() ? entry.path : m.name, entry.optimum, result,
                               cfg.time_limit_seconds);
                results[i] = result;
            } catch (const Error& e) {
                row.error = e.what();
                row.gap_text = "error";
            }
        }
    };

    const int worker_count =
        std::max(1, std::min(manifest.workers, static_cast<int>(n)));
    if (worker_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(worker_count));
        for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    BenchReport report;
    report.rows = rows;
    for (const auto& r : rows) {
        report.total_api_calls += r.api_calls;
        report.total_input_tokens += r.input_tokens;
        report.total_output_tokens += r.output_tokens;
    }
    if (log) {
        *log << nlohmann::ordered_json{{"record", "header"}, {"version", kManifestVersion}}
              .dump()
             << "\n";
        for (size_t i = 0; i < n; ++i) {
            if (!results[i]) continue;
            for (const auto& it : results[i]->trace)
                *log << detail::iteration_record_json(rows[i].name, it).dump() << "\n";
            *log << detail::run_record_json(rows[i], *results[i]).dump() << "\n";
        }
    }
    return report;
}

}  // namespace carve

#endif  // CARVE_BENCH_HPP_
