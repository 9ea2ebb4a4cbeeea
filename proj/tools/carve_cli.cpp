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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "carve/carve.hpp"
#include "carve/http_transport.hpp"

namespace fs = std::filesystem;

namespace {

carve::InstanceFormat infer_format(const std::string& path, const std::string& format_flag) {
    if (!format_flag.empty()) return carve::format_from_string(format_flag);
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".tsp") return carve::InstanceFormat::tsplib;
    if (ext == ".vrp") return carve::InstanceFormat::cvrplib;
    if (ext == ".json") return carve::InstanceFormat::json;
    throw carve::ConfigError("cannot infer format of " + path + "; pass --format");
}

struct RunFlags {
    std::string instance;
    std::string format;
    std::string problem;
    std::string decomposer = "heuristic";
    std::string reconstructor = "heuristic";
    double time_limit = 3600;
    int reject_threshold = 5;
    int active_cap = 20;
    double temperature = 0;
    uint64_t seed = 0;
    std::string model = "gpt-4o";
    std::string mock_script;
    std::optional<double> optimum;
    std::string out;
};

void add_strategy_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--decomposer", f.decomposer, "random|heuristic|llm")
        ->check(CLI::IsMember({"random", "heuristic", "llm"}));
    cmd->add_option("--reconstructor", f.reconstructor, "heuristic|exact|llm")
        ->check(CLI::IsMember({"heuristic", "exact", "llm"}));
    cmd->add_option("--time-limit", f.time_limit, "wall clock limit in seconds");
    cmd->add_option("--reject-threshold", f.reject_threshold,
                    "stop after this many consecutive rejections");
    cmd->add_option("--active-cap", f.active_cap, "max active elements per iteration");
    cmd->add_option("--temperature", f.temperature,
                    "acceptance temperature (0 = scale to the initial objective)");
    cmd->add_option("--seed", f.seed, "rng seed");
    cmd->add_option("--model", f.model, "model name for the live transport");
    cmd->add_option("--mock-script", f.mock_script,
                    "JSON array of scripted replies; replaces the live transport");
}

carve::OrchestratorConfig config_from_flags(const RunFlags& f) {
    carve::OrchestratorConfig cfg;
    cfg.decomposer = carve::decompose_strategy_from_string(f.decomposer);
    cfg.reconstructor = carve::reconstruct_strategy_from_string(f.reconstructor);
    cfg.time_limit_seconds = f.time_limit;
    cfg.rejection_threshold = f.reject_threshold;
    cfg.active_cap = f.active_cap;
    cfg.acceptance_temperature = f.temperature;
    cfg.seed = f.seed;
    return cfg;
}

int run_single(const RunFlags& f) {
    const auto format = infer_format(f.instance, f.format);
    std::ifstream in(f.instance, std::ios::binary);
    if (!in) throw carve::ConfigError("cannot open " + f.instance);
    std::ostringstream raw;
    raw << in.rdbuf();
    const carve::Metadata m = carve::parse_instance(raw.str(), format);
    if (!f.problem.empty() && carve::problem_from_string(f.problem) != m.problem)
        throw carve::ConfigError("instance is " + carve::to_string(m.problem) +
                                 ", not " + f.problem);

    carve::OrchestratorConfig cfg = config_from_flags(f);
    carve::TokenLedger ledger;
    std::unique_ptr<carve::Transport> transport;
    carve::AgentContext agent;
    const carve::AgentContext* agent_ptr = nullptr;
    if (cfg.decomposer == carve::DecomposeStrategy::llm ||
        cfg.reconstructor == carve::ReconstructStrategy::llm) {
        if (!f.mock_script.empty())
            transport = std::make_unique<carve::MockTransport>(
                carve::MockTransport::load_script(f.mock_script));
        else
            transport = std::make_unique<carve::HttpTransport>();
        agent.transport = transport.get();
        agent.config.model = f.model;
        agent.ledger = &ledger;
        agent_ptr = &agent;
    }

    const carve::RunResult result = carve::run(m, cfg, agent_ptr);

    carve::BenchReport report;
    report.rows.push_back(
        carve::make_row(m.name, f.optimum, result, cfg.time_limit_seconds));
    report.total_api_calls = result.ledger.api_calls;
    report.total_input_tokens = result.ledger.input_tokens;
    report.total_output_tokens = result.ledger.output_tokens;
    std::cout << report.table();
    std::cout << "termination: " << carve::to_string(result.termination) << " after "
              << result.iterations << " iterations (initial objective "
              << result.initial_objective << ")\n";

    if (!f.out.empty()) {
        fs::create_directories(f.out);
        const std::string base = fs::path(f.out) / m.name;
        std::ofstream sol(base + ".sol.xml");
        sol << carve::serialize_solution(result.best) << "\n";
        std::ofstream log(base + ".log.jsonl");
        log << nlohmann::ordered_json{{"record", "header"}, {"version", carve::kManifestVersion}}
                   .dump()
            << "\n";
        for (const auto& it : result.trace)
            log << carve::detail::iteration_record_json(m.name, it).dump() << "\n";
        log << carve::detail::run_record_json(report.rows[0], result).dump() << "\n";
        std::cout << "wrote " << base << ".sol.xml\n";
    }
    return result.best_feasible ? 0 : 1;
}

int run_bench(const std::string& manifest_path, int workers_override,
              const std::string& out_override) {
    carve::BenchmarkManifest manifest = carve::load_manifest(manifest_path);
    if (workers_override > 0) manifest.workers = workers_override;
    if (!out_override.empty()) manifest.output_dir = out_override;

    std::ostringstream log_buffer;
    const carve::BenchReport report = carve::run_benchmark(manifest, &log_buffer);
    std::cout << report.table();
    if (!manifest.output_dir.empty()) {
        fs::create_directories(manifest.output_dir);
        std::ofstream table(fs::path(manifest.output_dir) / "report.txt");
        table << report.table();
        std::ofstream log(fs::path(manifest.output_dir) / "log.jsonl");
        log << log_buffer.str();
        std::cout << "wrote " << manifest.output_dir << "/report.txt\n";
    }
    for (const auto& row : report.rows)
        if (!row.error.empty()) {
            std::cerr << row.name << ": " << row.error << "\n";
            return 1;
        }
    return 0;
}

int run_gen_mkp(int items, int knapsacks, uint64_t seed, const std::string& out) {
    carve::SeededRng rng(seed);
    const carve::Metadata m = carve::generate_mkp(items, knapsacks, rng);
    const std::string doc = carve::serialize_json(m);
    if (out.empty()) {
        std::cout << doc << "\n";
    } else {
        std::ofstream f(out);
        if (!f) throw carve::ConfigError("cannot write " + out);
        f << doc << "\n";
        std::cout << "wrote " << out << " (" << m.name << ")\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decomposition/reconstruction solver for large-scale routing and packing"};
    app.require_subcommand(1);

    RunFlags rf;
    CLI::App* run_cmd = app.add_subcommand("run", "improve one instance");
    run_cmd->add_option("instance", rf.instance, "instance file")->required();
    run_cmd->add_option("--format", rf.format, "tsplib|cvrplib|json (inferred by default)");
    run_cmd->add_option("--problem", rf.problem, "expected problem type (validation only)");
    add_strategy_flags(run_cmd, rf);
    run_cmd->add_option("--optimum", [&rf](const CLI::results_t& r) {
        rf.optimum = std::stod(r[0]);
        return true;
    }, "known optimum for gap reporting");
    run_cmd->add_option("--out", rf.out, "directory for the solution and log");

    std::string manifest_path, bench_out;
    int workers = 0;
    CLI::App* bench_cmd = app.add_subcommand("bench", "run a benchmark manifest");
    bench_cmd->add_option("manifest", manifest_path, "manifest JSON")->required();
    bench_cmd->add_option("--workers", workers, "parallel entry runners");
    bench_cmd->add_option("--out", bench_out, "output directory (overrides manifest)");

    int gen_items = 0, gen_knapsacks = 0;
    uint64_t gen_seed = 0;
    std::string gen_out;
    CLI::App* gen_cmd = app.add_subcommand("gen-mkp", "generate a synthetic mkp instance");
    gen_cmd->add_option("--items", gen_items, "item count")->required();
    gen_cmd->add_option("--knapsacks", gen_knapsacks, "knapsack count")->required();
    gen_cmd->add_option("--seed", gen_seed, "rng seed");
    gen_cmd->add_option("--out", gen_out, "output file (stdout by default)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (run_cmd->parsed()) return run_single(rf);
        if (bench_cmd->parsed()) return run_bench(manifest_path, workers, bench_out);
        if (gen_cmd->parsed()) return run_gen_mkp(gen_items, gen_knapsacks, gen_seed, gen_out);
    } catch (const carve::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
