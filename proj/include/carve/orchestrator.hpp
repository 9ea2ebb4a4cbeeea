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

#ifndef CARVE_ORCHESTRATOR_HPP_
#define CARVE_ORCHESTRATOR_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "carve/decompose.hpp"
#include "carve/error.hpp"
#include "carve/gateway.hpp"
#include "carve/heuristics.hpp"
#include "carve/instance.hpp"
#include "carve/reconstruct.hpp"
#include "carve/rng.hpp"
#include "carve/solution.hpp"
#include "carve/subproblem.hpp"

namespace carve {

inline constexpr int kActiveCapCeiling = 50;

struct OrchestratorConfig {
    double time_limit_seconds = 3600;
    int rejection_threshold = 5;
    double acceptance_temperature = 0;  // 0 = auto: max(1, 0.01 * |initial objective|)
    DecomposeStrategy decomposer = DecomposeStrategy::heuristic;
    ReconstructStrategy reconstructor = ReconstructStrategy::heuristic;
    int active_cap = 20;
    uint64_t seed = 0;
    RevisionBudget revision;
    int exact_threshold = kDefaultExactThreshold;
};

enum class Termination { time_limit, rejection_threshold, strategy_failure };

inline std::string to_string(Termination t) {
    switch (t) {
        case Termination::time_limit: return "time_limit";
        case Termination::rejection_threshold: return "rejection_threshold";
        case Termination::strategy_failure: return "strategy_failure";
    }
    return "?";
}

struct IterationRecord {
    int iteration = 0;
    double local_delta = 0;
    bool accepted = false;
    double elapsed_seconds = 0;
};

// Objectives are reported in natural sign (mkp value positive).
struct RunResult {
    Solution best;
    double best_objective = 0;
    double initial_objective = 0;
    std::vector<IterationRecord> trace;
    TokenStats ledger;
    Termination termination = Termination::time_limit;
    int iterations = 0;
    double elapsed_seconds = 0;
    bool best_feasible = true;
};

// Probabilistic acceptance: a candidate is taken with probability
// min{1, exp(-(f_new - f_old) / T)}. One uniform draw per decision keeps
// the rng stream aligned across runs.
inline bool accept(double f_old, double f_new, double temperature, SeededRng& rng) {
    if (temperature <= 0) throw ConfigError("acceptance temperature must be positive");
    const double u = rng.uniform01();
    if (f_new <= f_old) return true;
    return u < std::exp(-(f_new - f_old) / temperature);
}

// One full improvement run: bootstrap, then decompose / compress /
// reconstruct / accept / integrate until the time limit or the consecutive
// rejection threshold is hit.
inline RunResult run(const Metadata& m, const OrchestratorConfig& cfg,
                     const AgentContext* agent = nullptr) {
    if (cfg.time_limit_seconds <= 0) throw ConfigError("time limit must be positive");
    if (cfg.rejection_threshold < 1) throw ConfigError("rejection threshold must be >= 1");
    if (cfg.active_cap < 1) throw ConfigError("active cap must be >= 1");
    const int cap = std::min(cfg.active_cap, kActiveCapCeiling);
    const bool needs_agent = cfg.decomposer == DecomposeStrategy::llm ||
                             cfg.reconstructor == ReconstructStrategy::llm;
    if (needs_agent && !agent)
        throw ConfigError("llm strategies need an agent (transport + ledger)");

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    SeededRng rng(cfg.seed);
    Solution current = bootstrap(m, rng);
    double f_current = objective(m, current);

    const double temperature = cfg.acceptance_temperature > 0
                                   ? cfg.acceptance_temperature
                                   : std::max(1.0, 0.01 * std::abs(f_current));

    RunResult result;
    result.initial_objective = reported_objective(m.problem, f_current);
    result.best = current;
    double f_best = f_current;
    result.termination = Termination::time_limit;

    int rejections = 0;
    int iteration = 0;
    while (true) {
        if (elapsed() >= cfg.time_limit_seconds) {
            result.termination = Termination::time_limit;
            break;
        }
        if (rejections >= cfg.rejection_threshold) {
            result.termination = Termination::rejection_threshold;
            break;
        }
        ++iteration;
        bool accepted = false;
        double delta = 0;
        bool config_failure = false;
        try {
            const ActiveSelection sel =
                decompose(cfg.decomposer, m, current, cap, rng, agent);
            const SubProblem sub = compress(m, current, sel);
            ReconstructionOutcome outcome;
            try {
                outcome = reconstruct(cfg.reconstructor, sub, rng, agent, cfg.revision,
                                      cfg.exact_threshold);
            } catch (const CapabilityError&) {
                // The configured strategy declined this subproblem; fall back
                // to the heuristic for the iteration.
                outcome = reconstruct(ReconstructStrategy::heuristic, sub, rng, agent,
                                      cfg.revision, cfg.exact_threshold);
            }
            if (outcome.solution) {
                const double f_old = local_objective(sub, sub.local_solution);
                const double f_new = local_objective(sub, *outcome.solution);
                delta = f_new - f_old;
                if (accept(f_old, f_new, temperature, rng)) {
                    current = integrate(*outcome.solution, sub, current);
                    f_current = objective(m, current);
                    accepted = true;
                }
            }
        } catch (const ConfigError&) {
            config_failure = true;
        } catch (const TransportError&) {
            // strategy error; counts as a rejection
        } catch (const IntegrationError&) {
            // infeasible integration is rejected, never applied
        } catch (const DegenerateSubproblemError&) {
            // nothing eligible to refine this iteration
        }
        if (config_failure) {
            result.termination = Termination::strategy_failure;
            break;
        }
        if (accepted) {
            rejections = 0;
            if (f_current < f_best) {
                f_best = f_current;
                result.best = current;
            }
        } else {
            ++rejections;
        }
        result.trace.push_back({iteration, delta, accepted, elapsed()});
    }

    result.iterations = iteration;
    result.best_objective = reported_objective(m.problem, f_best);
    result.elapsed_seconds = elapsed();
    result.best_feasible = check_feasible(m, result.best).feasible;
    if (agent && agent->ledger) result.ledger = agent->ledger->snapshot();
    return result;
}

}  // namespace carve

#endif  // CARVE_ORCHESTRATOR_HPP_
