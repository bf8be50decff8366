#pragma once

#include "minisym/engine.hpp"
#include "minisym/mcts.hpp"
#include "minisym/strategy.hpp"

#include <memory>
#include <string>
#include <vector>

namespace minisym {

struct RunConfig {
    std::string strategy = "mcts";
    uint64_t seed = 0;
    uint64_t max_selections = 0;   // 0 = until exhaustion / step cap
    uint64_t max_steps = 5'000'000;
    uint64_t budget_ms = 0;         // wall-time budget (0 = none; nondeterministic)
    uint64_t solver_budget = 100000;
    MctsConfig mcts;
    CoverageScope coverage_scope = CoverageScope::All;
    bool wall_clock = false;        // real wall time in stats (non-deterministic)
    std::string out_dir;            // empty: no artifacts written
    std::string tree_dump_path;     // empty: no dump
    std::string stagnation_dump_path;
};

struct RunResult {
    RunStats stats;
    std::vector<ErrorRecord> errors;
    std::vector<TestCaseData> test_cases;
    std::vector<StateId> termination_order;
    // Set when keep_engine was requested; the caller must keep the Program
    // and ProgramAnalyses alive while using it.
    std::unique_ptr<Engine> engine;
};

// Runs the engine loop under the configured strategy until the selection
// cap, the step cap, or exhaustion, then writes the artifacts (test cases,
// errors.csv, stats.csv, optional dumps) into out_dir.
RunResult run_program(const Program& program, const ProgramAnalyses& analyses,
                      const RunConfig& config, bool keep_engine = false);

// Artifact writers, shared with the bench runner.
void write_run_artifacts(const Program& program, Engine& engine, const RunConfig& config,
                         const StagnationTable* stagnation);

} // namespace minisym
