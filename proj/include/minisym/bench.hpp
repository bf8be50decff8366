#pragma once

#include "minisym/driver.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace minisym {

struct BenchRecord {
    std::string program;
    std::string strategy;
    uint64_t seed = 0;
    uint64_t selections = 0;
    uint64_t unsafe_covered = 0;
    uint64_t unique_errors = 0;
    uint64_t wall_ms = 0;
    uint64_t solver_unknowns = 0;
    bool failed = false;
};

struct StrategyAggregate {
    std::string strategy;
    uint64_t unsafe_covered = 0;
    uint64_t unique_errors = 0;
    uint64_t selections = 0;
    uint64_t wall_ms = 0;
};

struct BenchOutcome {
    std::vector<BenchRecord> records;
    std::vector<StrategyAggregate> aggregates;      // per requested strategy, in order
    std::optional<double> pearson_r;                // unsafe_covered vs unique_errors
    std::vector<std::pair<std::string, ErrorRecord>> errors; // (program name, record)
};

struct BenchParams {
    std::string corpus_dir;
    std::vector<std::string> strategies;
    std::vector<uint64_t> seeds;
    RunConfig base;           // per-cell engine/search configuration
    std::string out_dir;      // empty: no files written
    bool per_cell_artifacts = true;
};

// Runs every (program, strategy, seed) cell under the shared budget, writes
// bench.csv and summary.txt, and returns the records plus aggregates. A cell
// that throws is flagged `failed` and the bench continues.
BenchOutcome run_bench(const BenchParams& params);

// Sample Pearson correlation. Throws std::invalid_argument on fewer than two
// points or zero variance in either series.
double pearson(std::span<const double> xs, std::span<const double> ys);

} // namespace minisym
