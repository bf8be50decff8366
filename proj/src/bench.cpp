#include "minisym/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace minisym {

namespace fs = std::filesystem;

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("pearson: length mismatch");
    size_t n = xs.size();
    if (n < 2)
        throw std::invalid_argument("pearson: need at least two points");
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx;
        double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pearson: undefined for zero variance");
    return sxy / std::sqrt(sxx * syy);
}

namespace {

struct LoadedProgram {
    std::string name;
    Program program;
    ProgramAnalyses analyses;
};

std::vector<LoadedProgram> load_corpus(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".ir")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<LoadedProgram> out;
    for (const fs::path& file : files) {
        std::ifstream in(file);
        std::stringstream buf;
        buf << in.rdbuf();
        ParseResult parsed = parse_program(buf.str());
        if (!parsed.ok())
            throw std::runtime_error("corpus program does not parse: " + file.string());
        std::vector<Diagnostic> diags = validate(*parsed.program);
        if (!diags.empty())
            throw std::runtime_error("corpus program does not validate: " + file.string() + ": " +
                                     diags.front().message);
        LoadedProgram lp;
        lp.name = file.stem().string();
        lp.program = std::move(*parsed.program);
        lp.analyses = ProgramAnalyses::analyze(lp.program);
        out.push_back(std::move(lp));
    }
    return out;
}

void write_bench_csv(const fs::path& path, const std::vector<BenchRecord>& records) {
    std::ofstream out(path);
    out << "# minisym bench v1\n";
    out << "program,strategy,seed,selections,unsafe_covered,unique_errors,wall_ms,"
           "solver_unknowns,failed\n";
    for (const BenchRecord& r : records)
        out << r.program << "," << r.strategy << "," << r.seed << "," << r.selections << ","
            << r.unsafe_covered << "," << r.unique_errors << "," << r.wall_ms << ","
            << r.solver_unknowns << "," << (r.failed ? 1 : 0) << "\n";
}

void write_summary(const fs::path& path, const BenchOutcome& outcome) {
    std::ofstream out(path);
    out << "# minisym bench summary v1\n";
    out << "strategy,unsafe_covered,unique_errors,selections,wall_ms\n";
    for (const StrategyAggregate& a : outcome.aggregates)
        out << a.strategy << "," << a.unsafe_covered << "," << a.unique_errors << ","
            << a.selections << "," << a.wall_ms << "\n";
    if (outcome.pearson_r) {
        char buf[64];
        snprintf(buf, sizeof(buf), "%.6f", *outcome.pearson_r);
        out << "pearson_unsafe_errors," << buf << "\n";
    } else {
        out << "pearson_unsafe_errors,undefined\n";
    }
}

} // namespace

BenchOutcome run_bench(const BenchParams& params) {
    std::vector<LoadedProgram> corpus = load_corpus(params.corpus_dir);
    BenchOutcome outcome;

    for (const std::string& strategy : params.strategies)
        outcome.aggregates.push_back({strategy, 0, 0, 0, 0});

    for (const LoadedProgram& lp : corpus) {
        for (size_t si = 0; si < params.strategies.size(); ++si) {
            for (uint64_t seed : params.seeds) {
                RunConfig cfg = params.base;
                cfg.strategy = params.strategies[si];
                cfg.seed = seed;
                cfg.out_dir.clear();
                cfg.tree_dump_path.clear();
                cfg.stagnation_dump_path.clear();
                if (!params.out_dir.empty() && params.per_cell_artifacts) {
                    fs::path cell = fs::path(params.out_dir) / lp.name / cfg.strategy /
                                    ("s" + std::to_string(seed));
                    cfg.out_dir = cell.string();
                }
                BenchRecord rec;
                rec.program = lp.name;
                rec.strategy = cfg.strategy;
                rec.seed = seed;
                try {
                    RunResult rr = run_program(lp.program, lp.analyses, cfg);
                    rec.selections = rr.stats.selections;
                    rec.unsafe_covered = rr.stats.unsafe_covered;
                    rec.unique_errors = rr.stats.unique_errors;
                    rec.wall_ms = rr.stats.wall_ms;
                    rec.solver_unknowns = rr.stats.solver_unknowns;
                    for (const ErrorRecord& e : rr.errors)
                        outcome.errors.push_back({lp.name, e});
                    StrategyAggregate& agg = outcome.aggregates[si];
                    agg.unsafe_covered += rec.unsafe_covered;
                    agg.unique_errors += rec.unique_errors;
                    agg.selections += rec.selections;
                    agg.wall_ms += rec.wall_ms;
                } catch (const std::exception&) {
                    rec.failed = true;
                }
                outcome.records.push_back(std::move(rec));
            }
        }
    }

    std::vector<double> xs, ys;
    for (const BenchRecord& r : outcome.records) {
        if (r.failed)
            continue;
        xs.push_back(static_cast<double>(r.unsafe_covered));
        ys.push_back(static_cast<double>(r.unique_errors));
    }
    try {
        outcome.pearson_r = pearson(xs, ys);
    } catch (const std::invalid_argument&) {
        outcome.pearson_r = std::nullopt;
    }

    if (!params.out_dir.empty()) {
        fs::create_directories(params.out_dir);
        write_bench_csv(fs::path(params.out_dir) / "bench.csv", outcome.records);
        write_summary(fs::path(params.out_dir) / "summary.txt", outcome);
    }
    return outcome;
}

} // namespace minisym
