#include "minisym/bench.hpp"
#include "minisym/corpus.hpp"
#include "minisym/driver.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace minisym;

std::optional<Program> load_program(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open '" << path << "'\n";
        return std::nullopt;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    ParseResult parsed = parse_program(buf.str());
    if (!parsed.ok()) {
        for (const Diagnostic& d : parsed.diagnostics)
            std::cerr << path << ":" << d.line << ": " << d.message << "\n";
        return std::nullopt;
    }
    std::vector<Diagnostic> diags = validate(*parsed.program);
    if (!diags.empty()) {
        for (const Diagnostic& d : diags)
            std::cerr << path << ":" << d.line << ": " << d.message << "\n";
        return std::nullopt;
    }
    return std::move(parsed.program);
}

struct SharedFlags {
    uint64_t seed = 0;
    std::string out;
    uint64_t max_selections = 0;
    uint64_t max_steps = 5'000'000;
    uint64_t solver_budget = 100000;
};

struct SearchFlags {
    std::string strategy = "mcts";
    double uct_c = 1.41421356;
    std::string optimization_degree = "700";
    uint64_t sim_step_cap = 20000;
    bool no_guided_expansion = false;
    bool no_simulation = false;
    bool no_sim_opt = false;
    std::string coverage_scope = "all";
    std::string reward_scope = "playout";
    std::string tree_dump;
    std::string stagnation_dump;
    bool wall_clock = false;
};

void add_shared(CLI::App* cmd, SharedFlags& f) {
    cmd->add_option("--seed", f.seed, "Deterministic run seed");
    cmd->add_option("--out", f.out, "Output directory for artifacts");
    cmd->add_option("--max-selections", f.max_selections, "State-selection budget (0 = unbounded)");
    cmd->add_option("--max-steps", f.max_steps, "Whole-run instruction cap (0 = unbounded)");
    cmd->add_option("--solver-budget", f.solver_budget, "Assignments tried per solver query");
}

void add_search(CLI::App* cmd, SearchFlags& f, bool with_strategy) {
    if (with_strategy)
        cmd->add_option("--search", f.strategy,
                        "Search strategy: bfs,dfs,random,covnew,md2u,icnt,mcts "
                        "(coverage-guided baselines are simplified deterministic analogues)");
    cmd->add_option("--uct-c", f.uct_c, "UCT exploration constant");
    cmd->add_option("--optimization-degree", f.optimization_degree,
                    "Stagnant simulations before a fork site stops simulating (int or 'inf')");
    cmd->add_option("--sim-step-cap", f.sim_step_cap, "Per-playout instruction cap");
    cmd->add_flag("--no-guided-expansion", f.no_guided_expansion, "Expand uniformly at random");
    cmd->add_flag("--no-simulation", f.no_simulation, "Skip playouts (backpropagate 0)");
    cmd->add_flag("--no-sim-opt", f.no_sim_opt, "Disable the stagnation optimization");
    cmd->add_option("--coverage-scope", f.coverage_scope,
                    "Count unsafe coverage from: all | tree (exclude playouts)");
    cmd->add_option("--reward-scope", f.reward_scope,
                    "Playout reward counts sites: playout (distinct within) | run-new");
    cmd->add_option("--tree-dump", f.tree_dump, "Write the execution tree to this file");
    cmd->add_option("--stagnation-dump", f.stagnation_dump,
                    "Write per-fork-site simulation stats to this file");
    cmd->add_flag("--wall-clock", f.wall_clock,
                  "Record real wall time in stats (breaks byte-identical artifacts)");
}

bool fill_config(const SharedFlags& shared, const SearchFlags& search, RunConfig& cfg) {
    cfg.strategy = search.strategy;
    cfg.seed = shared.seed;
    cfg.max_selections = shared.max_selections;
    cfg.max_steps = shared.max_steps;
    cfg.solver_budget = shared.solver_budget;
    cfg.out_dir = shared.out;
    cfg.tree_dump_path = search.tree_dump;
    cfg.stagnation_dump_path = search.stagnation_dump;
    cfg.wall_clock = search.wall_clock;
    cfg.mcts.exploration_c = search.uct_c;
    cfg.mcts.sim_step_cap = search.sim_step_cap;
    cfg.mcts.guided_expansion = !search.no_guided_expansion;
    cfg.mcts.simulation = !search.no_simulation;
    cfg.mcts.sim_optimization = !search.no_sim_opt;
    if (search.optimization_degree == "inf") {
        cfg.mcts.optimization_degree = kInfiniteDegree;
    } else {
        try {
            cfg.mcts.optimization_degree = std::stoull(search.optimization_degree);
        } catch (...) {
            std::cerr << "error: --optimization-degree expects an integer or 'inf'\n";
            return false;
        }
    }
    if (search.coverage_scope == "all")
        cfg.coverage_scope = CoverageScope::All;
    else if (search.coverage_scope == "tree")
        cfg.coverage_scope = CoverageScope::Tree;
    else {
        std::cerr << "error: --coverage-scope expects all|tree\n";
        return false;
    }
    if (search.reward_scope == "playout")
        cfg.mcts.reward_scope = RewardScope::Playout;
    else if (search.reward_scope == "run-new")
        cfg.mcts.reward_scope = RewardScope::RunNew;
    else {
        std::cerr << "error: --reward-scope expects playout|run-new\n";
        return false;
    }
    if (!is_strategy_name(cfg.strategy)) {
        std::cerr << "error: unknown strategy '" << cfg.strategy << "'\n";
        return false;
    }
    return true;
}

std::vector<uint64_t> parse_seeds(const std::string& text) {
    std::vector<uint64_t> seeds;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ','))
        if (!part.empty())
            seeds.push_back(std::stoull(part));
    return seeds;
}

std::vector<std::string> parse_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ','))
        if (!part.empty())
            out.push_back(part);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"minisym: a miniature symbolic execution engine with "
                 "unsafe-pointer-guided MCTS path exploration"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Explore one program and write artifacts");
    std::string run_path;
    SharedFlags run_shared;
    SearchFlags run_search;
    run_cmd->add_option("program", run_path, "IR source file")->required();
    add_shared(run_cmd, run_shared);
    add_search(run_cmd, run_search, true);

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "Dump pointer classification and unsafe sites");
    std::string analyze_path;
    analyze_cmd->add_option("program", analyze_path, "IR source file")->required();

    // gen-corpus
    auto* gen_cmd = app.add_subcommand("gen-corpus", "Generate a benchmark corpus");
    SharedFlags gen_shared;
    uint32_t gen_count = 30;
    uint32_t gen_min_blocks = 24, gen_max_blocks = 64;
    double gen_loop_prob = 0.2, gen_bug_prob = 0.5;
    add_shared(gen_cmd, gen_shared);
    gen_cmd->add_option("--count", gen_count, "Number of programs");
    gen_cmd->add_option("--min-blocks", gen_min_blocks, "Minimum blocks per main function");
    gen_cmd->add_option("--max-blocks", gen_max_blocks, "Maximum blocks per main function");
    gen_cmd->add_option("--loop-prob", gen_loop_prob, "Probability of a loop segment");
    gen_cmd->add_option("--bug-prob", gen_bug_prob, "Probability a program gets a planted bug");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Run a strategy comparison over a corpus");
    SharedFlags bench_shared;
    SearchFlags bench_search;
    std::string bench_corpus;
    std::string bench_strategies = "bfs,dfs,random,covnew,md2u,icnt,mcts";
    std::string bench_seeds = "0";
    uint64_t bench_budget_ms = 0;
    bench_cmd->add_option("--corpus", bench_corpus, "Corpus directory")->required();
    bench_cmd->add_option("--strategies", bench_strategies, "Comma-separated strategy list");
    bench_cmd->add_option("--seeds", bench_seeds, "Comma-separated seed list");
    bench_cmd->add_option("--budget-ms", bench_budget_ms,
                          "Wall-time budget per cell in ms (0 = selection budget only; "
                          "makes runs nondeterministic)");
    add_shared(bench_cmd, bench_shared);
    add_search(bench_cmd, bench_search, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            auto program = load_program(run_path);
            if (!program)
                return 1;
            RunConfig cfg;
            if (!fill_config(run_shared, run_search, cfg))
                return 1;
            ProgramAnalyses analyses = ProgramAnalyses::analyze(*program);
            RunResult result = run_program(*program, analyses, cfg);
            std::cout << "strategy=" << cfg.strategy << " selections=" << result.stats.selections
                      << " instructions=" << result.stats.instructions
                      << " unsafe_covered=" << result.stats.unsafe_covered
                      << " unique_errors=" << result.stats.unique_errors
                      << " test_cases=" << result.stats.test_cases << "\n";
            return 0;
        }
        if (analyze_cmd->parsed()) {
            auto program = load_program(analyze_path);
            if (!program)
                return 1;
            PointerClassification classes = classify_pointers(*program);
            UnsafeSet unsafe = unsafe_sites(*program, classes);
            dump_classification(std::cout, *program, classes, unsafe);
            return 0;
        }
        if (gen_cmd->parsed()) {
            if (gen_shared.out.empty()) {
                std::cerr << "error: gen-corpus requires --out\n";
                return 1;
            }
            CorpusSpec spec;
            spec.program_count = gen_count;
            spec.min_blocks = gen_min_blocks;
            spec.max_blocks = gen_max_blocks;
            spec.loop_prob = gen_loop_prob;
            spec.bug_prob = gen_bug_prob;
            spec.seed = gen_shared.seed;
            auto entries = generate_corpus(spec, gen_shared.out);
            uint32_t bugs = 0;
            for (const auto& e : entries)
                bugs += e.planted_bug ? 1 : 0;
            std::cout << "generated " << entries.size() << " programs (" << bugs
                      << " with planted bugs) in " << gen_shared.out << "\n";
            return 0;
        }
        if (bench_cmd->parsed()) {
            BenchParams params;
            params.corpus_dir = bench_corpus;
            params.strategies = parse_list(bench_strategies);
            params.seeds = parse_seeds(bench_seeds);
            for (const std::string& s : params.strategies) {
                if (!is_strategy_name(s)) {
                    std::cerr << "error: unknown strategy '" << s << "'\n";
                    return 1;
                }
            }
            if (params.seeds.empty()) {
                std::cerr << "error: no seeds given\n";
                return 1;
            }
            SearchFlags search = bench_search;
            RunConfig base;
            if (!fill_config(bench_shared, search, base))
                return 1;
            base.budget_ms = bench_budget_ms;
            base.wall_clock = bench_budget_ms != 0;
            params.base = base;
            params.out_dir = bench_shared.out;
            BenchOutcome outcome = run_bench(params);
            for (const StrategyAggregate& a : outcome.aggregates)
                std::cout << a.strategy << ": unsafe_covered=" << a.unsafe_covered
                          << " unique_errors=" << a.unique_errors << "\n";
            if (outcome.pearson_r)
                std::cout << "pearson(unsafe_covered, unique_errors) = " << *outcome.pearson_r
                          << "\n";
            else
                std::cout << "pearson(unsafe_covered, unique_errors) = undefined\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
