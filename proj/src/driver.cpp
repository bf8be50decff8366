#include "minisym/driver.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace minisym {

namespace fs = std::filesystem;

namespace {

void write_test_case(const fs::path& dir, const TestCaseData& tc) {
    char name[32];
    snprintf(name, sizeof(name), "test%06u.txt", tc.index);
    std::ofstream out(dir / name);
    for (const auto& [input, value] : tc.inputs)
        out << "input " << input << " = " << value << "\n";
    out << "status = " << tc.status << "\n";
}

void write_errors_csv(const fs::path& path, const Program& p, const std::vector<ErrorRecord>& errors) {
    std::ofstream out(path);
    out << "# minisym errors v1\n";
    out << "site,kind,strategy,selection_index,wall_ms\n";
    for (const ErrorRecord& e : errors)
        out << format_location(p, e.site) << "," << error_kind_name(e.kind) << "," << e.strategy
            << "," << e.selection_index << "," << e.wall_ms << "\n";
}

void write_stats_csv(const fs::path& path, const RunStats& s) {
    std::ofstream out(path);
    out << "# minisym stats v1\n";
    out << "selections,instructions,playout_instructions,unsafe_covered,unique_errors,"
           "test_cases,solver_unknowns,backprops,wall_ms\n";
    out << s.selections << "," << s.instructions << "," << s.playout_instructions << ","
        << s.unsafe_covered << "," << s.unique_errors << "," << s.test_cases << ","
        << s.solver_unknowns << "," << s.backprops << "," << s.wall_ms << "\n";
}

void write_stagnation(const fs::path& path, const Program& p, const StagnationTable& table) {
    std::ofstream out(path);
    out << "# minisym stagnation v1\n";
    out << "site,total_sims,stagnant,best_reward\n";
    char buf[64];
    for (const auto& [site, st] : table.entries()) {
        snprintf(buf, sizeof(buf), "%.6f", st.best_reward);
        out << format_location(p, site) << "," << st.total_sims << "," << st.stagnant << "," << buf
            << "\n";
    }
}

} // namespace

void write_run_artifacts(const Program& program, Engine& engine, const RunConfig& config,
                         const StagnationTable* stagnation) {
    if (!config.out_dir.empty()) {
        fs::path dir(config.out_dir);
        fs::create_directories(dir);
        for (const TestCaseData& tc : engine.test_cases())
            write_test_case(dir, tc);
        write_errors_csv(dir / "errors.csv", program, engine.errors());
        write_stats_csv(dir / "stats.csv", engine.stats());
    }
    if (!config.tree_dump_path.empty()) {
        fs::path p(config.tree_dump_path);
        if (p.has_parent_path())
            fs::create_directories(p.parent_path());
        std::ofstream out(p);
        engine.tree().dump(out);
    }
    if (!config.stagnation_dump_path.empty() && stagnation != nullptr) {
        fs::path p(config.stagnation_dump_path);
        if (p.has_parent_path())
            fs::create_directories(p.parent_path());
        write_stagnation(p, program, *stagnation);
    }
}

RunResult run_program(const Program& program, const ProgramAnalyses& analyses,
                      const RunConfig& config, bool keep_engine) {
    auto start = std::chrono::steady_clock::now();

    EngineConfig ec;
    ec.solver_budget = config.solver_budget;
    ec.max_steps = config.max_steps;
    ec.coverage_scope = config.coverage_scope;
    auto engine = std::make_unique<Engine>(program, analyses, ec);
    engine->set_strategy_label(config.strategy);
    engine->init_state();

    std::unique_ptr<SearchStrategy> strategy =
        make_strategy(config.strategy, config.seed, config.mcts);

    while (!engine->live_states().empty()) {
        RunStats& stats = engine->stats();
        if (config.max_selections != 0 && stats.selections >= config.max_selections)
            break;
        if (config.max_steps != 0 && stats.instructions >= config.max_steps)
            break;
        if (config.budget_ms != 0) {
            auto elapsed = std::chrono::steady_clock::now() - start;
            if (std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() >=
                static_cast<int64_t>(config.budget_ms))
                break;
        }
        engine->note_selection();
        StateId sid = strategy->select(*engine);
        if (sid == kNoState) {
            engine->unselect();
            break;
        }
        engine->run_until_event(sid);
    }

    RunStats& stats = engine->stats();
    stats.unsafe_covered = engine->unsafe_covered_count();
    if (config.wall_clock) {
        auto elapsed = std::chrono::steady_clock::now() - start;
        stats.wall_ms =
            static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count());
    } else {
        // Deterministic virtual time; real timing is opt-in because it breaks
        // byte-identical artifacts.
        stats.wall_ms = (stats.instructions + stats.playout_instructions) / 1000;
    }

    const StagnationTable* table = nullptr;
    if (auto* mcts = dynamic_cast<MctsStrategy*>(strategy.get()))
        table = &mcts->stagnation();
    write_run_artifacts(program, *engine, config, table);

    RunResult result;
    result.stats = stats;
    result.errors = engine->errors();
    result.test_cases = engine->test_cases();
    result.termination_order = engine->termination_order();
    if (keep_engine)
        result.engine = std::move(engine);
    return result;
}

} // namespace minisym
