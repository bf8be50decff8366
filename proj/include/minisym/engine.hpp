#pragma once

#include "minisym/analysis.hpp"
#include "minisym/ir.hpp"
#include "minisym/rng.hpp"
#include "minisym/solver.hpp"
#include "minisym/state.hpp"
#include "minisym/term.hpp"
#include "minisym/tree.hpp"

#include <map>
#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace minisym {

class EngineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CoverageScope : uint8_t { Tree, All };

// Global instruction coverage, consumed by the coverage-guided strategies.
struct CoverageIndex {
    std::unordered_set<Location, LocationHash> covered;
    uint64_t version = 0;

    bool is_covered(const Location& loc) const { return covered.count(loc) != 0; }
    bool cover(const Location& loc) {
        if (!covered.insert(loc).second)
            return false;
        ++version;
        return true;
    }
};

struct EngineConfig {
    uint64_t solver_budget = 100000;
    uint64_t max_steps = 5'000'000;   // whole-run instruction cap (real execution)
    CoverageScope coverage_scope = CoverageScope::All;
};

// The execution core: interprets IR on symbolic states, forks at symbolic
// branches, detects out-of-bounds dereferences, runs forking-disabled
// playouts and generates test cases on termination.
class Engine {
public:
    Engine(const Program& program, const ProgramAnalyses& analyses, EngineConfig config);

    // Creates the initial state at the entry function (entry parameters bound
    // to fresh symbolic inputs) and the tree root.
    StateId init_state();

    // Executes `sid` until a symbolic branch, termination, an error, or the
    // step caps. `quantum` (0 = none) bounds this call's instruction count;
    // hitting it yields Continue with the state still live.
    StepOutcome run_until_event(StateId sid, uint64_t quantum = 0);

    // Forking-disabled playout on a clone of `sid`; the real state is
    // untouched. At symbolic branches with both sides feasible one side is
    // chosen uniformly by the seeded generator.
    SimulationTrace simulate_playout(StateId sid, uint64_t seed, uint64_t step_cap);

    const Program& program() const { return *program_; }
    const ProgramAnalyses& analyses() const { return *analyses_; }
    TermArena& arena() { return arena_; }
    const Solver& solver() const { return solver_; }

    ExecutionState& state(StateId id) { return *states_.at(id); }
    const ExecutionState& state(StateId id) const { return *states_.at(id); }
    bool is_live(StateId id) const { return id < states_.size() && states_[id] != nullptr; }
    const std::vector<StateId>& live_states() const { return live_; }

    ExecutionTree& tree() { return tree_; }
    const ExecutionTree& tree() const { return tree_; }

    RunStats& stats() { return stats_; }
    const RunStats& stats() const { return stats_; }
    const CoverageIndex& coverage() const { return coverage_; }

    const std::vector<ErrorRecord>& errors() const { return errors_; }
    const std::vector<TestCaseData>& test_cases() const { return test_cases_; }
    const std::vector<StateId>& termination_order() const { return termination_order_; }

    // Distinct unsafe sites covered, honoring the configured coverage scope.
    uint64_t unsafe_covered_count() const;

    void set_strategy_label(std::string label) { strategy_label_ = std::move(label); }
    void note_selection() { ++stats_.selections; }
    void unselect() { --stats_.selections; }
    void note_backprop() { ++stats_.backprops; }

    // Expansion score of the `true_side` successor of a fork at `site`,
    // memoized per (site, side): unsafe sites in the successor's unique
    // blocks.
    uint32_t expansion_score(const Location& site, bool true_side);

private:
    struct DerefResult {
        bool errored = false;
        bool stuck = false;   // path condition could not be modeled
        uint32_t cell = 0;
        std::optional<ErrorRecord> error;  // present when errored with a witness
    };

    RtValue eval_operand(ExecutionState& s, const Operand& op);
    TermId as_term(ExecutionState& s, const Operand& op, const char* what);
    void advance(ExecutionState& s) { ++s.pc.index; }
    void enter_block(ExecutionState& s, uint32_t block) {
        s.pc.block = block;
        s.pc.index = 0;
    }
    uint64_t virtual_ms() const { return (stats_.instructions + stats_.playout_instructions) / 1000; }

    // Bounds-checks a dereference; on a satisfiable violation records the
    // error (with witness) and returns errored=true. Otherwise concretizes a
    // symbolic offset (appending the pinning conjunct) and returns the cell.
    DerefResult check_deref(ExecutionState& s, const Location& site, const RtValue& ptr,
                            bool in_playout);

    ErrorRecord make_error(const Location& site, ErrorKind kind, const Model& model,
                           const ExecutionState& s, bool from_playout) const;
    void record_unique(const ErrorRecord& rec);
    void terminate_state(ExecutionState& s, TerminationKind kind,
                         const std::optional<ErrorRecord>& err);
    void cover_unsafe(ExecutionState& s, const Location& site, bool in_playout,
                      SimulationTrace* trace);

    // Executes one instruction. Returns Continue when control simply moved
    // on; Forked/Terminated end the caller's loop.
    StepOutcome exec_instruction(ExecutionState& s, bool in_playout, Rng* playout_rng,
                                 SimulationTrace* trace);

    const Program* program_;
    const ProgramAnalyses* analyses_;
    EngineConfig config_;
    TermArena arena_;
    Solver solver_;

    std::vector<std::unique_ptr<ExecutionState>> states_;
    std::vector<StateId> live_;           // ascending ids
    ExecutionTree tree_;
    RunStats stats_;
    CoverageIndex coverage_;

    std::vector<ErrorRecord> errors_;     // unique on (site, kind)
    std::set<std::pair<Location, ErrorKind>> seen_errors_;
    std::vector<TestCaseData> test_cases_;
    std::vector<StateId> termination_order_;
    std::set<Location> unsafe_covered_tree_;
    std::set<Location> unsafe_covered_playout_;
    std::map<std::pair<Location, bool>, uint32_t> exp_score_cache_;
    std::string strategy_label_ = "?";
};

} // namespace minisym
