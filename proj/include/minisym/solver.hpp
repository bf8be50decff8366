#pragma once

#include "minisym/term.hpp"

#include <optional>
#include <span>
#include <vector>

namespace minisym {

enum class SatResult : uint8_t { Sat, Unsat, Unknown };

// Concrete assignment, sparse over input ids.
struct Model {
    std::vector<std::pair<InputId, int32_t>> values; // ascending input id

    int32_t value_of(InputId id) const {
        for (const auto& [i, v] : values)
            if (i == id)
                return v;
        return 0;
    }
};

struct SolveOutcome {
    SatResult status = SatResult::Unknown;
    Model model; // meaningful only when status == Sat
};

struct SolverStats {
    uint64_t queries = 0;
    uint64_t sat = 0;
    uint64_t unsat = 0;
    uint64_t unknown = 0;
};

// Decision procedure for conjunctions of 32-bit terms:
//   1. interval propagation per input over single-variable conjuncts,
//   2. substitution of inputs whose interval collapsed to one value,
//   3. systematic search over the remaining inputs ordered by interval size,
//      values tried in canonical order (|v| ascending, non-negative first).
// The step budget bounds the total assignments tried; exhausting it yields
// Unknown. SAT answers carry the canonical model and are re-checked by
// evaluation before being returned.
class Solver {
public:
    Solver(const TermArena& arena, uint64_t budget) : arena_(&arena), budget_(budget) {}

    uint64_t budget() const { return budget_; }
    void set_budget(uint64_t b) { budget_ = b; }

    SolveOutcome check_sat(std::span<const TermId> conjuncts) const;

    // Canonical model over `inputs` (and any other input referenced by the
    // conjuncts): per input in ascending id order, the smallest-by-absolute-
    // value assignment (ties: non-negative first) consistent with the
    // conjuncts and previously fixed inputs. Empty when no model was found
    // within the budget.
    std::optional<Model> canonical_model(std::span<const TermId> conjuncts,
                                         std::span<const InputId> inputs) const;

    SolverStats& stats() const { return stats_; }

private:
    const TermArena* arena_;
    uint64_t budget_;
    mutable SolverStats stats_;
};

} // namespace minisym
