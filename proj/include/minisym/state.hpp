#pragma once

#include "minisym/ir.hpp"
#include "minisym/solver.hpp"
#include "minisym/term.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace minisym {

using StateId = uint32_t;
using ObjectId = uint32_t;
inline constexpr StateId kNoState = UINT32_MAX;

// Runtime value: a 32-bit term (possibly symbolic) or a pointer into a
// memory object with a term-valued cell offset. Offsets may run out of
// bounds as data; dereferencing is where bounds are enforced.
struct RtValue {
    enum class Kind : uint8_t { Int, Pointer } kind = Kind::Int;
    TermId term = 0;        // Int: the value; Pointer: the offset
    ObjectId object = 0;    // Pointer only

    static RtValue integer(TermId t) { return RtValue{Kind::Int, t, 0}; }
    static RtValue pointer(ObjectId obj, TermId offset) {
        return RtValue{Kind::Pointer, offset, obj};
    }
    bool is_pointer() const { return kind == Kind::Pointer; }
};

struct MemoryObject {
    ObjectId id = 0;
    uint32_t size = 0;       // fixed at allocation, >= 1
    std::vector<RtValue> cells;
};

struct Frame {
    uint32_t function = 0;
    Location call_site;       // location of the call instruction in the caller
    std::string ret_dst;      // caller variable receiving the return value
    std::unordered_map<std::string, RtValue> locals;
};

struct InputDecl {
    InputId id = 0;
    std::string name;
};

enum class ErrorKind : uint8_t { OutOfBounds, AbortReached };

const char* error_kind_name(ErrorKind k);

enum class TerminationKind : uint8_t { Exit, Error, StepCapReached, Stuck };

struct ErrorRecord {
    Location site;
    ErrorKind kind = ErrorKind::OutOfBounds;
    std::vector<std::pair<std::string, int32_t>> witness; // input name -> value, declaration order
    std::string strategy;
    uint64_t selection_index = 0;
    uint64_t wall_ms = 0;
    bool from_playout = false;
};

struct ExecutionState {
    StateId id = 0;
    uint32_t depth = 0;          // fork count along the path
    Location pc;
    std::vector<Frame> stack;    // back() is the active frame
    std::map<ObjectId, MemoryObject> memory;
    ObjectId next_object = 0;
    std::vector<TermId> path_condition;
    std::vector<InputDecl> inputs;                 // declaration order
    std::map<std::string, uint32_t> sym_counts;    // dynamic occurrence naming
    std::set<Location> covered_unsafe;
    uint64_t steps_since_new_coverage = 0;

    Frame& frame() { return stack.back(); }
    const Frame& frame() const { return stack.back(); }
};

struct StepOutcome {
    enum class Kind : uint8_t { Continue, Forked, Terminated } kind = Kind::Continue;
    // Forked
    std::optional<StateId> true_child;
    std::optional<StateId> false_child;
    Location fork_site;
    // Terminated
    TerminationKind termination = TerminationKind::Exit;
    std::optional<ErrorRecord> error;
    // Always
    uint64_t steps = 0;   // instructions executed during this call
};

struct SimulationTrace {
    std::vector<std::pair<uint32_t, uint32_t>> visited_blocks; // (function, block)
    std::set<Location> unsafe_covered;   // distinct within the playout
    uint32_t new_sites = 0;              // sites not covered by the run before this playout
    uint32_t errors_found = 0;
    uint64_t steps = 0;
};

struct TestCaseData {
    uint32_t index = 0;  // 1-based, in termination order
    std::vector<std::pair<std::string, int32_t>> inputs;
    std::string status;  // "exit" | "error:<kind>@<site>" | "unverified"
};

struct RunStats {
    uint64_t selections = 0;
    uint64_t instructions = 0;          // real execution only
    uint64_t playout_instructions = 0;
    uint64_t unsafe_covered = 0;        // distinct sites, per coverage scope
    uint64_t unique_errors = 0;
    uint64_t test_cases = 0;
    uint64_t solver_unknowns = 0;
    uint64_t backprops = 0;
    uint64_t wall_ms = 0;
};

} // namespace minisym
