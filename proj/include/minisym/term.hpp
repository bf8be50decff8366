#pragma once

#include "minisym/ir.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace minisym {

using TermId = uint32_t;
using InputId = uint32_t;

enum class TermKind : uint8_t { Constant, Input, Binary, Compare };

struct TermNode {
    TermKind kind = TermKind::Constant;
    uint8_t opcode = 0;      // BinOp or CmpRel
    int32_t value = 0;       // Constant value / Input id
    TermId lhs = 0;
    TermId rhs = 0;
};

// 32-bit two's-complement wrapping semantics shared by terms, the solver,
// the engine and the concrete replayer.
int32_t wrap_binop(BinOp op, int32_t a, int32_t b);
int32_t eval_cmp(CmpRel rel, int32_t a, int32_t b);

// Hash-consed term DAG. Shared by every state of a run; append-only.
class TermArena {
public:
    TermArena();

    TermId constant(int32_t v);
    // Registers a fresh symbolic input and returns a term referring to it.
    TermId fresh_input(const std::string& name);
    TermId binary(BinOp op, TermId a, TermId b);     // folds constants
    TermId compare(CmpRel rel, TermId a, TermId b);  // folds constants

    // Logical negation with truthiness semantics (a term holds iff value != 0).
    // Comparisons negate into the flipped relation, which keeps branch
    // conjuncts in a shape the solver's interval pass understands.
    TermId negate(TermId t);

    const TermNode& node(TermId id) const { return nodes_[id]; }
    bool is_constant(TermId id) const { return nodes_[id].kind == TermKind::Constant; }
    int32_t constant_value(TermId id) const { return nodes_[id].value; }

    size_t input_count() const { return input_names_.size(); }
    const std::string& input_name(InputId id) const { return input_names_[id]; }

    // Evaluates under a concrete assignment indexed by input id; inputs
    // beyond the vector (or unset) read as 0.
    int32_t eval(TermId id, std::span<const int32_t> inputs) const;

    // Distinct input ids referenced by the term, in ascending order.
    void collect_inputs(TermId id, std::vector<InputId>& out) const;

private:
    TermId intern(const TermNode& node);

    std::vector<TermNode> nodes_;
    std::unordered_map<uint64_t, std::vector<TermId>> buckets_;
    std::vector<std::string> input_names_;
};

} // namespace minisym
