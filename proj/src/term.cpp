#include "minisym/term.hpp"

#include <algorithm>

namespace minisym {

int32_t wrap_binop(BinOp op, int32_t a, int32_t b) {
    switch (op) {
    case BinOp::Add:
        return static_cast<int32_t>(static_cast<uint32_t>(a) + static_cast<uint32_t>(b));
    case BinOp::Sub:
        return static_cast<int32_t>(static_cast<uint32_t>(a) - static_cast<uint32_t>(b));
    case BinOp::Mul:
        return static_cast<int32_t>(static_cast<uint32_t>(a) * static_cast<uint32_t>(b));
    case BinOp::Sdiv:
        // Divisors are nonzero constants by construction; INT_MIN / -1 wraps.
        if (a == INT32_MIN && b == -1)
            return INT32_MIN;
        return a / b;
    }
    return 0;
}

int32_t eval_cmp(CmpRel rel, int32_t a, int32_t b) {
    switch (rel) {
    case CmpRel::Eq: return a == b;
    case CmpRel::Ne: return a != b;
    case CmpRel::Lt: return a < b;
    case CmpRel::Le: return a <= b;
    case CmpRel::Gt: return a > b;
    case CmpRel::Ge: return a >= b;
    }
    return 0;
}

namespace {

CmpRel negate_rel(CmpRel rel) {
    switch (rel) {
    case CmpRel::Eq: return CmpRel::Ne;
    case CmpRel::Ne: return CmpRel::Eq;
    case CmpRel::Lt: return CmpRel::Ge;
    case CmpRel::Le: return CmpRel::Gt;
    case CmpRel::Gt: return CmpRel::Le;
    case CmpRel::Ge: return CmpRel::Lt;
    }
    return CmpRel::Eq;
}

uint64_t node_hash(const TermNode& n) {
    uint64_t h = static_cast<uint64_t>(n.kind);
    h = h * 1099511628211ull + n.opcode;
    h = h * 1099511628211ull + static_cast<uint32_t>(n.value);
    h = h * 1099511628211ull + n.lhs;
    h = h * 1099511628211ull + n.rhs;
    return h;
}

bool node_eq(const TermNode& a, const TermNode& b) {
    return a.kind == b.kind && a.opcode == b.opcode && a.value == b.value && a.lhs == b.lhs &&
           a.rhs == b.rhs;
}

} // namespace

TermArena::TermArena() {
    nodes_.reserve(1024);
    constant(0); // id 0 is always the zero constant
}

TermId TermArena::intern(const TermNode& node) {
    uint64_t h = node_hash(node);
    auto& bucket = buckets_[h];
    for (TermId id : bucket)
        if (node_eq(nodes_[id], node))
            return id;
    TermId id = static_cast<TermId>(nodes_.size());
    nodes_.push_back(node);
    bucket.push_back(id);
    return id;
}

TermId TermArena::constant(int32_t v) {
    TermNode n;
    n.kind = TermKind::Constant;
    n.value = v;
    return intern(n);
}

TermId TermArena::fresh_input(const std::string& name) {
    TermNode n;
    n.kind = TermKind::Input;
    n.value = static_cast<int32_t>(input_names_.size());
    input_names_.push_back(name);
    // Inputs are never deduplicated: each registration is a distinct symbol.
    TermId id = static_cast<TermId>(nodes_.size());
    nodes_.push_back(n);
    return id;
}

TermId TermArena::binary(BinOp op, TermId a, TermId b) {
    if (is_constant(a) && is_constant(b))
        return constant(wrap_binop(op, constant_value(a), constant_value(b)));
    TermNode n;
    n.kind = TermKind::Binary;
    n.opcode = static_cast<uint8_t>(op);
    n.lhs = a;
    n.rhs = b;
    return intern(n);
}

TermId TermArena::compare(CmpRel rel, TermId a, TermId b) {
    if (is_constant(a) && is_constant(b))
        return constant(eval_cmp(rel, constant_value(a), constant_value(b)));
    TermNode n;
    n.kind = TermKind::Compare;
    n.opcode = static_cast<uint8_t>(rel);
    n.lhs = a;
    n.rhs = b;
    return intern(n);
}

TermId TermArena::negate(TermId t) {
    const TermNode& n = nodes_[t];
    if (n.kind == TermKind::Constant)
        return constant(n.value == 0 ? 1 : 0);
    if (n.kind == TermKind::Compare)
        return compare(negate_rel(static_cast<CmpRel>(n.opcode)), n.lhs, n.rhs);
    return compare(CmpRel::Eq, t, constant(0));
}

int32_t TermArena::eval(TermId id, std::span<const int32_t> inputs) const {
    const TermNode& n = nodes_[id];
    switch (n.kind) {
    case TermKind::Constant:
        return n.value;
    case TermKind::Input: {
        auto idx = static_cast<size_t>(n.value);
        return idx < inputs.size() ? inputs[idx] : 0;
    }
    case TermKind::Binary:
        return wrap_binop(static_cast<BinOp>(n.opcode), eval(n.lhs, inputs), eval(n.rhs, inputs));
    case TermKind::Compare:
        return eval_cmp(static_cast<CmpRel>(n.opcode), eval(n.lhs, inputs), eval(n.rhs, inputs));
    }
    return 0;
}

void TermArena::collect_inputs(TermId id, std::vector<InputId>& out) const {
    std::vector<TermId> stack{id};
    std::vector<bool> seen;
    while (!stack.empty()) {
        TermId t = stack.back();
        stack.pop_back();
        if (t >= seen.size())
            seen.resize(t + 1, false);
        if (seen[t])
            continue;
        seen[t] = true;
        const TermNode& n = nodes_[t];
        switch (n.kind) {
        case TermKind::Input:
            out.push_back(static_cast<InputId>(n.value));
            break;
        case TermKind::Binary:
        case TermKind::Compare:
            stack.push_back(n.lhs);
            stack.push_back(n.rhs);
            break;
        default:
            break;
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

} // namespace minisym
