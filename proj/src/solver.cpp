#include "minisym/solver.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace minisym {

namespace {

constexpr int64_t kMin = INT32_MIN;
constexpr int64_t kMax = INT32_MAX;

struct Interval {
    int64_t lo = kMin;
    int64_t hi = kMax;

    bool empty() const { return lo > hi; }
    uint64_t size() const { return empty() ? 0 : static_cast<uint64_t>(hi - lo + 1); }
    void intersect(int64_t l, int64_t h) {
        lo = std::max(lo, l);
        hi = std::min(hi, h);
    }
};

int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

int64_t ceil_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) == (b < 0)))
        ++q;
    return q;
}

// Solution interval of "y REL c" over y. Ne gives no single interval.
bool rel_interval(CmpRel rel, int64_t c, int64_t& lo, int64_t& hi) {
    switch (rel) {
    case CmpRel::Eq: lo = c; hi = c; return true;
    case CmpRel::Lt: lo = kMin; hi = c - 1; return true;
    case CmpRel::Le: lo = kMin; hi = c; return true;
    case CmpRel::Gt: lo = c + 1; hi = kMax; return true;
    case CmpRel::Ge: lo = c; hi = kMax; return true;
    case CmpRel::Ne: return false;
    }
    return false;
}

CmpRel flip_rel(CmpRel rel) {
    switch (rel) {
    case CmpRel::Eq: return CmpRel::Eq;
    case CmpRel::Ne: return CmpRel::Ne;
    case CmpRel::Lt: return CmpRel::Gt;
    case CmpRel::Le: return CmpRel::Ge;
    case CmpRel::Gt: return CmpRel::Lt;
    case CmpRel::Ge: return CmpRel::Le;
    }
    return CmpRel::Eq;
}

// Canonical value order within [lo, hi]: ascending absolute value,
// non-negative before negative on ties.
class ValueSeq {
public:
    ValueSeq(int64_t lo, int64_t hi) : lo_(lo), hi_(hi) {
        if (lo_ > hi_)
            exhausted_ = true;
        else if (lo_ > 0)
            next_ = lo_;
        else if (hi_ < 0)
            next_ = hi_;
        else
            next_ = 0;
    }

    bool done() const { return exhausted_; }
    int32_t value() const { return static_cast<int32_t>(next_); }

    void advance() {
        if (exhausted_)
            return;
        if (lo_ > 0 || hi_ < 0) {
            // One-sided interval: walk away from zero.
            next_ += (lo_ > 0) ? 1 : -1;
            if (next_ < lo_ || next_ > hi_)
                exhausted_ = true;
            return;
        }
        // Zero-straddling: 0, 1, -1, 2, -2, ... clipped to the interval.
        int64_t cur = next_;
        for (;;) {
            cur = (cur > 0) ? -cur : -cur + 1;
            if (cur >= lo_ && cur <= hi_) {
                next_ = cur;
                return;
            }
            if ((cur > hi_ && -cur < lo_) || (cur < lo_ && -cur + 1 > hi_)) {
                exhausted_ = true;
                return;
            }
        }
    }

private:
    int64_t lo_, hi_, next_ = 0;
    bool exhausted_ = false;
};

struct Query {
    const TermArena& arena;
    std::vector<TermId> conjuncts;
    std::vector<InputId> inputs;                 // ascending
    std::vector<Interval> intervals;             // parallel to inputs
    std::vector<std::vector<size_t>> conjunct_inputs; // positions into `inputs`
    uint64_t budget;
    bool trivially_unsat = false;

    Query(const TermArena& a, std::span<const TermId> cs, std::span<const InputId> extra,
          uint64_t budget_in)
        : arena(a), budget(budget_in) {
        std::vector<InputId> ids(extra.begin(), extra.end());
        std::vector<InputId> tmp;
        for (TermId c : cs) {
            // Constant conjuncts resolve immediately.
            if (arena.is_constant(c)) {
                if (arena.constant_value(c) == 0)
                    trivially_unsat = true;
                continue;
            }
            conjuncts.push_back(c);
            tmp.clear();
            arena.collect_inputs(c, tmp);
            ids.insert(ids.end(), tmp.begin(), tmp.end());
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        inputs = std::move(ids);
        intervals.assign(inputs.size(), Interval{});

        conjunct_inputs.resize(conjuncts.size());
        for (size_t ci = 0; ci < conjuncts.size(); ++ci) {
            tmp.clear();
            arena.collect_inputs(conjuncts[ci], tmp);
            for (InputId id : tmp) {
                auto it = std::lower_bound(inputs.begin(), inputs.end(), id);
                conjunct_inputs[ci].push_back(static_cast<size_t>(it - inputs.begin()));
            }
        }
    }

    size_t position_of(InputId id) const {
        auto it = std::lower_bound(inputs.begin(), inputs.end(), id);
        return static_cast<size_t>(it - inputs.begin());
    }

    // Narrows the interval of the single input of conjunct ci, when the
    // conjunct has an invertible "expr(x) REL const" shape. Inversion of
    // arithmetic applies only when the current interval rules out wrapping,
    // so every refinement over-approximates the solution set (UNSAT by empty
    // interval stays sound).
    bool refine_one(size_t ci) {
        if (conjunct_inputs[ci].size() != 1)
            return false;
        const TermNode& n = arena.node(conjuncts[ci]);
        if (n.kind != TermKind::Compare)
            return false;
        TermId expr;
        int64_t c;
        CmpRel rel = static_cast<CmpRel>(n.opcode);
        if (arena.is_constant(n.rhs)) {
            expr = n.lhs;
            c = arena.constant_value(n.rhs);
        } else if (arena.is_constant(n.lhs)) {
            expr = n.rhs;
            c = arena.constant_value(n.lhs);
            rel = flip_rel(rel);
        } else {
            return false;
        }

        size_t pos = conjunct_inputs[ci][0];
        Interval& iv = intervals[pos];
        const TermNode& e = arena.node(expr);

        auto apply_y = [&](int64_t scale_num, bool negate, int64_t offset) {
            // expr = scale_num * x + offset when !negate, offset - x when negate
            // (negate implies scale_num == 1). Requires no wrapping over iv.
            int64_t ylo, yhi;
            if (!rel_interval(rel, c, ylo, yhi))
                return false;
            int64_t xlo, xhi;
            if (negate) {
                xlo = offset - yhi;
                xhi = offset - ylo;
            } else if (scale_num == 1) {
                xlo = ylo - offset;
                xhi = yhi - offset;
            } else {
                int64_t alo = ylo - offset, ahi = yhi - offset;
                if (scale_num > 0) {
                    xlo = ceil_div(alo, scale_num);
                    xhi = floor_div(ahi, scale_num);
                } else {
                    xlo = ceil_div(ahi, scale_num);
                    xhi = floor_div(alo, scale_num);
                }
            }
            int64_t before_lo = iv.lo, before_hi = iv.hi;
            iv.intersect(xlo, xhi);
            return iv.lo != before_lo || iv.hi != before_hi;
        };

        if (e.kind == TermKind::Input)
            return apply_y(1, false, 0);

        if (e.kind == TermKind::Binary) {
            const TermNode& l = arena.node(e.lhs);
            const TermNode& r = arena.node(e.rhs);
            BinOp op = static_cast<BinOp>(e.opcode);
            bool x_left = l.kind == TermKind::Input && r.kind == TermKind::Constant;
            bool x_right = r.kind == TermKind::Input && l.kind == TermKind::Constant;
            if (!x_left && !x_right)
                return false;
            int64_t k = x_left ? r.value : l.value;
            // No-wrap precondition over the current interval.
            auto fits = [&](int64_t v) { return v >= kMin && v <= kMax; };
            switch (op) {
            case BinOp::Add:
                if (!fits(iv.lo + k) || !fits(iv.hi + k))
                    return false;
                return apply_y(1, false, k);
            case BinOp::Sub:
                if (x_left) { // x - k
                    if (!fits(iv.lo - k) || !fits(iv.hi - k))
                        return false;
                    return apply_y(1, false, -k);
                }
                // k - x
                if (!fits(k - iv.lo) || !fits(k - iv.hi))
                    return false;
                return apply_y(1, true, k);
            case BinOp::Mul: {
                if (k == 0)
                    return false; // expr is 0; enumeration decides
                if (!fits(iv.lo * k) || !fits(iv.hi * k))
                    return false;
                return apply_y(k, false, 0);
            }
            case BinOp::Sdiv:
                return false;
            }
        }
        return false;
    }

    void refine() {
        for (int pass = 0; pass < 16; ++pass) {
            bool changed = false;
            for (size_t ci = 0; ci < conjuncts.size(); ++ci)
                changed = refine_one(ci) || changed;
            if (!changed)
                break;
        }
    }

    bool any_empty() const {
        for (const Interval& iv : intervals)
            if (iv.empty())
                return true;
        return false;
    }

    // Depth-first search over `order` (positions into `inputs`). Evaluates a
    // conjunct as soon as all of its inputs are assigned. Returns Sat/Unsat,
    // or Unknown when the budget runs out.
    SatResult search(const std::vector<size_t>& order, std::vector<int32_t>& assignment) {
        size_t m = order.size();
        // trigger[d] = conjuncts fully determined once order[0..d] assigned.
        std::vector<std::vector<size_t>> trigger(m);
        std::vector<size_t> depth_of(inputs.size(), 0);
        for (size_t d = 0; d < m; ++d)
            depth_of[order[d]] = d;
        std::vector<size_t> immediate; // conjuncts with no inputs at all
        for (size_t ci = 0; ci < conjuncts.size(); ++ci) {
            size_t dmax = 0;
            bool any = false;
            for (size_t pos : conjunct_inputs[ci]) {
                dmax = std::max(dmax, depth_of[pos]);
                any = true;
            }
            if (any)
                trigger[dmax].push_back(ci);
            else
                immediate.push_back(ci);
        }

        size_t max_id = inputs.empty() ? 0 : inputs.back();
        std::vector<int32_t> values(max_id + 1, 0);

        auto holds = [&](size_t ci) { return arena.eval(conjuncts[ci], values) != 0; };
        for (size_t ci : immediate)
            if (!holds(ci))
                return SatResult::Unsat;
        if (m == 0) {
            assignment.assign(inputs.size(), 0);
            return SatResult::Sat;
        }

        std::vector<ValueSeq> seqs;
        seqs.reserve(m);
        std::vector<int32_t> chosen(inputs.size(), 0);
        size_t d = 0;
        seqs.emplace_back(intervals[order[0]].lo, intervals[order[0]].hi);
        for (;;) {
            ValueSeq& seq = seqs.back();
            if (seq.done()) {
                // Backtrack.
                if (d == 0)
                    return SatResult::Unsat;
                seqs.pop_back();
                --d;
                seqs.back().advance();
                continue;
            }
            if (budget == 0)
                return SatResult::Unknown;
            --budget;

            size_t pos = order[d];
            chosen[pos] = seq.value();
            values[inputs[pos]] = seq.value();
            bool ok = true;
            for (size_t ci : trigger[d])
                if (!holds(ci)) {
                    ok = false;
                    break;
                }
            if (!ok) {
                seq.advance();
                continue;
            }
            if (d + 1 == m) {
                assignment = chosen;
                return SatResult::Sat;
            }
            ++d;
            seqs.emplace_back(intervals[order[d]].lo, intervals[order[d]].hi);
        }
    }
};

} // namespace

SolveOutcome Solver::check_sat(std::span<const TermId> conjuncts) const {
    ++stats_.queries;
    Query q(*arena_, conjuncts, {}, budget_);
    if (q.trivially_unsat) {
        ++stats_.unsat;
        return {SatResult::Unsat, {}};
    }
    q.refine();
    if (q.any_empty()) {
        ++stats_.unsat;
        return {SatResult::Unsat, {}};
    }

    // Feasibility first: inputs ordered by interval size, then id.
    std::vector<size_t> order(q.inputs.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return q.intervals[a].size() < q.intervals[b].size();
    });
    std::vector<int32_t> found;
    SatResult status = q.search(order, found);
    if (status != SatResult::Sat) {
        ++(status == SatResult::Unsat ? stats_.unsat : stats_.unknown);
        return {status, {}};
    }

    // Canonicalize: a declaration-ordered search finds, per input in order,
    // the smallest candidate admitting a completion.
    std::vector<size_t> decl_order(q.inputs.size());
    for (size_t i = 0; i < decl_order.size(); ++i)
        decl_order[i] = i;
    std::vector<int32_t> canonical;
    if (q.search(decl_order, canonical) != SatResult::Sat)
        canonical = found; // budget ran out while canonicalizing

    Model model;
    std::vector<int32_t> dense;
    size_t max_id = q.inputs.empty() ? 0 : q.inputs.back();
    dense.assign(max_id + 1, 0);
    for (size_t i = 0; i < q.inputs.size(); ++i) {
        model.values.push_back({q.inputs[i], canonical[i]});
        dense[q.inputs[i]] = canonical[i];
    }
    for (TermId c : conjuncts)
        if (arena_->eval(c, dense) == 0)
            throw std::logic_error("solver returned a model that does not satisfy the conjuncts");
    ++stats_.sat;
    return {SatResult::Sat, std::move(model)};
}

std::optional<Model> Solver::canonical_model(std::span<const TermId> conjuncts,
                                             std::span<const InputId> inputs) const {
    ++stats_.queries;
    Query q(*arena_, conjuncts, inputs, budget_);
    if (q.trivially_unsat) {
        ++stats_.unsat;
        return std::nullopt;
    }
    q.refine();
    if (q.any_empty()) {
        ++stats_.unsat;
        return std::nullopt;
    }
    std::vector<size_t> order(q.inputs.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::vector<int32_t> canonical;
    SatResult status = q.search(order, canonical);
    if (status != SatResult::Sat) {
        ++(status == SatResult::Unsat ? stats_.unsat : stats_.unknown);
        return std::nullopt;
    }
    Model model;
    std::vector<int32_t> dense(q.inputs.empty() ? 1 : q.inputs.back() + 1, 0);
    for (size_t i = 0; i < q.inputs.size(); ++i) {
        model.values.push_back({q.inputs[i], canonical[i]});
        dense[q.inputs[i]] = canonical[i];
    }
    for (TermId c : conjuncts)
        if (arena_->eval(c, dense) == 0)
            throw std::logic_error("canonical model does not satisfy the conjuncts");
    ++stats_.sat;
    return model;
}

} // namespace minisym
