#include "minisym/engine.hpp"

#include <algorithm>
#include <ostream>

namespace minisym {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::OutOfBounds: return "oob";
    case ErrorKind::AbortReached: return "abort";
    }
    return "?";
}

Engine::Engine(const Program& program, const ProgramAnalyses& analyses, EngineConfig config)
    : program_(&program), analyses_(&analyses), config_(config), arena_(),
      solver_(arena_, config.solver_budget) {}

StateId Engine::init_state() {
    auto s = std::make_unique<ExecutionState>();
    s->id = 0;
    s->pc = Location{program_->entry, 0, 0};
    Frame frame;
    frame.function = program_->entry;
    for (const std::string& param : program_->functions[program_->entry].params) {
        InputId iid = static_cast<InputId>(arena_.input_count());
        TermId t = arena_.fresh_input(param);
        s->inputs.push_back({iid, param});
        s->sym_counts[param] = 1;
        frame.locals[param] = RtValue::integer(t);
    }
    s->stack.push_back(std::move(frame));
    states_.push_back(std::move(s));
    live_.push_back(0);
    tree_.init_root();
    return 0;
}

RtValue Engine::eval_operand(ExecutionState& s, const Operand& op) {
    if (op.is_literal)
        return RtValue::integer(arena_.constant(op.value));
    auto it = s.frame().locals.find(op.name);
    if (it == s.frame().locals.end())
        throw EngineError("use of undefined local '" + op.name + "' at " +
                          format_location(*program_, s.pc));
    return it->second;
}

TermId Engine::as_term(ExecutionState& s, const Operand& op, const char* what) {
    RtValue v = eval_operand(s, op);
    if (v.is_pointer())
        throw EngineError(std::string(what) + " received a pointer at " +
                          format_location(*program_, s.pc));
    return v.term;
}

uint32_t Engine::expansion_score(const Location& site, bool true_side) {
    auto key = std::make_pair(site, true_side);
    auto it = exp_score_cache_.find(key);
    if (it != exp_score_cache_.end())
        return it->second;
    const Instruction& br = program_->at(site);
    const Function& fn = program_->functions[site.function];
    uint32_t succ = fn.block_index.at(true_side ? br.target_true : br.target_false);
    const Cfg& cfg = analyses_->cfgs[site.function];
    const PostDomTree& pd = analyses_->postdoms[site.function];
    uint32_t score = exp_score(analyses_->unsafe, site.function,
                               unique_blocks(cfg, pd, site.block, succ));
    exp_score_cache_[key] = score;
    return score;
}

void Engine::cover_unsafe(ExecutionState& s, const Location& site, bool in_playout,
                          SimulationTrace* trace) {
    if (!analyses_->unsafe.contains(site))
        return;
    if (!in_playout) {
        s.covered_unsafe.insert(site);
        unsafe_covered_tree_.insert(site);
    } else {
        bool new_to_run =
            unsafe_covered_tree_.count(site) == 0 && unsafe_covered_playout_.count(site) == 0;
        if (trace->unsafe_covered.insert(site).second && new_to_run)
            ++trace->new_sites;
        unsafe_covered_playout_.insert(site);
    }
}

uint64_t Engine::unsafe_covered_count() const {
    if (config_.coverage_scope == CoverageScope::Tree)
        return unsafe_covered_tree_.size();
    uint64_t extra = 0;
    for (const Location& site : unsafe_covered_playout_)
        if (!unsafe_covered_tree_.count(site))
            ++extra;
    return unsafe_covered_tree_.size() + extra;
}

ErrorRecord Engine::make_error(const Location& site, ErrorKind kind, const Model& model,
                               const ExecutionState& s, bool from_playout) const {
    ErrorRecord rec;
    rec.site = site;
    rec.kind = kind;
    for (const InputDecl& in : s.inputs)
        rec.witness.push_back({in.name, model.value_of(in.id)});
    rec.strategy = strategy_label_;
    rec.selection_index = stats_.selections;
    rec.wall_ms = virtual_ms();
    rec.from_playout = from_playout;
    return rec;
}

void Engine::record_unique(const ErrorRecord& rec) {
    if (!seen_errors_.insert({rec.site, rec.kind}).second)
        return;
    errors_.push_back(rec);
    stats_.unique_errors = errors_.size();
}

namespace {

std::vector<InputId> input_ids(const ExecutionState& s) {
    std::vector<InputId> ids;
    ids.reserve(s.inputs.size());
    for (const InputDecl& in : s.inputs)
        ids.push_back(in.id);
    return ids;
}

std::vector<int32_t> dense_model(const Model& m) {
    size_t max_id = 0;
    for (const auto& [id, v] : m.values)
        max_id = std::max<size_t>(max_id, id);
    std::vector<int32_t> dense(max_id + 1, 0);
    for (const auto& [id, v] : m.values)
        dense[id] = v;
    return dense;
}

} // namespace

Engine::DerefResult Engine::check_deref(ExecutionState& s, const Location& site,
                                        const RtValue& ptr, bool in_playout) {
    const MemoryObject& obj = s.memory.at(ptr.object);
    TermId off = ptr.term;

    if (arena_.is_constant(off)) {
        int32_t v = arena_.constant_value(off);
        if (v < 0 || static_cast<uint32_t>(v) >= obj.size) {
            DerefResult r;
            r.errored = true;
            auto model = solver_.canonical_model(s.path_condition, input_ids(s));
            if (model) {
                r.error = make_error(site, ErrorKind::OutOfBounds, *model, s, in_playout);
                record_unique(*r.error);
            } else {
                ++stats_.solver_unknowns;
            }
            return r;
        }
        DerefResult r;
        r.cell = static_cast<uint32_t>(v);
        return r;
    }

    // The violation query runs in two halves (the path condition is a plain
    // conjunction): offset >= size first, then offset < 0, so the canonical
    // witness of an unconstrained offset lands at `size`.
    std::vector<TermId> query(s.path_condition);
    query.push_back(arena_.compare(CmpRel::Ge, off, arena_.constant(static_cast<int32_t>(obj.size))));
    SolveOutcome high = solver_.check_sat(query);
    if (high.status == SatResult::Unknown)
        ++stats_.solver_unknowns;
    if (high.status != SatResult::Sat) {
        query.back() = arena_.compare(CmpRel::Lt, off, arena_.constant(0));
        SolveOutcome low = solver_.check_sat(query);
        if (low.status == SatResult::Unknown)
            ++stats_.solver_unknowns;
        if (low.status == SatResult::Sat)
            high = low;
    }
    if (high.status == SatResult::Sat) {
        DerefResult r;
        r.errored = true;
        r.error = make_error(site, ErrorKind::OutOfBounds, high.model, s, in_playout);
        record_unique(*r.error);
        return r;
    }

    // No reachable violation: concretize the offset and pin it in the path
    // condition so replays follow the same cell.
    auto model = solver_.canonical_model(s.path_condition, input_ids(s));
    if (!model) {
        DerefResult r;
        r.stuck = true;
        return r;
    }
    std::vector<int32_t> dense = dense_model(*model);
    int32_t v = arena_.eval(off, dense);
    if (v < 0 || static_cast<uint32_t>(v) >= obj.size) {
        // The violation queries came back unknown but the canonical model
        // itself violates the bounds: a genuine witness.
        DerefResult r;
        r.errored = true;
        r.error = make_error(site, ErrorKind::OutOfBounds, *model, s, in_playout);
        record_unique(*r.error);
        return r;
    }
    s.path_condition.push_back(arena_.compare(CmpRel::Eq, off, arena_.constant(v)));
    DerefResult r;
    r.cell = static_cast<uint32_t>(v);
    return r;
}

void Engine::terminate_state(ExecutionState& s, TerminationKind kind,
                             const std::optional<ErrorRecord>& err) {
    if (kind == TerminationKind::Exit || kind == TerminationKind::Error) {
        TestCaseData tc;
        tc.index = static_cast<uint32_t>(test_cases_.size() + 1);
        if (err) {
            // An error state's test case is exactly its witness.
            tc.inputs = err->witness;
            tc.status = std::string("error:") + error_kind_name(err->kind) + "@" +
                        format_location(*program_, err->site);
        } else {
            auto model = solver_.canonical_model(s.path_condition, input_ids(s));
            if (model) {
                for (const InputDecl& in : s.inputs)
                    tc.inputs.push_back({in.name, model->value_of(in.id)});
                tc.status = kind == TerminationKind::Exit ? "exit" : "unverified";
            } else {
                for (const InputDecl& in : s.inputs)
                    tc.inputs.push_back({in.name, 0});
                tc.status = "unverified";
            }
        }
        test_cases_.push_back(std::move(tc));
        stats_.test_cases = test_cases_.size();
    }
    termination_order_.push_back(s.id);
    tree_.mark_terminal(s.id);
    live_.erase(std::remove(live_.begin(), live_.end(), s.id), live_.end());
    states_[s.id].reset();
}

StepOutcome Engine::exec_instruction(ExecutionState& s, bool in_playout, Rng* playout_rng,
                                     SimulationTrace* trace) {
    const Instruction& ins = program_->at(s.pc);
    const Location loc = s.pc;
    StepOutcome out;

    if (!in_playout) {
        ++stats_.instructions;
        bool fresh = coverage_.cover(loc);
        s.steps_since_new_coverage = fresh ? 0 : s.steps_since_new_coverage + 1;
    } else {
        ++stats_.playout_instructions;
    }

    switch (ins.op) {
    case Opcode::Sym: {
        uint32_t& count = s.sym_counts[ins.dst];
        std::string name = count == 0 ? ins.dst : ins.dst + "#" + std::to_string(count + 1);
        ++count;
        InputId iid = static_cast<InputId>(arena_.input_count());
        TermId t = arena_.fresh_input(name);
        s.inputs.push_back({iid, name});
        s.frame().locals[ins.dst] = RtValue::integer(t);
        advance(s);
        break;
    }
    case Opcode::Const:
        s.frame().locals[ins.dst] = RtValue::integer(arena_.constant(ins.literal));
        advance(s);
        break;
    case Opcode::Binop: {
        TermId a = as_term(s, ins.a, "binop");
        TermId b = as_term(s, ins.b, "binop");
        s.frame().locals[ins.dst] = RtValue::integer(arena_.binary(ins.binop, a, b));
        advance(s);
        break;
    }
    case Opcode::Cmp: {
        TermId a = as_term(s, ins.a, "cmp");
        TermId b = as_term(s, ins.b, "cmp");
        s.frame().locals[ins.dst] = RtValue::integer(arena_.compare(ins.rel, a, b));
        advance(s);
        break;
    }
    case Opcode::Alloc: {
        MemoryObject obj;
        obj.id = s.next_object++;
        obj.size = static_cast<uint32_t>(ins.literal);
        obj.cells.assign(obj.size, RtValue::integer(arena_.constant(0)));
        s.frame().locals[ins.dst] = RtValue::pointer(obj.id, arena_.constant(0));
        s.memory.emplace(obj.id, std::move(obj));
        advance(s);
        break;
    }
    case Opcode::Gep: {
        RtValue base = eval_operand(s, ins.a);
        if (!base.is_pointer())
            throw EngineError("gep on a non-pointer at " + format_location(*program_, loc));
        TermId offset = as_term(s, ins.b, "gep offset");
        s.frame().locals[ins.dst] =
            RtValue::pointer(base.object, arena_.binary(BinOp::Add, base.term, offset));
        advance(s);
        break;
    }
    case Opcode::Cast: {
        RtValue v = eval_operand(s, ins.a);
        if (!v.is_pointer())
            throw EngineError("cast on a non-pointer at " + format_location(*program_, loc));
        s.frame().locals[ins.dst] = v;
        advance(s);
        break;
    }
    case Opcode::Load:
    case Opcode::Store: {
        RtValue ptr = eval_operand(s, ins.a);
        if (!ptr.is_pointer())
            throw EngineError("dereference of a non-pointer at " + format_location(*program_, loc));
        cover_unsafe(s, loc, in_playout, trace);
        DerefResult dr = check_deref(s, loc, ptr, in_playout);
        if (dr.stuck) {
            out.kind = StepOutcome::Kind::Terminated;
            out.termination = TerminationKind::Stuck;
            if (!in_playout)
                terminate_state(s, TerminationKind::Stuck, std::nullopt);
            return out;
        }
        if (dr.errored) {
            out.kind = StepOutcome::Kind::Terminated;
            out.termination = TerminationKind::Error;
            out.error = dr.error;
            if (trace)
                ++trace->errors_found;
            if (!in_playout)
                terminate_state(s, TerminationKind::Error, dr.error);
            return out;
        }
        MemoryObject& obj = s.memory.at(ptr.object);
        if (ins.op == Opcode::Load) {
            s.frame().locals[ins.dst] = obj.cells[dr.cell];
        } else {
            obj.cells[dr.cell] = eval_operand(s, ins.b);
        }
        advance(s);
        break;
    }
    case Opcode::Br: {
        TermId cond = as_term(s, ins.a, "br condition");
        const Function& fn = program_->functions[s.pc.function];
        if (arena_.is_constant(cond)) {
            enter_block(s, fn.block_index.at(arena_.constant_value(cond) != 0 ? ins.target_true
                                                                              : ins.target_false));
            break;
        }
        TermId cond_true = cond;
        TermId cond_false = arena_.negate(cond);
        auto feasible = [&](TermId conj) {
            std::vector<TermId> query(s.path_condition);
            query.push_back(conj);
            SolveOutcome r = solver_.check_sat(query);
            if (r.status == SatResult::Unknown)
                ++stats_.solver_unknowns;
            return r.status == SatResult::Sat;
        };
        bool ok_true = feasible(cond_true);
        bool ok_false = feasible(cond_false);

        if (in_playout) {
            // Forking disabled: follow one feasible side, chosen uniformly
            // when both are open.
            if (!ok_true && !ok_false) {
                out.kind = StepOutcome::Kind::Terminated;
                out.termination = TerminationKind::Stuck;
                return out;
            }
            bool take_true = ok_true && (!ok_false || playout_rng->coin());
            s.path_condition.push_back(take_true ? cond_true : cond_false);
            ++s.depth;
            enter_block(s, fn.block_index.at(take_true ? ins.target_true : ins.target_false));
            break;
        }

        out.kind = StepOutcome::Kind::Forked;
        out.fork_site = loc;
        auto spawn = [&](bool true_side, TermId conj, const std::string& target) {
            auto child = std::make_unique<ExecutionState>(s);
            child->id = static_cast<StateId>(states_.size());
            child->depth = s.depth + 1;
            child->path_condition.push_back(conj);
            child->pc.block = fn.block_index.at(target);
            child->pc.index = 0;
            StateId cid = child->id;
            states_.push_back(std::move(child));
            live_.push_back(cid);
            tree_.add_child(s.id, cid, true_side, loc, expansion_score(loc, true_side));
            return cid;
        };
        if (ok_true)
            out.true_child = spawn(true, cond_true, ins.target_true);
        if (ok_false)
            out.false_child = spawn(false, cond_false, ins.target_false);

        // The parent retires; with both sides infeasible the node is a dead
        // end (an over-tight unknown), closed without a test case.
        StateId pid = s.id;
        live_.erase(std::remove(live_.begin(), live_.end(), pid), live_.end());
        if (!ok_true && !ok_false) {
            termination_order_.push_back(pid);
            tree_.mark_terminal(pid);
        } else {
            tree_.retire_state(pid);
        }
        states_[pid].reset();
        return out;
    }
    case Opcode::Jmp:
        enter_block(s, program_->functions[s.pc.function].block_index.at(ins.target_true));
        break;
    case Opcode::Call: {
        uint32_t callee = program_->function_index.at(ins.callee);
        const Function& cf = program_->functions[callee];
        Frame frame;
        frame.function = callee;
        frame.call_site = loc;
        frame.ret_dst = ins.dst;
        for (size_t i = 0; i < ins.args.size(); ++i)
            frame.locals[cf.params[i]] = eval_operand(s, ins.args[i]);
        s.stack.push_back(std::move(frame));
        s.pc = Location{callee, 0, 0};
        break;
    }
    case Opcode::Ret: {
        RtValue v = eval_operand(s, ins.a);
        Frame done = std::move(s.stack.back());
        s.stack.pop_back();
        if (s.stack.empty()) {
            out.kind = StepOutcome::Kind::Terminated;
            out.termination = TerminationKind::Exit;
            if (!in_playout)
                terminate_state(s, TerminationKind::Exit, std::nullopt);
            return out;
        }
        s.frame().locals[done.ret_dst] = v;
        s.pc = done.call_site;
        advance(s);
        break;
    }
    case Opcode::Abort: {
        auto model = solver_.canonical_model(s.path_condition, input_ids(s));
        std::optional<ErrorRecord> rec;
        if (model) {
            rec = make_error(loc, ErrorKind::AbortReached, *model, s, in_playout);
            record_unique(*rec);
        } else {
            ++stats_.solver_unknowns;
        }
        out.kind = StepOutcome::Kind::Terminated;
        out.termination = TerminationKind::Error;
        out.error = rec;
        if (trace)
            ++trace->errors_found;
        if (!in_playout)
            terminate_state(s, TerminationKind::Error, rec);
        return out;
    }
    case Opcode::Exit:
        out.kind = StepOutcome::Kind::Terminated;
        out.termination = TerminationKind::Exit;
        if (!in_playout)
            terminate_state(s, TerminationKind::Exit, std::nullopt);
        return out;
    }
    out.kind = StepOutcome::Kind::Continue;
    return out;
}

StepOutcome Engine::run_until_event(StateId sid, uint64_t quantum) {
    if (!is_live(sid))
        throw EngineError("run_until_event on a dead state");
    uint64_t steps = 0;
    for (;;) {
        ExecutionState& s = *states_[sid];
        if (config_.max_steps && stats_.instructions >= config_.max_steps) {
            StepOutcome out;
            out.kind = StepOutcome::Kind::Terminated;
            out.termination = TerminationKind::StepCapReached;
            out.steps = steps;
            terminate_state(s, TerminationKind::StepCapReached, std::nullopt);
            return out;
        }
        if (quantum && steps >= quantum) {
            StepOutcome out;
            out.kind = StepOutcome::Kind::Continue;
            out.steps = steps;
            return out;
        }
        StepOutcome out = exec_instruction(s, false, nullptr, nullptr);
        ++steps;
        if (out.kind != StepOutcome::Kind::Continue) {
            out.steps = steps;
            return out;
        }
    }
}

SimulationTrace Engine::simulate_playout(StateId sid, uint64_t seed, uint64_t step_cap) {
    if (!is_live(sid))
        throw EngineError("simulate_playout on a dead state");
    ExecutionState clone = *states_[sid];
    Rng rng(seed);
    SimulationTrace trace;
    trace.visited_blocks.push_back({clone.pc.function, clone.pc.block});

    while (trace.steps < step_cap) {
        std::pair<uint32_t, uint32_t> before{clone.pc.function, clone.pc.block};
        StepOutcome out = exec_instruction(clone, true, &rng, &trace);
        ++trace.steps;
        if (out.kind == StepOutcome::Kind::Terminated)
            break;
        std::pair<uint32_t, uint32_t> after{clone.pc.function, clone.pc.block};
        if (after != before)
            trace.visited_blocks.push_back(after);
    }
    return trace;
}

void ExecutionTree::dump(std::ostream& out) const {
    out << "# tree v1\n";
    out << "id,parent,side,V,R,in_tree,terminal\n";
    char buf[64];
    for (const TreeNode& n : nodes_) {
        const char* side = n.side < 0 ? "root" : (n.side == 1 ? "true" : "false");
        snprintf(buf, sizeof(buf), "%.6f", n.reward);
        out << n.id << ",";
        if (n.parent == kNoState)
            out << "-1";
        else
            out << n.parent;
        out << "," << side << "," << n.visits << "," << buf << "," << (n.in_tree ? 1 : 0) << ","
            << (n.terminal ? 1 : 0) << "\n";
    }
}

} // namespace minisym
