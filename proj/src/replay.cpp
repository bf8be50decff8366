#include "minisym/replay.hpp"

#include "minisym/term.hpp"

#include <unordered_map>
#include <vector>

namespace minisym {

namespace {

struct CValue {
    bool is_pointer = false;
    int32_t value = 0;        // int value / pointer offset
    uint32_t object = 0;
    Location origin;          // pointer provenance: alloc/gep/cast that made it
    bool has_origin = false;
};

struct CObject {
    uint32_t size = 0;
    std::vector<CValue> cells;
};

struct CFrame {
    uint32_t function = 0;
    Location call_site;
    std::string ret_dst;
    std::unordered_map<std::string, CValue> locals;
};

} // namespace

ReplayResult replay_concrete(const Program& p, const std::map<std::string, int32_t>& inputs,
                             uint64_t step_cap) {
    ReplayResult res;
    std::vector<CFrame> stack;
    std::map<uint32_t, CObject> memory;
    uint32_t next_object = 0;
    std::map<std::string, uint32_t> sym_counts;

    CFrame entry;
    entry.function = p.entry;
    for (const std::string& param : p.functions[p.entry].params) {
        CValue v;
        auto it = inputs.find(param);
        v.value = it == inputs.end() ? 0 : it->second;
        entry.locals[param] = v;
        sym_counts[param] = 1;
    }
    stack.push_back(std::move(entry));
    Location pc{p.entry, 0, 0};

    auto eval = [&](const Operand& op) -> CValue {
        if (op.is_literal) {
            CValue v;
            v.value = op.value;
            return v;
        }
        auto it = stack.back().locals.find(op.name);
        if (it == stack.back().locals.end()) {
            CValue v; // undefined locals read as 0; the engine rejects these paths
            return v;
        }
        return it->second;
    };

    while (res.steps < step_cap) {
        const Instruction& ins = p.at(pc);
        ++res.steps;
        const Function& fn = p.functions[pc.function];
        switch (ins.op) {
        case Opcode::Sym: {
            uint32_t& count = sym_counts[ins.dst];
            std::string name = count == 0 ? ins.dst : ins.dst + "#" + std::to_string(count + 1);
            ++count;
            CValue v;
            auto it = inputs.find(name);
            v.value = it == inputs.end() ? 0 : it->second;
            stack.back().locals[ins.dst] = v;
            ++pc.index;
            break;
        }
        case Opcode::Const: {
            CValue v;
            v.value = ins.literal;
            stack.back().locals[ins.dst] = v;
            ++pc.index;
            break;
        }
        case Opcode::Binop: {
            CValue v;
            v.value = wrap_binop(ins.binop, eval(ins.a).value, eval(ins.b).value);
            stack.back().locals[ins.dst] = v;
            ++pc.index;
            break;
        }
        case Opcode::Cmp: {
            CValue v;
            v.value = eval_cmp(ins.rel, eval(ins.a).value, eval(ins.b).value);
            stack.back().locals[ins.dst] = v;
            ++pc.index;
            break;
        }
        case Opcode::Alloc: {
            CObject obj;
            obj.size = static_cast<uint32_t>(ins.literal);
            obj.cells.assign(obj.size, CValue{});
            uint32_t id = next_object++;
            memory[id] = std::move(obj);
            CValue v;
            v.is_pointer = true;
            v.object = id;
            v.value = 0;
            v.origin = pc;
            v.has_origin = true;
            stack.back().locals[ins.dst] = v;
            ++pc.index;
            break;
        }
        case Opcode::Gep: {
            CValue base = eval(ins.a);
            if (!base.is_pointer) {
                res.status = ReplayResult::Status::Stuck;
                return res;
            }
            if (base.has_origin)
                res.gep_origins.insert(base.origin);
            CValue v = base;
            v.value = wrap_binop(BinOp::Add, base.value, eval(ins.b).value);
            v.origin = pc;
            v.has_origin = true;
            stack.back().locals[ins.dst] = v;
            ++pc.index;
            break;
        }
        case Opcode::Cast: {
            CValue v = eval(ins.a);
            if (!v.is_pointer) {
                res.status = ReplayResult::Status::Stuck;
                return res;
            }
            if (v.has_origin)
                res.cast_origins.insert(v.origin);
            v.origin = pc;
            v.has_origin = true;
            stack.back().locals[ins.dst] = v;
            ++pc.index;
            break;
        }
        case Opcode::Load:
        case Opcode::Store: {
            CValue ptr = eval(ins.a);
            if (!ptr.is_pointer) {
                res.status = ReplayResult::Status::Stuck;
                return res;
            }
            res.executed_derefs.insert(pc);
            CObject& obj = memory.at(ptr.object);
            if (ptr.value < 0 || static_cast<uint32_t>(ptr.value) >= obj.size) {
                res.status = ReplayResult::Status::Error;
                res.error_kind = ErrorKind::OutOfBounds;
                res.error_site = pc;
                return res;
            }
            if (ins.op == Opcode::Load)
                stack.back().locals[ins.dst] = obj.cells[static_cast<uint32_t>(ptr.value)];
            else
                obj.cells[static_cast<uint32_t>(ptr.value)] = eval(ins.b);
            ++pc.index;
            break;
        }
        case Opcode::Br: {
            CValue cond = eval(ins.a);
            const std::string& target = cond.value != 0 ? ins.target_true : ins.target_false;
            pc.block = fn.block_index.at(target);
            pc.index = 0;
            break;
        }
        case Opcode::Jmp:
            pc.block = fn.block_index.at(ins.target_true);
            pc.index = 0;
            break;
        case Opcode::Call: {
            uint32_t callee = p.function_index.at(ins.callee);
            CFrame frame;
            frame.function = callee;
            frame.call_site = pc;
            frame.ret_dst = ins.dst;
            const Function& cf = p.functions[callee];
            for (size_t i = 0; i < ins.args.size(); ++i)
                frame.locals[cf.params[i]] = eval(ins.args[i]);
            stack.push_back(std::move(frame));
            pc = Location{callee, 0, 0};
            break;
        }
        case Opcode::Ret: {
            CValue v = eval(ins.a);
            CFrame done = std::move(stack.back());
            stack.pop_back();
            if (stack.empty()) {
                res.status = ReplayResult::Status::Exit;
                return res;
            }
            stack.back().locals[done.ret_dst] = v;
            pc = done.call_site;
            ++pc.index;
            break;
        }
        case Opcode::Abort:
            res.status = ReplayResult::Status::Error;
            res.error_kind = ErrorKind::AbortReached;
            res.error_site = pc;
            return res;
        case Opcode::Exit:
            res.status = ReplayResult::Status::Exit;
            return res;
        }
    }
    res.status = ReplayResult::Status::StepCap;
    return res;
}

bool error_replays(const Program& p, const ErrorRecord& rec, uint64_t step_cap) {
    std::map<std::string, int32_t> inputs(rec.witness.begin(), rec.witness.end());
    ReplayResult res = replay_concrete(p, inputs, step_cap);
    return res.status == ReplayResult::Status::Error && res.error_kind == rec.kind &&
           res.error_site == rec.site;
}

} // namespace minisym
