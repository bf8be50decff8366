#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace minisym {

// Position of an instruction: indices into Program.functions, Function.blocks
// and BasicBlock.instructions. Stable across runs for the same source text.
struct Location {
    uint32_t function = 0;
    uint32_t block = 0;
    uint32_t index = 0;

    auto operator<=>(const Location&) const = default;
};

struct LocationHash {
    size_t operator()(const Location& l) const {
        uint64_t v = (uint64_t(l.function) << 42) ^ (uint64_t(l.block) << 21) ^ l.index;
        v ^= v >> 33;
        v *= 0xff51afd7ed558ccdull;
        v ^= v >> 33;
        return static_cast<size_t>(v);
    }
};

enum class Opcode : uint8_t {
    Sym,   // sym dst            -- fresh symbolic 32-bit input
    Const, // const dst, k
    Binop, // binop dst, op, a, b
    Cmp,   // cmp dst, rel, a, b -- yields 0/1
    Alloc, // alloc dst, size    -- new object of `size` cells
    Gep,   // gep dst, ptr, off  -- pointer arithmetic
    Cast,  // cast dst, ptr      -- pointer reinterpretation marker
    Load,  // load dst, ptr
    Store, // store ptr, val
    Br,    // br cond, tlabel, flabel
    Jmp,   // jmp label
    Call,  // call dst, fname, args...
    Ret,   // ret val
    Abort, // abort
    Exit,  // exit
};

enum class BinOp : uint8_t { Add, Sub, Mul, Sdiv };
enum class CmpRel : uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

// An instruction operand: identifier or decimal literal.
struct Operand {
    bool is_literal = false;
    int32_t value = 0;
    std::string name;

    static Operand literal(int32_t v) { return Operand{true, v, {}}; }
    static Operand ident(std::string n) { return Operand{false, 0, std::move(n)}; }
    bool operator==(const Operand&) const = default;
};

struct Instruction {
    Opcode op = Opcode::Exit;
    std::string dst;
    BinOp binop = BinOp::Add;
    CmpRel rel = CmpRel::Eq;
    Operand a;                      // ptr for gep/cast/load/store, cond for br, val for ret
    Operand b;                      // second binop/cmp operand, gep offset, store value
    std::string target_true;        // br true target / jmp target
    std::string target_false;       // br false target
    std::string callee;
    std::vector<Operand> args;
    int32_t literal = 0;            // const value / alloc size
    uint32_t line = 0;              // 1-based line in the source text

    bool is_terminator() const {
        switch (op) {
        case Opcode::Br:
        case Opcode::Jmp:
        case Opcode::Ret:
        case Opcode::Abort:
        case Opcode::Exit:
            return true;
        default:
            return false;
        }
    }
};

struct BasicBlock {
    std::string label;
    std::vector<Instruction> instructions;
};

struct Function {
    std::string name;
    std::vector<std::string> params;
    std::vector<BasicBlock> blocks;        // blocks[0] is the entry block
    std::unordered_map<std::string, uint32_t> block_index;

    const BasicBlock* find_block(const std::string& label) const {
        auto it = block_index.find(label);
        return it == block_index.end() ? nullptr : &blocks[it->second];
    }
};

struct Program {
    std::vector<Function> functions;
    std::unordered_map<std::string, uint32_t> function_index;
    uint32_t entry = 0;   // index of `main` if present, else the first function

    const Function* find_function(const std::string& name) const {
        auto it = function_index.find(name);
        return it == function_index.end() ? nullptr : &functions[it->second];
    }
    const Instruction& at(const Location& loc) const {
        return functions[loc.function].blocks[loc.block].instructions[loc.index];
    }
};

struct Diagnostic {
    uint32_t line = 0;   // 0 when the problem has no single source line
    std::string message;
};

struct ParseResult {
    std::optional<Program> program;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return program.has_value() && diagnostics.empty(); }
};

ParseResult parse_program(const std::string& text);

// Canonical text form; parse(print(p)) is structurally equal to p.
std::string print_program(const Program& p);

// Structural invariant checks. Empty result iff the program is well formed.
std::vector<Diagnostic> validate(const Program& p);

std::string format_location(const Program& p, const Location& loc);

const char* binop_name(BinOp op);
const char* cmp_name(CmpRel rel);

} // namespace minisym
