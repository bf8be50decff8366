#include "minisym/ir.hpp"

#include <cctype>
#include <sstream>

namespace minisym {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_ident(const std::string& s) {
    if (s.empty() || !is_ident_start(s[0]))
        return false;
    for (char c : s)
        if (!is_ident_char(c))
            return false;
    return true;
}

bool parse_int32(const std::string& s, int32_t& out) {
    if (s.empty())
        return false;
    size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size())
        return false;
    for (size_t j = i; j < s.size(); ++j)
        if (!std::isdigit(static_cast<unsigned char>(s[j])))
            return false;
    errno = 0;
    long long v = std::stoll(s);
    if (v < INT32_MIN || v > INT32_MAX)
        return false;
    out = static_cast<int32_t>(v);
    return true;
}

std::string strip(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            parts.push_back(strip(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    std::string last = strip(cur);
    if (!last.empty() || !parts.empty())
        parts.push_back(last);
    return parts;
}

struct Parser {
    std::vector<Diagnostic> diags;

    void error(uint32_t line, std::string msg) { diags.push_back({line, std::move(msg)}); }

    bool operand(const std::string& tok, uint32_t line, Operand& out) {
        if (tok.empty()) {
            error(line, "empty operand");
            return false;
        }
        if (is_ident(tok)) {
            out = Operand::ident(tok);
            return true;
        }
        int32_t v;
        if (parse_int32(tok, v)) {
            out = Operand::literal(v);
            return true;
        }
        error(line, "malformed operand '" + tok + "'");
        return false;
    }

    bool ident_operand(const std::string& tok, uint32_t line, const char* what, Operand& out) {
        if (!is_ident(tok)) {
            error(line, std::string("expected identifier for ") + what + ", got '" + tok + "'");
            return false;
        }
        out = Operand::ident(tok);
        return true;
    }

    bool literal_arg(const std::string& tok, uint32_t line, const char* what, int32_t& out) {
        if (!parse_int32(tok, out)) {
            error(line, std::string("expected integer literal for ") + what + ", got '" + tok + "'");
            return false;
        }
        return true;
    }

    std::optional<Instruction> instruction(const std::string& text, uint32_t line) {
        size_t sp = text.find_first_of(" \t");
        std::string opcode = sp == std::string::npos ? text : text.substr(0, sp);
        std::string rest = sp == std::string::npos ? "" : strip(text.substr(sp));
        std::vector<std::string> ops = rest.empty() ? std::vector<std::string>{} : split_commas(rest);

        Instruction ins;
        ins.line = line;
        auto want = [&](size_t n) {
            if (ops.size() != n) {
                error(line, "'" + opcode + "' expects " + std::to_string(n) + " operand(s), got " +
                                std::to_string(ops.size()));
                return false;
            }
            return true;
        };

        if (opcode == "sym") {
            ins.op = Opcode::Sym;
            if (!want(1) || !is_ident(ops[0])) {
                if (ops.size() == 1 && !is_ident(ops[0]))
                    error(line, "sym destination must be an identifier");
                return std::nullopt;
            }
            ins.dst = ops[0];
        } else if (opcode == "const") {
            ins.op = Opcode::Const;
            if (!want(2))
                return std::nullopt;
            ins.dst = ops[0];
            if (!literal_arg(ops[1], line, "const", ins.literal))
                return std::nullopt;
        } else if (opcode == "binop") {
            ins.op = Opcode::Binop;
            if (!want(4))
                return std::nullopt;
            ins.dst = ops[0];
            if (ops[1] == "add") ins.binop = BinOp::Add;
            else if (ops[1] == "sub") ins.binop = BinOp::Sub;
            else if (ops[1] == "mul") ins.binop = BinOp::Mul;
            else if (ops[1] == "sdiv") ins.binop = BinOp::Sdiv;
            else {
                error(line, "unknown binop '" + ops[1] + "'");
                return std::nullopt;
            }
            if (!operand(ops[2], line, ins.a) || !operand(ops[3], line, ins.b))
                return std::nullopt;
        } else if (opcode == "cmp") {
            ins.op = Opcode::Cmp;
            if (!want(4))
                return std::nullopt;
            ins.dst = ops[0];
            if (ops[1] == "eq") ins.rel = CmpRel::Eq;
            else if (ops[1] == "ne") ins.rel = CmpRel::Ne;
            else if (ops[1] == "lt") ins.rel = CmpRel::Lt;
            else if (ops[1] == "le") ins.rel = CmpRel::Le;
            else if (ops[1] == "gt") ins.rel = CmpRel::Gt;
            else if (ops[1] == "ge") ins.rel = CmpRel::Ge;
            else {
                error(line, "unknown comparison '" + ops[1] + "'");
                return std::nullopt;
            }
            if (!operand(ops[2], line, ins.a) || !operand(ops[3], line, ins.b))
                return std::nullopt;
        } else if (opcode == "alloc") {
            ins.op = Opcode::Alloc;
            if (!want(2))
                return std::nullopt;
            ins.dst = ops[0];
            if (!literal_arg(ops[1], line, "alloc size", ins.literal))
                return std::nullopt;
        } else if (opcode == "gep") {
            ins.op = Opcode::Gep;
            if (!want(3))
                return std::nullopt;
            ins.dst = ops[0];
            if (!ident_operand(ops[1], line, "gep pointer", ins.a) || !operand(ops[2], line, ins.b))
                return std::nullopt;
        } else if (opcode == "cast") {
            ins.op = Opcode::Cast;
            if (!want(2))
                return std::nullopt;
            ins.dst = ops[0];
            if (!ident_operand(ops[1], line, "cast pointer", ins.a))
                return std::nullopt;
        } else if (opcode == "load") {
            ins.op = Opcode::Load;
            if (!want(2))
                return std::nullopt;
            ins.dst = ops[0];
            if (!ident_operand(ops[1], line, "load pointer", ins.a))
                return std::nullopt;
        } else if (opcode == "store") {
            ins.op = Opcode::Store;
            if (!want(2))
                return std::nullopt;
            if (!ident_operand(ops[0], line, "store pointer", ins.a) || !operand(ops[1], line, ins.b))
                return std::nullopt;
        } else if (opcode == "br") {
            ins.op = Opcode::Br;
            if (!want(3))
                return std::nullopt;
            if (!operand(ops[0], line, ins.a))
                return std::nullopt;
            ins.target_true = ops[1];
            ins.target_false = ops[2];
        } else if (opcode == "jmp") {
            ins.op = Opcode::Jmp;
            if (!want(1))
                return std::nullopt;
            ins.target_true = ops[0];
        } else if (opcode == "call") {
            ins.op = Opcode::Call;
            if (ops.size() < 2) {
                error(line, "'call' expects at least destination and function name");
                return std::nullopt;
            }
            ins.dst = ops[0];
            ins.callee = ops[1];
            for (size_t i = 2; i < ops.size(); ++i) {
                Operand o;
                if (!operand(ops[i], line, o))
                    return std::nullopt;
                ins.args.push_back(o);
            }
        } else if (opcode == "ret") {
            ins.op = Opcode::Ret;
            if (!want(1) || !operand(ops[0], line, ins.a))
                return std::nullopt;
        } else if (opcode == "abort") {
            ins.op = Opcode::Abort;
            if (!want(0))
                return std::nullopt;
        } else if (opcode == "exit") {
            ins.op = Opcode::Exit;
            if (!want(0))
                return std::nullopt;
        } else {
            error(line, "unknown opcode '" + opcode + "'");
            return std::nullopt;
        }

        if (!ins.dst.empty() && !is_ident(ins.dst)) {
            error(line, "destination '" + ins.dst + "' is not an identifier");
            return std::nullopt;
        }
        return ins;
    }
};

} // namespace

ParseResult parse_program(const std::string& text) {
    Parser p;
    Program prog;
    Function* cur_fn = nullptr;
    BasicBlock* cur_block = nullptr;

    std::istringstream in(text);
    std::string raw;
    uint32_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        size_t hash = raw.find('#');
        if (hash != std::string::npos)
            raw = raw.substr(0, hash);
        std::string line = strip(raw);
        if (line.empty())
            continue;

        if (line.rfind("func", 0) == 0 && line.size() > 4 &&
            (line[4] == ' ' || line[4] == '\t')) {
            if (cur_fn != nullptr) {
                p.error(lineno, "nested 'func' (missing '}'?)");
                continue;
            }
            size_t open = line.find('(');
            size_t close = line.find(')');
            size_t brace = line.find('{');
            if (open == std::string::npos || close == std::string::npos ||
                brace == std::string::npos || close < open || brace < close) {
                p.error(lineno, "malformed function header");
                continue;
            }
            std::string name = strip(line.substr(5, open - 5));
            if (!is_ident(name)) {
                p.error(lineno, "bad function name '" + name + "'");
                continue;
            }
            if (prog.function_index.count(name)) {
                p.error(lineno, "duplicate function '" + name + "'");
                continue;
            }
            Function fn;
            fn.name = name;
            std::string params = strip(line.substr(open + 1, close - open - 1));
            if (!params.empty()) {
                for (const std::string& param : split_commas(params)) {
                    if (!is_ident(param)) {
                        p.error(lineno, "bad parameter '" + param + "'");
                    } else {
                        fn.params.push_back(param);
                    }
                }
            }
            prog.function_index[name] = static_cast<uint32_t>(prog.functions.size());
            prog.functions.push_back(std::move(fn));
            cur_fn = &prog.functions.back();
            cur_block = nullptr;
            continue;
        }

        if (line == "}") {
            if (cur_fn == nullptr) {
                p.error(lineno, "'}' outside of a function");
                continue;
            }
            if (cur_fn->blocks.empty())
                p.error(lineno, "function '" + cur_fn->name + "' has no blocks");
            cur_fn = nullptr;
            cur_block = nullptr;
            continue;
        }

        if (cur_fn == nullptr) {
            p.error(lineno, "statement outside of a function");
            continue;
        }

        if (line.back() == ':') {
            std::string label = strip(line.substr(0, line.size() - 1));
            if (!is_ident(label)) {
                p.error(lineno, "bad block label '" + label + "'");
                continue;
            }
            if (cur_fn->block_index.count(label)) {
                p.error(lineno, "duplicate label '" + label + "' in function '" + cur_fn->name + "'");
                continue;
            }
            cur_fn->block_index[label] = static_cast<uint32_t>(cur_fn->blocks.size());
            cur_fn->blocks.push_back(BasicBlock{label, {}});
            cur_block = &cur_fn->blocks.back();
            continue;
        }

        if (cur_block == nullptr) {
            p.error(lineno, "instruction before the first block label");
            continue;
        }
        if (auto ins = p.instruction(line, lineno))
            cur_block->instructions.push_back(std::move(*ins));
    }

    if (cur_fn != nullptr)
        p.error(lineno, "unterminated function '" + cur_fn->name + "' (missing '}')");
    if (prog.functions.empty())
        p.error(lineno, "no functions defined");

    // Resolve branch targets here so that a bad label is a parse-time
    // diagnostic with the offending line, as callers expect.
    for (const Function& fn : prog.functions) {
        for (const BasicBlock& bb : fn.blocks) {
            for (const Instruction& ins : bb.instructions) {
                if (ins.op == Opcode::Br || ins.op == Opcode::Jmp) {
                    if (!fn.block_index.count(ins.target_true))
                        p.error(ins.line, "unknown label '" + ins.target_true + "'");
                    if (ins.op == Opcode::Br && !fn.block_index.count(ins.target_false))
                        p.error(ins.line, "unknown label '" + ins.target_false + "'");
                }
            }
        }
    }

    if (!p.diags.empty())
        return ParseResult{std::nullopt, std::move(p.diags)};

    auto main_it = prog.function_index.find("main");
    prog.entry = main_it != prog.function_index.end() ? main_it->second : 0u;
    return ParseResult{std::move(prog), {}};
}

const char* binop_name(BinOp op) {
    switch (op) {
    case BinOp::Add: return "add";
    case BinOp::Sub: return "sub";
    case BinOp::Mul: return "mul";
    case BinOp::Sdiv: return "sdiv";
    }
    return "?";
}

const char* cmp_name(CmpRel rel) {
    switch (rel) {
    case CmpRel::Eq: return "eq";
    case CmpRel::Ne: return "ne";
    case CmpRel::Lt: return "lt";
    case CmpRel::Le: return "le";
    case CmpRel::Gt: return "gt";
    case CmpRel::Ge: return "ge";
    }
    return "?";
}

namespace {

std::string operand_text(const Operand& o) {
    return o.is_literal ? std::to_string(o.value) : o.name;
}

} // namespace

std::string print_program(const Program& p) {
    std::ostringstream out;
    bool first_fn = true;
    for (const Function& fn : p.functions) {
        if (!first_fn)
            out << "\n";
        first_fn = false;
        out << "func " << fn.name << "(";
        for (size_t i = 0; i < fn.params.size(); ++i)
            out << (i ? ", " : "") << fn.params[i];
        out << ") {\n";
        for (const BasicBlock& bb : fn.blocks) {
            out << bb.label << ":\n";
            for (const Instruction& ins : bb.instructions) {
                out << "  ";
                switch (ins.op) {
                case Opcode::Sym:
                    out << "sym " << ins.dst;
                    break;
                case Opcode::Const:
                    out << "const " << ins.dst << ", " << ins.literal;
                    break;
                case Opcode::Binop:
                    out << "binop " << ins.dst << ", " << binop_name(ins.binop) << ", "
                        << operand_text(ins.a) << ", " << operand_text(ins.b);
                    break;
                case Opcode::Cmp:
                    out << "cmp " << ins.dst << ", " << cmp_name(ins.rel) << ", "
                        << operand_text(ins.a) << ", " << operand_text(ins.b);
                    break;
                case Opcode::Alloc:
                    out << "alloc " << ins.dst << ", " << ins.literal;
                    break;
                case Opcode::Gep:
                    out << "gep " << ins.dst << ", " << operand_text(ins.a) << ", "
                        << operand_text(ins.b);
                    break;
                case Opcode::Cast:
                    out << "cast " << ins.dst << ", " << operand_text(ins.a);
                    break;
                case Opcode::Load:
                    out << "load " << ins.dst << ", " << operand_text(ins.a);
                    break;
                case Opcode::Store:
                    out << "store " << operand_text(ins.a) << ", " << operand_text(ins.b);
                    break;
                case Opcode::Br:
                    out << "br " << operand_text(ins.a) << ", " << ins.target_true << ", "
                        << ins.target_false;
                    break;
                case Opcode::Jmp:
                    out << "jmp " << ins.target_true;
                    break;
                case Opcode::Call:
                    out << "call " << ins.dst << ", " << ins.callee;
                    for (const Operand& arg : ins.args)
                        out << ", " << operand_text(arg);
                    break;
                case Opcode::Ret:
                    out << "ret " << operand_text(ins.a);
                    break;
                case Opcode::Abort:
                    out << "abort";
                    break;
                case Opcode::Exit:
                    out << "exit";
                    break;
                }
                out << "\n";
            }
        }
        out << "}\n";
    }
    return out.str();
}

std::string format_location(const Program& p, const Location& loc) {
    const Function& fn = p.functions[loc.function];
    return fn.name + ":" + fn.blocks[loc.block].label + ":" + std::to_string(loc.index);
}

std::vector<Diagnostic> validate(const Program& p) {
    std::vector<Diagnostic> diags;
    auto err = [&](uint32_t line, std::string msg) { diags.push_back({line, std::move(msg)}); };

    if (p.functions.empty()) {
        err(0, "program has no functions");
        return diags;
    }
    if (p.entry >= p.functions.size())
        err(0, "entry function index out of range");

    for (const Function& fn : p.functions) {
        if (fn.blocks.empty()) {
            err(0, "function '" + fn.name + "' has no blocks");
            continue;
        }
        for (uint32_t bi = 0; bi < fn.blocks.size(); ++bi) {
            const BasicBlock& bb = fn.blocks[bi];
            if (bb.instructions.empty()) {
                err(0, "block '" + fn.name + ":" + bb.label + "' is empty");
                continue;
            }
            for (uint32_t ii = 0; ii < bb.instructions.size(); ++ii) {
                const Instruction& ins = bb.instructions[ii];
                bool last = ii + 1 == bb.instructions.size();
                if (last && !ins.is_terminator())
                    err(ins.line, "block '" + fn.name + ":" + bb.label + "' does not end with a terminator");
                if (!last && ins.is_terminator())
                    err(ins.line, "terminator in the middle of block '" + fn.name + ":" + bb.label + "'");

                switch (ins.op) {
                case Opcode::Alloc:
                    if (ins.literal < 1)
                        err(ins.line, "alloc size must be >= 1");
                    break;
                case Opcode::Binop:
                    if (ins.binop == BinOp::Sdiv && (!ins.b.is_literal || ins.b.value == 0))
                        err(ins.line, "sdiv divisor must be a nonzero integer literal");
                    break;
                case Opcode::Call: {
                    auto it = p.function_index.find(ins.callee);
                    if (it == p.function_index.end()) {
                        err(ins.line, "call to undefined function '" + ins.callee + "'");
                    } else if (p.functions[it->second].params.size() != ins.args.size()) {
                        err(ins.line, "call to '" + ins.callee + "' passes " +
                                          std::to_string(ins.args.size()) + " argument(s), expected " +
                                          std::to_string(p.functions[it->second].params.size()));
                    }
                    break;
                }
                case Opcode::Br:
                case Opcode::Jmp: {
                    auto check = [&](const std::string& label) {
                        auto it = fn.block_index.find(label);
                        if (it == fn.block_index.end())
                            err(ins.line, "unknown label '" + label + "'");
                        else if (it->second == 0)
                            err(ins.line, "branch targets the entry block '" + label + "'");
                    };
                    check(ins.target_true);
                    if (ins.op == Opcode::Br)
                        check(ins.target_false);
                    break;
                }
                default:
                    break;
                }
            }
        }

        // Every block must be able to reach the function exit; a block that
        // cannot would make post-dominators undefined.
        uint32_t n = static_cast<uint32_t>(fn.blocks.size());
        std::vector<bool> reaches(n + 1, false);
        reaches[n] = true;
        bool changed = true;
        while (changed) {
            changed = false;
            for (uint32_t bi = 0; bi < n; ++bi) {
                if (reaches[bi])
                    continue;
                const Instruction& term = fn.blocks[bi].instructions.empty()
                                              ? Instruction{}
                                              : fn.blocks[bi].instructions.back();
                bool ok = false;
                switch (term.op) {
                case Opcode::Ret:
                case Opcode::Abort:
                case Opcode::Exit:
                    ok = true;
                    break;
                case Opcode::Jmp: {
                    auto it = fn.block_index.find(term.target_true);
                    ok = it != fn.block_index.end() && reaches[it->second];
                    break;
                }
                case Opcode::Br: {
                    auto t = fn.block_index.find(term.target_true);
                    auto f = fn.block_index.find(term.target_false);
                    ok = (t != fn.block_index.end() && reaches[t->second]) ||
                         (f != fn.block_index.end() && reaches[f->second]);
                    break;
                }
                default:
                    break;
                }
                if (ok) {
                    reaches[bi] = true;
                    changed = true;
                }
            }
        }
        for (uint32_t bi = 0; bi < n; ++bi)
            if (!reaches[bi])
                err(0, "block '" + fn.name + ":" + fn.blocks[bi].label + "' is unreachable-from-exit");
    }
    return diags;
}

} // namespace minisym
