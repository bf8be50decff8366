#include "minisym/corpus.hpp"

#include "minisym/rng.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace minisym {

namespace {

// Text-level function builder; the generator emits canonical IR directly.
struct FnBuilder {
    std::string name;
    std::vector<std::string> params;
    struct Blk {
        std::string label;
        std::vector<std::string> ins;
        bool closed = false;
    };
    std::vector<Blk> blocks;
    uint32_t vars = 0;
    uint32_t labels = 0;

    explicit FnBuilder(std::string n, std::vector<std::string> p = {})
        : name(std::move(n)), params(std::move(p)) {
        open("entry");
    }

    std::string fresh_var() { return "t" + std::to_string(vars++); }
    std::string fresh_label() { return "b" + std::to_string(labels++); }

    void open(const std::string& label) { blocks.push_back({label, {}, false}); }
    void emit(const std::string& text) { blocks.back().ins.push_back(text); }
    void close(const std::string& terminator) {
        blocks.back().ins.push_back(terminator);
        blocks.back().closed = true;
    }

    std::string text() const {
        std::ostringstream out;
        out << "func " << name << "(";
        for (size_t i = 0; i < params.size(); ++i)
            out << (i ? ", " : "") << params[i];
        out << ") {\n";
        for (const Blk& b : blocks) {
            out << b.label << ":\n";
            for (const std::string& ins : b.ins)
                out << "  " << ins << "\n";
        }
        out << "}\n";
        return out.str();
    }
};

struct Generator {
    Rng rng;
    uint32_t target_blocks;
    double loop_prob;
    std::vector<std::string> inputs;     // symbolic input vars in main
    std::vector<std::pair<std::string, int32_t>> buffers; // (var, size)
    uint32_t helpers_used = 0;
    std::vector<std::string> helper_texts;
    bool planted = false;

    explicit Generator(uint64_t seed, const CorpusSpec& spec)
        : rng(seed), loop_prob(spec.loop_prob) {
        uint32_t lo = std::min(spec.min_blocks, spec.max_blocks);
        uint32_t hi = std::max(spec.min_blocks, spec.max_blocks);
        target_blocks = lo + static_cast<uint32_t>(rng.below(hi - lo + 1));
    }

    std::string input() { return inputs[rng.below(inputs.size())]; }
    const std::pair<std::string, int32_t>& buffer() { return buffers[rng.below(buffers.size())]; }

    std::string rel() {
        static const char* rels[] = {"lt", "gt", "le", "ge"};
        return rels[rng.below(4)];
    }

    // Direct single-input comparison; keeps every branch decidable by the
    // solver's interval pass.
    std::string cond_var(FnBuilder& f) {
        std::string c = f.fresh_var();
        f.emit("cmp " + c + ", " + rel() + ", " + input() + ", " +
               std::to_string(rng.range(-8, 8)));
        return c;
    }

    void arith_filler(FnBuilder& f) {
        std::string a = f.fresh_var();
        static const char* ops[] = {"add", "sub", "mul"};
        f.emit("binop " + a + ", " + ops[rng.below(3)] + ", " + input() + ", " +
               std::to_string(rng.range(1, 9)));
    }

    // In-bounds dereference through a constant-offset gep: an unsafe site
    // that never faults.
    void const_deref(FnBuilder& f) {
        const auto& [buf, size] = buffer();
        std::string q = f.fresh_var();
        f.emit("gep " + q + ", " + buf + ", " + std::to_string(rng.below(size)));
        if (rng.coin()) {
            std::string v = f.fresh_var();
            f.emit("load " + v + ", " + q);
        } else {
            f.emit("store " + q + ", " + std::to_string(rng.range(0, 9)));
        }
    }

    void seg_decoy_branch(FnBuilder& f) {
        std::string c = cond_var(f);
        std::string a = f.fresh_label(), b = f.fresh_label(), j = f.fresh_label();
        f.close("br " + c + ", " + a + ", " + b);
        f.open(a);
        arith_filler(f);
        f.close("jmp " + j);
        f.open(b);
        arith_filler(f);
        f.close("jmp " + j);
        f.open(j);
    }

    void seg_guarded_deref(FnBuilder& f) {
        const auto& [buf, size] = buffer();
        std::string idx = input();
        std::string c1 = f.fresh_var(), c2 = f.fresh_var();
        std::string g1 = f.fresh_label(), g2 = f.fresh_label(), j = f.fresh_label();
        f.emit("cmp " + c1 + ", ge, " + idx + ", 0");
        f.close("br " + c1 + ", " + g1 + ", " + j);
        f.open(g1);
        f.emit("cmp " + c2 + ", lt, " + idx + ", " + std::to_string(size));
        f.close("br " + c2 + ", " + g2 + ", " + j);
        f.open(g2);
        std::string q = f.fresh_var(), v = f.fresh_var();
        f.emit("gep " + q + ", " + buf + ", " + idx);
        f.emit("load " + v + ", " + q);
        f.close("jmp " + j);
        f.open(j);
    }

    void seg_loop(FnBuilder& f) {
        std::string bound_input = input();
        int32_t bound = static_cast<int32_t>(rng.range(3, 7));
        std::string cg1 = f.fresh_var(), cg2 = f.fresh_var(), ctr = f.fresh_var();
        std::string guard = f.fresh_label(), head = f.fresh_label(), body = f.fresh_label(),
                    after = f.fresh_label();
        f.emit("cmp " + cg1 + ", ge, " + bound_input + ", 0");
        f.close("br " + cg1 + ", " + guard + ", " + after);
        f.open(guard);
        f.emit("cmp " + cg2 + ", lt, " + bound_input + ", " + std::to_string(bound));
        f.emit("const " + ctr + ", 0");
        f.close("br " + cg2 + ", " + head + ", " + after);
        f.open(head);
        std::string c = f.fresh_var();
        f.emit("cmp " + c + ", lt, " + ctr + ", " + bound_input);
        f.close("br " + c + ", " + body + ", " + after);
        f.open(body);
        f.emit("binop " + ctr + ", add, " + ctr + ", 1");
        if (rng.coin())
            const_deref(f);
        f.close("jmp " + head);
        f.open(after);
    }

    void seg_cast_chain(FnBuilder& f) {
        const auto& [buf, size] = buffer();
        std::string r = f.fresh_var(), q = f.fresh_var(), v = f.fresh_var();
        f.emit("cast " + r + ", " + buf);
        f.emit("gep " + q + ", " + r + ", " + std::to_string(rng.below(size)));
        f.emit("load " + v + ", " + q);
    }

    void seg_helper_call(FnBuilder& f) {
        std::string helper = "helper" + std::to_string(helpers_used);
        if (helpers_used == helper_texts.size()) {
            FnBuilder h(helper, {"p", "a"});
            std::string c1 = h.fresh_var(), c2 = h.fresh_var();
            h.emit("cmp " + c1 + ", ge, a, 0");
            h.close("br " + c1 + ", g1, out");
            h.open("g1");
            h.emit("cmp " + c2 + ", lt, a, 4"); // every buffer holds >= 4 cells
            h.close("br " + c2 + ", g2, out");
            h.open("g2");
            h.emit("gep q, p, a");
            h.emit("load v, q");
            h.close("jmp out");
            h.open("out");
            h.close("ret a");
            helper_texts.push_back(h.text());
        }
        ++helpers_used;
        std::string r = f.fresh_var();
        f.emit("call " + r + ", " + helper + ", " + buffer().first + ", " + input());
    }

    // A reachable out-of-bounds store behind `depth` nested guards on fresh
    // symbolic inputs. Every level forks both ways, the chain side carries an
    // in-bounds dereference (so guided expansion scores it), and the chain
    // polarity is random per level so no fixed-order traversal can ride it.
    void seg_planted_bug(FnBuilder& f, uint32_t depth) {
        planted = true;
        std::string j = f.fresh_label();
        for (uint32_t level = 0; level < depth; ++level) {
            std::string g = f.fresh_var(), c = f.fresh_var();
            f.emit("sym " + g);
            f.emit("cmp " + c + ", " + rel() + ", " + g + ", " +
                   std::to_string(rng.range(-4, 4)));
            std::string next = f.fresh_label();
            if (rng.coin())
                f.close("br " + c + ", " + next + ", " + j);
            else
                f.close("br " + c + ", " + j + ", " + next);
            f.open(next);
            const_deref(f);
        }
        const auto& [buf, size] = buffer();
        (void)size;
        std::string off = f.fresh_var(), q = f.fresh_var();
        f.emit("sym " + off);
        f.emit("gep " + q + ", " + buf + ", " + off);
        f.emit("store " + q + ", 1");
        f.close("jmp " + j);
        f.open(j);
    }

    // A classic off-by-N overflow: the loop stores through buf[ctr] bounded
    // only by a symbolic count, so the iteration after the last cell faults.
    // Every iteration re-executes covered code, which keeps coverage-guided
    // searches uninterested, while the loop body's unsafe store keeps the
    // continue side's expansion score positive.
    void seg_overflow_loop(FnBuilder& f) {
        planted = true;
        int32_t size = static_cast<int32_t>(rng.range(4, 7));
        std::string buf = f.fresh_var(), n = f.fresh_var(), ctr = f.fresh_var();
        f.emit("alloc " + buf + ", " + std::to_string(size));
        f.emit("sym " + n);
        f.emit("const " + ctr + ", 0");
        std::string head = f.fresh_label(), body = f.fresh_label(), after = f.fresh_label();
        f.close("jmp " + head);
        f.open(head);
        std::string c = f.fresh_var();
        f.emit("cmp " + c + ", lt, " + ctr + ", " + n);
        f.close("br " + c + ", " + body + ", " + after);
        f.open(body);
        std::string q = f.fresh_var();
        f.emit("gep " + q + ", " + buf + ", " + ctr);
        f.emit("store " + q + ", 7");
        f.emit("binop " + ctr + ", add, " + ctr + ", 1");
        f.close("jmp " + head);
        f.open(after);
    }

    std::string build(bool want_bug) {
        FnBuilder f("main");
        uint32_t n_inputs = 2 + static_cast<uint32_t>(rng.below(3));
        for (uint32_t i = 0; i < n_inputs; ++i) {
            std::string x = "x" + std::to_string(i);
            f.emit("sym " + x);
            inputs.push_back(x);
        }
        uint32_t n_buffers = 1 + static_cast<uint32_t>(rng.below(2));
        for (uint32_t i = 0; i < n_buffers; ++i) {
            std::string buf = "buf" + std::to_string(i);
            int32_t size = static_cast<int32_t>(rng.range(4, 12));
            f.emit("alloc " + buf + ", " + std::to_string(size));
            buffers.push_back({buf, size});
        }

        uint32_t bug_count = want_bug ? (rng.unit() < 0.25 ? 2 : 1) : 0;
        // Plant bugs late enough that a breadth-first sweep cannot reach them
        // within a small budget; a fraction stays shallow so every strategy
        // finds something. Kind 0 is a guarded chain, kind 1 an overflow loop.
        std::vector<uint32_t> bug_at, bug_depth, bug_kind;
        for (uint32_t k = 0; k < bug_count; ++k) {
            if (rng.unit() < 0.25) {
                bug_at.push_back(static_cast<uint32_t>(rng.below(2)));
                bug_depth.push_back(1 + static_cast<uint32_t>(rng.below(2)));
                bug_kind.push_back(0);
            } else {
                bug_at.push_back(2 + static_cast<uint32_t>(rng.below(8)));
                bug_depth.push_back(6 + static_cast<uint32_t>(rng.below(9)));
                bug_kind.push_back(rng.unit() < 0.45 ? 1 : 0);
            }
        }

        uint32_t segment = 0;
        while (f.blocks.size() < target_blocks || segment < 8) {
            bool bug_here = false;
            uint32_t depth = 0, kind = 0;
            for (size_t k = 0; k < bug_at.size(); ++k)
                if (bug_at[k] == segment) {
                    bug_here = true;
                    depth = bug_depth[k];
                    kind = bug_kind[k];
                }
            if (bug_here) {
                if (kind == 1)
                    seg_overflow_loop(f);
                else
                    seg_planted_bug(f, depth);
            } else {
                double roll = rng.unit();
                if (roll < loop_prob)
                    seg_loop(f);
                else if (roll < loop_prob + 0.25)
                    seg_guarded_deref(f);
                else if (roll < loop_prob + 0.45)
                    seg_decoy_branch(f);
                else if (roll < loop_prob + 0.55)
                    seg_cast_chain(f);
                else if (roll < loop_prob + 0.65)
                    seg_helper_call(f);
                else
                    seg_decoy_branch(f);
            }
            ++segment;
            if (segment > 64)
                break;
        }
        f.close("exit");

        std::ostringstream out;
        out << f.text();
        for (const std::string& h : helper_texts)
            out << "\n" << h;
        return out.str();
    }
};

uint64_t program_seed(uint64_t corpus_seed, uint32_t index) {
    Rng r(corpus_seed);
    uint64_t s = 0;
    for (uint32_t i = 0; i <= index; ++i)
        s = r.next();
    return s;
}

} // namespace

std::string generate_program_text(const CorpusSpec& spec, uint32_t index, bool* planted_bug) {
    Generator gen(program_seed(spec.seed, index), spec);
    bool want_bug = gen.rng.unit() < spec.bug_prob;
    std::string text = gen.build(want_bug);
    if (planted_bug)
        *planted_bug = gen.planted;
    return text;
}

std::vector<CorpusEntry> generate_corpus(const CorpusSpec& spec, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<CorpusEntry> entries;
    for (uint32_t i = 0; i < spec.program_count; ++i) {
        char name[32];
        snprintf(name, sizeof(name), "program-%03u", i);
        bool planted = false;
        std::string text = generate_program_text(spec, i, &planted);
        std::ofstream out(fs::path(out_dir) / (std::string(name) + ".ir"));
        out << text;
        entries.push_back({name, planted});
    }
    std::ofstream manifest(fs::path(out_dir) / "manifest.csv");
    manifest << "# minisym corpus manifest v1\n";
    manifest << "program,planted_bug\n";
    for (const CorpusEntry& e : entries)
        manifest << e.name << "," << (e.planted_bug ? 1 : 0) << "\n";
    return entries;
}

} // namespace minisym
