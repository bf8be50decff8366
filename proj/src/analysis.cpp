#include "minisym/analysis.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

namespace minisym {

const char* ptr_class_name(PtrClass c) {
    switch (c) {
    case PtrClass::Safe: return "SAFE";
    case PtrClass::Seq: return "SEQ";
    case PtrClass::Dyn: return "DYN";
    }
    return "?";
}

PostDomTree compute_post_dominators(const Cfg& cfg, const Function* fn) {
    uint32_t n = cfg.num_nodes();
    uint32_t exit = cfg.exit_node();

    // Every node must reach the exit, otherwise its post-dominators are
    // undefined.
    std::vector<bool> reaches(n, false);
    reaches[exit] = true;
    std::deque<uint32_t> work{exit};
    while (!work.empty()) {
        uint32_t v = work.front();
        work.pop_front();
        for (uint32_t p : cfg.pred[v]) {
            if (!reaches[p]) {
                reaches[p] = true;
                work.push_back(p);
            }
        }
    }
    for (uint32_t v = 0; v < n; ++v) {
        if (!reaches[v]) {
            std::string name = fn ? fn->name + ":" + fn->blocks[v].label : std::to_string(v);
            throw AnalysisError("node '" + name + "' cannot reach the function exit");
        }
    }

    // pd[v] = {v} ∪ ⋂ pd[s] over successors s, iterated to fixpoint.
    std::vector<std::vector<bool>> pd(n, std::vector<bool>(n, true));
    pd[exit].assign(n, false);
    pd[exit][exit] = true;

    bool changed = true;
    while (changed) {
        changed = false;
        for (uint32_t v = 0; v < n; ++v) {
            if (v == exit)
                continue;
            std::vector<bool> next(n, true);
            for (uint32_t s : cfg.succ[v])
                for (uint32_t i = 0; i < n; ++i)
                    next[i] = next[i] && pd[s][i];
            next[v] = true;
            if (next != pd[v]) {
                pd[v] = std::move(next);
                changed = true;
            }
        }
    }

    PostDomTree tree;
    tree.ipostdom.assign(n, exit);
    tree.ipostdom[exit] = exit;
    for (uint32_t v = 0; v < n; ++v) {
        if (v == exit)
            continue;
        // The strict post-dominators of v form a chain; the immediate one is
        // the member with the largest post-dominator set.
        uint32_t best = exit;
        size_t best_size = 0;
        for (uint32_t d = 0; d < n; ++d) {
            if (d == v || !pd[v][d])
                continue;
            size_t size = static_cast<size_t>(std::count(pd[d].begin(), pd[d].end(), true));
            if (size > best_size) {
                best_size = size;
                best = d;
            }
        }
        tree.ipostdom[v] = best;
    }
    return tree;
}

namespace {

// Flow graph for the classification fixpoint. Nodes are variable slots,
// pointer definitions, per-alloc-site memory blobs and per-function return
// slots; edges follow value flow, including through memory (Andersen-style,
// flow- and context-insensitive).
struct FlowGraph {
    enum class NodeKind : uint8_t { Var, Def, Obj, Ret };

    struct Node {
        NodeKind kind;
        uint32_t function = 0;  // Var/Ret
        std::string name;       // Var
        Location loc;           // Def (defining instruction) / Obj (alloc site)
        Opcode def_op = Opcode::Exit;
        std::set<uint32_t> pts;           // alloc-site indices
        std::vector<uint32_t> succ;
        std::vector<uint32_t> pred;
    };

    std::vector<Node> nodes;
    std::map<std::pair<uint32_t, std::string>, uint32_t> var_index;
    std::map<Location, uint32_t> def_index;
    std::map<Location, uint32_t> obj_index;   // keyed by alloc site
    std::map<uint32_t, uint32_t> ret_index;
    std::vector<uint32_t> obj_node_of_site;   // alloc-site index -> Obj node

    // Deref uses we must re-examine as points-to sets grow.
    struct LoadUse { uint32_t ptr_var; uint32_t def_node; };
    struct StoreUse { uint32_t ptr_var; uint32_t val_var; };
    std::vector<LoadUse> loads;
    std::vector<StoreUse> stores;

    std::set<std::pair<uint32_t, uint32_t>> edge_set;
    std::deque<uint32_t> worklist;

    uint32_t var(uint32_t fn, const std::string& name) {
        auto key = std::make_pair(fn, name);
        auto it = var_index.find(key);
        if (it != var_index.end())
            return it->second;
        uint32_t id = static_cast<uint32_t>(nodes.size());
        Node node;
        node.kind = NodeKind::Var;
        node.function = fn;
        node.name = name;
        nodes.push_back(std::move(node));
        var_index[key] = id;
        return id;
    }

    uint32_t def(const Location& loc, Opcode op) {
        uint32_t id = static_cast<uint32_t>(nodes.size());
        Node node;
        node.kind = NodeKind::Def;
        node.loc = loc;
        node.def_op = op;
        nodes.push_back(std::move(node));
        def_index[loc] = id;
        return id;
    }

    uint32_t obj(const Location& site) {
        auto it = obj_index.find(site);
        if (it != obj_index.end())
            return it->second;
        uint32_t id = static_cast<uint32_t>(nodes.size());
        Node node;
        node.kind = NodeKind::Obj;
        node.loc = site;
        nodes.push_back(std::move(node));
        obj_index[site] = id;
        obj_node_of_site.push_back(id);
        return id;
    }

    uint32_t ret(uint32_t fn) {
        auto it = ret_index.find(fn);
        if (it != ret_index.end())
            return it->second;
        uint32_t id = static_cast<uint32_t>(nodes.size());
        Node node;
        node.kind = NodeKind::Ret;
        node.function = fn;
        nodes.push_back(std::move(node));
        ret_index[fn] = id;
        return id;
    }

    void edge(uint32_t from, uint32_t to) {
        if (from == to || !edge_set.insert({from, to}).second)
            return;
        nodes[from].succ.push_back(to);
        nodes[to].pred.push_back(from);
        if (!nodes[from].pts.empty())
            worklist.push_back(from);
    }

    void solve() {
        for (uint32_t i = 0; i < nodes.size(); ++i)
            if (!nodes[i].pts.empty())
                worklist.push_back(i);
        while (!worklist.empty()) {
            uint32_t v = worklist.front();
            worklist.pop_front();
            // Memory edges depend on what pointer variables may reference.
            for (const LoadUse& u : loads)
                if (u.ptr_var == v)
                    for (uint32_t site : nodes[v].pts)
                        edge(obj_node_of_site[site], u.def_node);
            for (const StoreUse& u : stores)
                if (u.ptr_var == v)
                    for (uint32_t site : nodes[v].pts)
                        edge(u.val_var, obj_node_of_site[site]);
            for (uint32_t s : nodes[v].succ) {
                size_t before = nodes[s].pts.size();
                nodes[s].pts.insert(nodes[v].pts.begin(), nodes[v].pts.end());
                if (nodes[s].pts.size() != before)
                    worklist.push_back(s);
            }
        }
    }

    std::vector<bool> reverse_closure(const std::vector<uint32_t>& seeds) const {
        std::vector<bool> mark(nodes.size(), false);
        std::deque<uint32_t> work;
        for (uint32_t s : seeds)
            if (!mark[s]) {
                mark[s] = true;
                work.push_back(s);
            }
        while (!work.empty()) {
            uint32_t v = work.front();
            work.pop_front();
            for (uint32_t p : nodes[v].pred)
                if (!mark[p]) {
                    mark[p] = true;
                    work.push_back(p);
                }
        }
        return mark;
    }

    std::vector<bool> forward_closure(const std::vector<uint32_t>& seeds) const {
        std::vector<bool> mark(nodes.size(), false);
        std::deque<uint32_t> work;
        for (uint32_t s : seeds)
            if (!mark[s]) {
                mark[s] = true;
                work.push_back(s);
            }
        while (!work.empty()) {
            uint32_t v = work.front();
            work.pop_front();
            for (uint32_t s : nodes[v].succ)
                if (!mark[s]) {
                    mark[s] = true;
                    work.push_back(s);
                }
        }
        return mark;
    }
};

struct FlowBuild {
    FlowGraph g;
    std::vector<uint32_t> gep_args, cast_args;     // Var nodes
    std::vector<uint32_t> gep_results, cast_results; // Def nodes
    std::vector<std::pair<Location, uint32_t>> deref_sites; // load/store -> ptr Var node

    explicit FlowBuild(const Program& p) {
        uint32_t alloc_sites = 0;
        for (uint32_t fi = 0; fi < p.functions.size(); ++fi) {
            const Function& fn = p.functions[fi];
            for (uint32_t bi = 0; bi < fn.blocks.size(); ++bi) {
                const BasicBlock& bb = fn.blocks[bi];
                for (uint32_t ii = 0; ii < bb.instructions.size(); ++ii) {
                    const Instruction& ins = bb.instructions[ii];
                    Location loc{fi, bi, ii};
                    switch (ins.op) {
                    case Opcode::Alloc: {
                        uint32_t d = g.def(loc, ins.op);
                        uint32_t o = g.obj(loc);
                        (void)o;
                        g.nodes[d].pts.insert(alloc_sites);
                        ++alloc_sites;
                        g.edge(d, g.var(fi, ins.dst));
                        break;
                    }
                    case Opcode::Gep:
                    case Opcode::Cast: {
                        uint32_t d = g.def(loc, ins.op);
                        uint32_t src = g.var(fi, ins.a.name);
                        g.edge(src, d);
                        g.edge(d, g.var(fi, ins.dst));
                        if (ins.op == Opcode::Gep) {
                            gep_args.push_back(src);
                            gep_results.push_back(d);
                        } else {
                            cast_args.push_back(src);
                            cast_results.push_back(d);
                        }
                        break;
                    }
                    case Opcode::Load: {
                        uint32_t d = g.def(loc, ins.op);
                        uint32_t ptr = g.var(fi, ins.a.name);
                        g.loads.push_back({ptr, d});
                        g.edge(d, g.var(fi, ins.dst));
                        deref_sites.push_back({loc, ptr});
                        break;
                    }
                    case Opcode::Store: {
                        uint32_t ptr = g.var(fi, ins.a.name);
                        if (!ins.b.is_literal)
                            g.stores.push_back({ptr, g.var(fi, ins.b.name)});
                        deref_sites.push_back({loc, ptr});
                        break;
                    }
                    case Opcode::Call: {
                        auto it = p.function_index.find(ins.callee);
                        if (it == p.function_index.end())
                            break;
                        uint32_t callee = it->second;
                        const Function& cf = p.functions[callee];
                        for (size_t ai = 0; ai < ins.args.size() && ai < cf.params.size(); ++ai)
                            if (!ins.args[ai].is_literal)
                                g.edge(g.var(fi, ins.args[ai].name), g.var(callee, cf.params[ai]));
                        uint32_t d = g.def(loc, ins.op);
                        g.edge(g.ret(callee), d);
                        g.edge(d, g.var(fi, ins.dst));
                        break;
                    }
                    case Opcode::Ret:
                        if (!ins.a.is_literal)
                            g.edge(g.var(fi, ins.a.name), g.ret(fi));
                        break;
                    default:
                        break;
                    }
                }
            }
        }
        // An alloc site index must resolve even before solve() runs.
        g.solve();
    }
};

} // namespace

PointerClassification classify_pointers(const Program& p) {
    FlowBuild fb(p);
    FlowGraph& g = fb.g;

    std::vector<bool> seq_mark = g.reverse_closure(fb.gep_args);
    std::vector<bool> dyn_mark = g.reverse_closure(fb.cast_args);
    for (uint32_t d : fb.gep_results)
        seq_mark[d] = true;
    for (uint32_t d : fb.cast_results)
        dyn_mark[d] = true;

    PointerClassification out;
    for (const auto& [loc, node] : g.def_index) {
        const FlowGraph::Node& def = g.nodes[node];
        bool always_pointer = def.def_op == Opcode::Alloc || def.def_op == Opcode::Gep ||
                              def.def_op == Opcode::Cast;
        bool carries_pointer = always_pointer || !def.pts.empty() || seq_mark[node] || dyn_mark[node];
        if (!carries_pointer)
            continue;
        PtrClass c = PtrClass::Safe;
        if (seq_mark[node])
            c = PtrClass::Seq;
        if (dyn_mark[node])
            c = PtrClass::Dyn;
        out.kind[loc] = c;
    }
    return out;
}

UnsafeSet unsafe_sites(const Program& p, const PointerClassification& classes) {
    FlowBuild fb(p);
    FlowGraph& g = fb.g;

    std::vector<uint32_t> tainted_defs;
    for (const auto& [loc, c] : classes.kind) {
        if (c == PtrClass::Safe)
            continue;
        auto it = g.def_index.find(loc);
        if (it != g.def_index.end())
            tainted_defs.push_back(it->second);
    }
    std::vector<bool> reach = g.forward_closure(tainted_defs);

    UnsafeSet out;
    for (const auto& [site, ptr_var] : fb.deref_sites)
        if (reach[ptr_var])
            out.sites.insert(site);
    return out;
}

std::set<uint32_t> unique_blocks(const Cfg& cfg, const PostDomTree& pd, uint32_t fork_block,
                                 uint32_t successor) {
    uint32_t stop = pd.ipostdom[fork_block];
    std::set<uint32_t> out;
    if (successor == stop || successor == cfg.exit_node())
        return out;
    std::deque<uint32_t> work{successor};
    out.insert(successor);
    while (!work.empty()) {
        uint32_t v = work.front();
        work.pop_front();
        for (uint32_t s : cfg.succ[v]) {
            if (s == stop || s == cfg.exit_node() || out.count(s))
                continue;
            out.insert(s);
            work.push_back(s);
        }
    }
    return out;
}

uint32_t exp_score(const UnsafeSet& unsafe, uint32_t function, const std::set<uint32_t>& blocks) {
    uint32_t score = 0;
    for (const Location& site : unsafe.sites)
        if (site.function == function && blocks.count(site.block))
            ++score;
    return score;
}

ProgramAnalyses ProgramAnalyses::analyze(const Program& p) {
    ProgramAnalyses out;
    out.cfgs.reserve(p.functions.size());
    out.postdoms.reserve(p.functions.size());
    for (const Function& fn : p.functions) {
        out.cfgs.push_back(build_cfg(fn));
        out.postdoms.push_back(compute_post_dominators(out.cfgs.back(), &fn));
    }
    out.classes = classify_pointers(p);
    out.unsafe = unsafe_sites(p, out.classes);
    return out;
}

void dump_classification(std::ostream& out, const Program& p, const PointerClassification& classes,
                         const UnsafeSet& unsafe) {
    for (const auto& [loc, c] : classes.kind)
        out << format_location(p, loc) << " " << ptr_class_name(c) << "\n";
    for (const Location& site : unsafe.sites)
        out << "UNSAFE " << format_location(p, site) << "\n";
}

} // namespace minisym
