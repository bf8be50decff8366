#pragma once

#include "minisym/cfg.hpp"
#include "minisym/ir.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

namespace minisym {

class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ipostdom[n] is the immediate post-dominator of CFG node n; the virtual
// exit maps to itself.
struct PostDomTree {
    std::vector<uint32_t> ipostdom;
};

// Iterative dataflow on the reverse CFG. Throws AnalysisError if some node
// cannot reach the virtual exit.
PostDomTree compute_post_dominators(const Cfg& cfg, const Function* fn = nullptr);

enum class PtrClass : uint8_t { Safe, Seq, Dyn };

const char* ptr_class_name(PtrClass c);

// Classification per pointer definition site. Pointer definitions are the
// instructions that may produce a pointer value: alloc/gep/cast always, and
// load/call destinations when a pointer can flow into them.
struct PointerClassification {
    std::map<Location, PtrClass> kind;

    PtrClass at(const Location& loc) const {
        auto it = kind.find(loc);
        return it == kind.end() ? PtrClass::Safe : it->second;
    }
};

// Flow- and context-insensitive fixpoint: every pointer definition starts
// SAFE; definitions that flow (through copies, call bindings, returns, or
// memory) into a gep become SEQ, into a cast become DYN. DYN wins over SEQ.
PointerClassification classify_pointers(const Program& p);

// Dereference sites (load/store locations) whose pointer operand may carry a
// SEQ or DYN definition.
struct UnsafeSet {
    std::set<Location> sites;

    bool contains(const Location& loc) const { return sites.count(loc) != 0; }
    size_t size() const { return sites.size(); }
};

UnsafeSet unsafe_sites(const Program& p, const PointerClassification& classes);

// Blocks reachable from `successor` without passing through the immediate
// post-dominator of `fork_block`; the post-dominator itself and the virtual
// exit are excluded. `successor` must be a CFG successor of `fork_block`.
std::set<uint32_t> unique_blocks(const Cfg& cfg, const PostDomTree& pd, uint32_t fork_block,
                                 uint32_t successor);

// Number of distinct unsafe sites located in `blocks` of `function`.
uint32_t exp_score(const UnsafeSet& unsafe, uint32_t function, const std::set<uint32_t>& blocks);

// Everything the search layers need, precomputed per program.
struct ProgramAnalyses {
    std::vector<Cfg> cfgs;              // indexed by function
    std::vector<PostDomTree> postdoms;  // indexed by function
    PointerClassification classes;
    UnsafeSet unsafe;

    static ProgramAnalyses analyze(const Program& p);
};

// Text dump used by the `analyze` subcommand: one line per pointer
// definition "<func>:<block>:<index> <SAFE|SEQ|DYN>" followed by
// "UNSAFE <func>:<block>:<index>" lines.
void dump_classification(std::ostream& out, const Program& p, const PointerClassification& classes,
                         const UnsafeSet& unsafe);

} // namespace minisym
