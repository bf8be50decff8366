#pragma once

#include "minisym/state.hpp"

#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace minisym {

// One node per ExecutionState ever created; node ids equal state ids. The
// tree mirrors the engine's fork history exactly and is maintained under
// every strategy (the MCTS fields stay zero elsewhere).
struct TreeNode {
    StateId id = 0;
    StateId parent = kNoState;
    int8_t side = -1;                  // 1 = true successor, 0 = false, -1 = root
    StateId child_true = kNoState;
    StateId child_false = kNoState;
    bool in_tree = false;              // monotone; MCTS expansion flag
    bool terminal = false;
    bool exhausted = false;            // terminal, or all children exhausted
    bool state_live = true;            // the state object still exists
    uint32_t visits = 0;               // V(s)
    double reward = 0.0;               // R(s)
    bool has_fork_site = false;
    Location fork_site;                // branch that created this node
    uint32_t exp_score = 0;            // cached expansion score

    bool has_children() const { return child_true != kNoState || child_false != kNoState; }
};

class ExecutionTree {
public:
    StateId init_root() {
        nodes_.clear();
        TreeNode root;
        root.id = 0;
        root.in_tree = true;
        nodes_.push_back(root);
        return 0;
    }

    TreeNode& node(StateId id) { return nodes_[id]; }
    const TreeNode& node(StateId id) const { return nodes_[id]; }
    size_t size() const { return nodes_.size(); }
    const TreeNode& root() const { return nodes_[0]; }

    void add_child(StateId parent, StateId child, bool true_side, const Location& fork_site,
                   uint32_t exp_score) {
        if (child != nodes_.size())
            throw std::logic_error("tree/engine mismatch: child id out of order");
        TreeNode n;
        n.id = child;
        n.parent = parent;
        n.side = true_side ? 1 : 0;
        n.has_fork_site = true;
        n.fork_site = fork_site;
        n.exp_score = exp_score;
        nodes_.push_back(n);
        if (true_side)
            nodes_[parent].child_true = child;
        else
            nodes_[parent].child_false = child;
    }

    void retire_state(StateId id) { nodes_[id].state_live = false; }

    void mark_terminal(StateId id) {
        nodes_[id].terminal = true;
        nodes_[id].state_live = false;
        propagate_exhausted(id);
    }

    void dump(std::ostream& out) const;

private:
    void propagate_exhausted(StateId id) {
        StateId cur = id;
        for (;;) {
            TreeNode& n = nodes_[cur];
            bool ex = n.terminal;
            if (!ex && n.has_children()) {
                ex = true;
                if (n.child_true != kNoState && !nodes_[n.child_true].exhausted)
                    ex = false;
                if (n.child_false != kNoState && !nodes_[n.child_false].exhausted)
                    ex = false;
            }
            if (ex == n.exhausted && cur != id)
                break;
            n.exhausted = ex;
            if (n.parent == kNoState || !ex)
                break;
            cur = n.parent;
        }
    }

    std::vector<TreeNode> nodes_;
};

} // namespace minisym
