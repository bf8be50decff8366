#include "minisym/mcts.hpp"

#include <stdexcept>

namespace minisym {

StateId MctsStrategy::do_selection(const Engine& eng, StateId id) const {
    const ExecutionTree& tree = eng.tree();
    const TreeNode& node = tree.node(id);
    auto live_child = [&](StateId c) {
        return c != kNoState && tree.node(c).in_tree && !tree.node(c).exhausted;
    };
    bool t = live_child(node.child_true);
    bool f = live_child(node.child_false);
    if (t && f) {
        double ut = uct_value(node, tree.node(node.child_true), config_.exploration_c);
        double uf = uct_value(node, tree.node(node.child_false), config_.exploration_c);
        return uf > ut ? node.child_false : node.child_true; // tie: true branch
    }
    if (t)
        return node.child_true;
    if (f)
        return node.child_false;
    throw std::logic_error("do_selection on a node without in-tree children");
}

StateId MctsStrategy::do_expansion(Engine& eng, StateId id) {
    ExecutionTree& tree = eng.tree();
    const TreeNode& node = tree.node(id);
    auto eligible = [&](StateId c) { return c != kNoState && !tree.node(c).in_tree; };
    bool t = eligible(node.child_true);
    bool f = eligible(node.child_false);
    StateId chosen;
    if (t && f) {
        if (config_.guided_expansion) {
            uint32_t st = tree.node(node.child_true).exp_score;
            uint32_t sf = tree.node(node.child_false).exp_score;
            chosen = sf > st ? node.child_false : node.child_true; // tie: true branch
        } else {
            chosen = rng_.coin() ? node.child_true : node.child_false;
        }
    } else if (t) {
        chosen = node.child_true;
    } else if (f) {
        chosen = node.child_false;
    } else {
        throw std::logic_error("do_expansion on a node without eligible children");
    }
    tree.node(chosen).in_tree = true;
    return chosen;
}

bool MctsStrategy::is_worth_simulation(const Engine& eng, StateId id) const {
    if (!config_.sim_optimization)
        return true;
    const TreeNode& node = eng.tree().node(id);
    if (!node.has_fork_site)
        return true;
    return stagnation_.at(node.fork_site).stagnant < config_.optimization_degree;
}

double MctsStrategy::do_simulation(Engine& eng, StateId id) {
    const TreeNode& node = eng.tree().node(id);
    SimulationTrace trace = eng.simulate_playout(id, rng_.next(), config_.sim_step_cap);
    uint32_t n_unsafe = config_.reward_scope == RewardScope::Playout
                            ? static_cast<uint32_t>(trace.unsafe_covered.size())
                            : trace.new_sites;
    double reward = reward_fn(n_unsafe, trace.errors_found);
    if (node.has_fork_site)
        stagnation_.record(node.fork_site, reward);
    return reward;
}

void MctsStrategy::backpropagate(Engine& eng, double reward, StateId id) {
    ExecutionTree& tree = eng.tree();
    for (StateId cur = id; cur != kNoState; cur = tree.node(cur).parent) {
        TreeNode& n = tree.node(cur);
        n.reward += reward;
        n.visits += 1;
    }
    eng.note_backprop();
}

StateId MctsStrategy::select(Engine& eng) {
    ExecutionTree& tree = eng.tree();
    if (tree.root().exhausted)
        return kNoState;
    StateId cur = last_selected_ == kNoState ? 0 : last_selected_;
    if (tree.node(cur).terminal || tree.node(cur).exhausted)
        cur = 0;

    for (;;) {
        TreeNode& node = tree.node(cur);
        if (node.terminal || node.exhausted) {
            if (cur == 0)
                return kNoState;
            cur = 0;
            continue;
        }
        if (!node.has_children()) {
            // A live leaf is the state to run next (the root before its first
            // step, or a state paused mid-path).
            if (!node.state_live)
                throw std::logic_error("tree/engine mismatch: childless dead node not terminal");
            last_selected_ = cur;
            return cur;
        }
        bool has_eligible =
            (node.child_true != kNoState && !tree.node(node.child_true).in_tree) ||
            (node.child_false != kNoState && !tree.node(node.child_false).in_tree);
        if (has_eligible) {
            StateId child = do_expansion(eng, cur);
            if (!config_.simulation) {
                backpropagate(eng, 0.0, child);
            } else if (is_worth_simulation(eng, child)) {
                backpropagate(eng, do_simulation(eng, child), child);
            } else {
                // Stagnant site: charge the cached best reward at zero
                // execution cost so visit counts stay consistent.
                const TreeNode& cn = tree.node(child);
                double cached =
                    cn.has_fork_site ? std::max(0.0, stagnation_.at(cn.fork_site).best_reward) : 0.0;
                backpropagate(eng, cached, child);
            }
            last_selected_ = child;
            return child;
        }
        cur = do_selection(eng, cur);
    }
}

} // namespace minisym
