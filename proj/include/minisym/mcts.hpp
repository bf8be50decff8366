#pragma once

#include "minisym/strategy.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace minisym {

enum class RewardScope : uint8_t { Playout, RunNew };

inline constexpr uint64_t kInfiniteDegree = UINT64_MAX;

struct MctsConfig {
    double exploration_c = std::sqrt(2.0);      // UCT bias constant
    uint64_t optimization_degree = 700;          // kInfiniteDegree disables stagnation
    uint64_t sim_step_cap = 20000;
    bool guided_expansion = true;                // off: uniform-random expansion
    bool simulation = true;                      // off: expand, backpropagate 0
    bool sim_optimization = true;                // off: always worth simulating
    RewardScope reward_scope = RewardScope::Playout;
};

// Per fork-site simulation bookkeeping. Stagnation is keyed by the static
// branch location: loops create a fresh tree node per iteration at the same
// branch, and that is exactly the case the optimization targets.
struct SiteStats {
    double best_reward = -1.0;   // any first reward (>= 0) improves on this
    uint64_t stagnant = 0;       // simulations since the last strict improvement
    uint64_t total_sims = 0;
};

class StagnationTable {
public:
    const SiteStats& at(const Location& site) const {
        static const SiteStats empty;
        auto it = table_.find(site);
        return it == table_.end() ? empty : it->second;
    }

    void record(const Location& site, double reward) {
        SiteStats& st = table_[site];
        ++st.total_sims;
        if (reward > st.best_reward) {
            st.best_reward = reward;
            st.stagnant = 0;
        } else {
            ++st.stagnant;
        }
    }

    const std::map<Location, SiteStats>& entries() const { return table_; }

private:
    std::map<Location, SiteStats> table_;
};

// Eq-style weighting of the two playout metrics, both at 0.5.
inline double reward_fn(uint32_t n_unsafe, uint32_t n_error) {
    return 0.5 * n_unsafe + 0.5 * n_error;
}

// Upper confidence bound for trees; unvisited children force a first visit.
inline double uct_value(const TreeNode& parent, const TreeNode& child, double c) {
    if (child.visits == 0)
        return std::numeric_limits<double>::infinity();
    double exploit = child.reward / child.visits;
    double explore = c * std::sqrt(2.0 * std::log(static_cast<double>(parent.visits)) /
                                   static_cast<double>(child.visits));
    return exploit + explore;
}

class MctsStrategy : public SearchStrategy {
public:
    MctsStrategy(uint64_t seed, MctsConfig config) : rng_(seed), config_(config) {}

    std::string_view name() const override { return "mcts"; }
    StateId select(Engine& engine) override;

    const StagnationTable& stagnation() const { return stagnation_; }
    const MctsConfig& config() const { return config_; }

    // Exposed for unit tests; select() uses these internally.
    StateId do_selection(const Engine& engine, StateId node) const;
    StateId do_expansion(Engine& engine, StateId node);
    bool is_worth_simulation(const Engine& engine, StateId node) const;
    double do_simulation(Engine& engine, StateId node);
    void backpropagate(Engine& engine, double reward, StateId node);

private:
    Rng rng_;
    MctsConfig config_;
    StagnationTable stagnation_;
    StateId last_selected_ = kNoState;
};

} // namespace minisym
