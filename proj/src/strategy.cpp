#include "minisym/strategy.hpp"

#include "minisym/mcts.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace minisym {

namespace {

class BfsStrategy : public SearchStrategy {
public:
    std::string_view name() const override { return "bfs"; }
    StateId select(Engine& eng) override {
        StateId best = kNoState;
        uint32_t best_depth = 0;
        for (StateId id : eng.live_states()) {
            uint32_t d = eng.state(id).depth;
            if (best == kNoState || d < best_depth) {
                best = id;
                best_depth = d;
            }
        }
        return best;
    }
};

class DfsStrategy : public SearchStrategy {
public:
    std::string_view name() const override { return "dfs"; }
    StateId select(Engine& eng) override {
        StateId best = kNoState;
        uint32_t best_depth = 0;
        for (StateId id : eng.live_states()) {
            uint32_t d = eng.state(id).depth;
            if (best == kNoState || d >= best_depth) {
                best = id;
                best_depth = d;
            }
        }
        return best;
    }
};

class RandomStrategy : public SearchStrategy {
public:
    explicit RandomStrategy(uint64_t seed) : rng_(seed) {}
    std::string_view name() const override { return "random"; }
    StateId select(Engine& eng) override {
        const auto& live = eng.live_states();
        return live[rng_.below(live.size())];
    }

private:
    Rng rng_;
};

constexpr uint32_t kUnreachable = UINT32_MAX;

// Block-level distances to uncovered code, rebuilt lazily per coverage
// version via a multi-source reverse BFS.
class DistanceCache {
public:
    uint32_t state_distance(Engine& eng, const ExecutionState& s) {
        const Location& pc = s.pc;
        const Function& fn = eng.program().functions[pc.function];
        const BasicBlock& bb = fn.blocks[pc.block];
        for (uint32_t i = pc.index; i < bb.instructions.size(); ++i)
            if (!eng.coverage().is_covered({pc.function, pc.block, i}))
                return 0;
        const std::vector<uint32_t>& dist = block_distances(eng, pc.function);
        const Cfg& cfg = eng.analyses().cfgs[pc.function];
        uint32_t best = kUnreachable;
        for (uint32_t succ : cfg.succ[pc.block]) {
            if (succ == cfg.exit_node() || dist[succ] == kUnreachable)
                continue;
            best = std::min(best, dist[succ] + 1);
        }
        return best;
    }

private:
    const std::vector<uint32_t>& block_distances(Engine& eng, uint32_t function) {
        auto& entry = cache_[function];
        if (entry.version == eng.coverage().version && !entry.dist.empty())
            return entry.dist;
        const Function& fn = eng.program().functions[function];
        const Cfg& cfg = eng.analyses().cfgs[function];
        entry.version = eng.coverage().version;
        entry.dist.assign(cfg.num_nodes(), kUnreachable);
        std::vector<uint32_t> frontier;
        for (uint32_t b = 0; b < cfg.num_blocks; ++b) {
            const BasicBlock& bb = fn.blocks[b];
            for (uint32_t i = 0; i < bb.instructions.size(); ++i) {
                if (!eng.coverage().is_covered({function, b, i})) {
                    entry.dist[b] = 0;
                    frontier.push_back(b);
                    break;
                }
            }
        }
        size_t head = 0;
        while (head < frontier.size()) {
            uint32_t v = frontier[head++];
            for (uint32_t p : cfg.pred[v]) {
                if (entry.dist[p] == kUnreachable) {
                    entry.dist[p] = entry.dist[v] + 1;
                    frontier.push_back(p);
                }
            }
        }
        return entry.dist;
    }

    struct Entry {
        uint64_t version = UINT64_MAX;
        std::vector<uint32_t> dist;
    };
    std::unordered_map<uint32_t, Entry> cache_;
};

class CovnewStrategy : public SearchStrategy {
public:
    std::string_view name() const override { return "covnew"; }
    StateId select(Engine& eng) override {
        StateId best = kNoState;
        uint64_t best_key[2] = {0, 0};
        for (StateId id : eng.live_states()) {
            const ExecutionState& s = eng.state(id);
            uint64_t uncovered_next = eng.coverage().is_covered(s.pc) ? 1 : 0;
            uint64_t dist = cache_.state_distance(eng, s);
            if (best == kNoState || uncovered_next < best_key[0] ||
                (uncovered_next == best_key[0] && dist < best_key[1])) {
                best = id;
                best_key[0] = uncovered_next;
                best_key[1] = dist;
            }
        }
        return best;
    }

private:
    DistanceCache cache_;
};

class Md2uStrategy : public SearchStrategy {
public:
    std::string_view name() const override { return "md2u"; }
    StateId select(Engine& eng) override {
        StateId best = kNoState;
        uint64_t best_dist = 0;
        for (StateId id : eng.live_states()) {
            uint64_t dist = cache_.state_distance(eng, eng.state(id));
            if (best == kNoState || dist < best_dist) {
                best = id;
                best_dist = dist;
            }
        }
        return best;
    }

private:
    DistanceCache cache_;
};

class IcntStrategy : public SearchStrategy {
public:
    std::string_view name() const override { return "icnt"; }
    StateId select(Engine& eng) override {
        StateId best = kNoState;
        uint64_t best_count = 0;
        for (StateId id : eng.live_states()) {
            uint64_t c = eng.state(id).steps_since_new_coverage;
            if (best == kNoState || c < best_count) {
                best = id;
                best_count = c;
            }
        }
        return best;
    }
};

} // namespace

std::vector<std::string> strategy_names() {
    return {"bfs", "dfs", "random", "covnew", "md2u", "icnt", "mcts"};
}

bool is_strategy_name(std::string_view name) {
    for (const std::string& s : strategy_names())
        if (s == name)
            return true;
    return false;
}

std::unique_ptr<SearchStrategy> make_strategy(std::string_view name, uint64_t seed,
                                              const MctsConfig& mcts_config) {
    if (name == "bfs")
        return std::make_unique<BfsStrategy>();
    if (name == "dfs")
        return std::make_unique<DfsStrategy>();
    if (name == "random")
        return std::make_unique<RandomStrategy>(seed);
    if (name == "covnew")
        return std::make_unique<CovnewStrategy>();
    if (name == "md2u")
        return std::make_unique<Md2uStrategy>();
    if (name == "icnt")
        return std::make_unique<IcntStrategy>();
    if (name == "mcts")
        return std::make_unique<MctsStrategy>(seed, mcts_config);
    throw std::invalid_argument("unknown search strategy '" + std::string(name) + "'");
}

} // namespace minisym
