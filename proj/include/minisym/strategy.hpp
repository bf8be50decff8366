#pragma once

#include "minisym/engine.hpp"
#include "minisym/rng.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace minisym {

// State-selection interface. select() is called only while live states
// exist; returning kNoState signals the strategy considers the run complete
// (the MCTS tree can be exhausted independently of the caps).
class SearchStrategy {
public:
    virtual ~SearchStrategy() = default;
    virtual std::string_view name() const = 0;
    virtual StateId select(Engine& engine) = 0;
};

// bfs: minimal depth, ties by smallest id.
// dfs: maximal depth, ties by largest id.
// random: uniform over the worklist under the seeded generator.
// covnew: prefer states whose next instruction is uncovered, ties by minimal
//         CFG distance to uncovered code, then smallest id.
// md2u: minimal CFG distance to an uncovered instruction, ties by id.
// icnt: minimal instructions executed since the state last covered a new
//       instruction, ties by id.
// mcts: unsafe-pointer-guided Monte Carlo tree search (see mcts.hpp).
std::vector<std::string> strategy_names();
bool is_strategy_name(std::string_view name);

struct MctsConfig; // mcts.hpp

std::unique_ptr<SearchStrategy> make_strategy(std::string_view name, uint64_t seed,
                                              const MctsConfig& mcts_config);

} // namespace minisym
