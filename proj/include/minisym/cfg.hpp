#pragma once

#include "minisym/ir.hpp"

#include <vector>

namespace minisym {

// Per-function control flow graph. Real blocks keep their indices from
// Function.blocks; one virtual exit node (index num_blocks) collects the
// ret/abort/exit edges so every function has a unique exit.
struct Cfg {
    uint32_t num_blocks = 0;
    std::vector<std::vector<uint32_t>> succ;   // size num_blocks + 1
    std::vector<std::vector<uint32_t>> pred;

    uint32_t exit_node() const { return num_blocks; }
    uint32_t num_nodes() const { return num_blocks + 1; }
};

Cfg build_cfg(const Function& fn);

} // namespace minisym
