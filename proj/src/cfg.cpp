#include "minisym/cfg.hpp"

namespace minisym {

Cfg build_cfg(const Function& fn) {
    Cfg cfg;
    cfg.num_blocks = static_cast<uint32_t>(fn.blocks.size());
    cfg.succ.assign(cfg.num_nodes(), {});
    cfg.pred.assign(cfg.num_nodes(), {});

    auto add_edge = [&](uint32_t from, uint32_t to) {
        cfg.succ[from].push_back(to);
        cfg.pred[to].push_back(from);
    };

    for (uint32_t bi = 0; bi < cfg.num_blocks; ++bi) {
        const Instruction& term = fn.blocks[bi].instructions.back();
        switch (term.op) {
        case Opcode::Br:
            add_edge(bi, fn.block_index.at(term.target_true));
            add_edge(bi, fn.block_index.at(term.target_false));
            break;
        case Opcode::Jmp:
            add_edge(bi, fn.block_index.at(term.target_true));
            break;
        case Opcode::Ret:
        case Opcode::Abort:
        case Opcode::Exit:
            add_edge(bi, cfg.exit_node());
            break;
        default:
            // validate() rejects blocks without a terminator.
            break;
        }
    }
    return cfg;
}

} // namespace minisym
