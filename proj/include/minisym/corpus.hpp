#pragma once

#include "minisym/ir.hpp"

#include <string>
#include <vector>

namespace minisym {

struct CorpusSpec {
    uint32_t program_count = 30;
    uint32_t min_blocks = 24;     // per main function, approximate target
    uint32_t max_blocks = 64;
    double loop_prob = 0.2;
    double bug_prob = 0.5;
    uint64_t seed = 0;
};

struct CorpusEntry {
    std::string name;   // file stem, e.g. "program-003"
    bool planted_bug = false;
};

// Emits <name>.ir files plus manifest.csv into out_dir. Same spec and seed
// produce byte-identical output.
std::vector<CorpusEntry> generate_corpus(const CorpusSpec& spec, const std::string& out_dir);

// One generated program as text (used by tests without touching the disk).
std::string generate_program_text(const CorpusSpec& spec, uint32_t index, bool* planted_bug);

} // namespace minisym
