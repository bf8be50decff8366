#pragma once

#include "minisym/ir.hpp"
#include "minisym/state.hpp"

#include <map>
#include <set>
#include <string>

namespace minisym {

// Concrete interpretation of a program on fixed inputs, used to validate
// error witnesses and test cases. Inputs are looked up by the same dynamic
// occurrence names the engine assigns ("x", "x#2", ...); missing names read
// as 0.
struct ReplayResult {
    enum class Status : uint8_t { Exit, Error, StepCap, Stuck } status = Status::Exit;
    ErrorKind error_kind = ErrorKind::OutOfBounds;
    Location error_site;
    uint64_t steps = 0;

    // Provenance observed during the run: the defining locations of pointer
    // values that actually flowed into gep/cast instructions, and executed
    // dereference sites. Lets tests check the static classification is
    // conservative w.r.t. real executions.
    std::set<Location> gep_origins;
    std::set<Location> cast_origins;
    std::set<Location> executed_derefs;
};

ReplayResult replay_concrete(const Program& p, const std::map<std::string, int32_t>& inputs,
                             uint64_t step_cap = 1'000'000);

// True when the witness of `rec` concretely reaches the same (site, kind).
bool error_replays(const Program& p, const ErrorRecord& rec, uint64_t step_cap = 1'000'000);

} // namespace minisym
