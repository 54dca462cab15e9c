#pragma once

#include <set>
#include <string>

#include "evaba/sim.hpp"

namespace evaba::harness {

struct Violation {
  std::string rule;
  std::string detail;
};

/// White-box verification of one run's trace against the protocol's safety
/// properties: agreement, external validity, committee/leader agreement,
/// PB-Integrity, PB-Selected, PB-Provability, lock/key coverage, value
/// consistency, cross-view safety, eventual delivery. Returns every
/// violation found (empty = clean run).
std::vector<Violation> verify_run(const sim::Trace& trace, const sim::RunConfig& cfg,
                                  const std::set<PartyId>& byz);

}  // namespace evaba::harness
