#include "evaba/rng.hpp"

#include <algorithm>
#include <set>

namespace evaba {

std::vector<PartyId> sample_distinct(Rng& rng, std::uint32_t range_n, std::uint32_t s) {
  std::set<PartyId> chosen;
  for (std::uint32_t j = range_n - s + 1; j <= range_n; ++j) {
    PartyId t = PartyId(rng.below(j) + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return std::vector<PartyId>(chosen.begin(), chosen.end());
}

}  // namespace evaba
