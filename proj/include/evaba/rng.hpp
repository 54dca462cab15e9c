#pragma once

#include <cstdint>
#include <vector>

#include "evaba/types.hpp"

namespace evaba {

/// splitmix64: deterministic across platforms, unlike the standard library
/// distributions. Used for scheduling decisions and coin-toss sampling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Seed from the first 8 bytes of a digest (big-endian).
  static Rng from_digest(const Digest& d) {
    std::uint64_t s = 0;
    for (int i = 0; i < 8; ++i) s = (s << 8) | d[i];
    return Rng(s);
  }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

/// Uniform random s-subset of {1..range_n}, ascending. Floyd's algorithm.
std::vector<PartyId> sample_distinct(Rng& rng, std::uint32_t range_n, std::uint32_t s);

}  // namespace evaba
