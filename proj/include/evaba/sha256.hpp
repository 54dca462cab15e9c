#pragma once

#include <cstddef>
#include <cstdint>

#include "evaba/types.hpp"

namespace evaba {

/// Incremental SHA-256. The protocol needs nothing stronger than a stable,
/// well-distributed 32-byte digest; this keeps the library dependency-free
/// and bit-identical across platforms.
class Sha256 {
 public:
  Sha256() { reset(); }

  void reset();
  Sha256& update(const std::uint8_t* data, std::size_t len);
  Sha256& update(const Bytes& b) { return update(b.data(), b.size()); }
  Sha256& update(const Digest& d) { return update(d.data(), d.size()); }
  Sha256& update(std::string_view s) {
    return update(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
  }
  Digest finish();

 private:
  void compress(const std::uint8_t* block);

  std::uint32_t state_[8];
  std::uint64_t total_len_;
  std::uint8_t buffer_[64];
  std::size_t buffer_len_;
};

Digest sha256(const std::uint8_t* data, std::size_t len);
Digest sha256(const Bytes& b);

/// HMAC-SHA256 with a 32-byte key. All shares and combined signatures in the
/// dealer-based test scheme are HMAC tags.
Digest hmac_sha256(const Digest& key, const std::uint8_t* data, std::size_t len);
Digest hmac_sha256(const Digest& key, const Bytes& data);

}  // namespace evaba
