#include "evaba/types.hpp"

namespace evaba {

static const char* kHexDigits = "0123456789abcdef";

std::string hex(const std::uint8_t* data, std::size_t len) {
  std::string out;
  out.reserve(len * 2);
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back(kHexDigits[data[i] >> 4]);
    out.push_back(kHexDigits[data[i] & 0x0f]);
  }
  return out;
}

std::string hex(const Bytes& b) { return hex(b.data(), b.size()); }

std::string hex(const Digest& d) { return hex(d.data(), d.size()); }

std::string hex_prefix(const Digest& d, std::size_t n) {
  return hex(d.data(), n < d.size() ? n : d.size());
}

Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

std::string to_string(const Bytes& b) {
  return std::string(b.begin(), b.end());
}

}  // namespace evaba
