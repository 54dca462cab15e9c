#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace evaba {

using PartyId = std::uint32_t;  // 1..n
using ViewId = std::uint64_t;   // >= 1
using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

std::string hex(const std::uint8_t* data, std::size_t len);
std::string hex(const Bytes& b);
std::string hex(const Digest& d);
std::string hex_prefix(const Digest& d, std::size_t n = 8);

Bytes to_bytes(std::string_view s);
std::string to_string(const Bytes& b);

}  // namespace evaba
