#pragma once

#include <cstdint>
#include <stdexcept>

#include "evaba/types.hpp"

namespace evaba {

struct CodecError : std::runtime_error {
  explicit CodecError(const std::string& what) : std::runtime_error(what) {}
};

/// Canonical wire encoding: one tag byte per object, big-endian fixed-width
/// integers, u32-length-prefixed byte strings, fields in declaration order.
/// Every signable value and every bus message goes through this, so digests
/// are bit-exact across runs.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out_.push_back(std::uint8_t(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out_.push_back(std::uint8_t(v >> (8 * i)));
  }
  void raw(const std::uint8_t* data, std::size_t len) {
    out_.insert(out_.end(), data, data + len);
  }
  void digest(const Digest& d) { raw(d.data(), d.size()); }
  void bytes(const Bytes& b) {
    u32(std::uint32_t(b.size()));
    raw(b.data(), b.size());
  }

  const Bytes& data() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(const Bytes& b) : data_(b.data()), size_(b.size()) {}
  ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
    return v;
  }
  Digest digest() {
    need(32);
    Digest d;
    for (int i = 0; i < 32; ++i) d[i] = data_[pos_++];
    return d;
  }
  Bytes bytes() {
    std::uint32_t len = u32();
    need(len);
    Bytes b(data_ + pos_, data_ + pos_ + len);
    pos_ += len;
    return b;
  }
  bool done() const { return pos_ == size_; }
  void expect_done() const {
    if (!done()) throw CodecError("trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > size_) throw CodecError("short read");
  }
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace evaba
