// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>

#include "setchain/core/types.hpp"

namespace setchain {

/// Big-endian byte sink used by every wire format in the project.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(std::size_t reserve) { out_.reserve(reserve); }

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  void u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  void raw(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }
  // u32 length prefix followed by the bytes.
  void blob(ByteView b) {
    u32(static_cast<std::uint32_t>(b.size()));
    raw(b);
  }

  const Bytes& bytes() const& { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  Bytes out_;
};

/// Bounds-checked reader; every failure throws SetchainError(decode_error).
class ByteReader {
 public:
  explicit ByteReader(ByteView in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }
  ByteView raw(std::size_t n) {
    need(n);
    ByteView v = in_.subspan(pos_, n);
    pos_ += n;
    return v;
  }
  ByteView blob(std::size_t max_len = kMaxBlob) {
    std::uint32_t n = u32();
    if (n > max_len) throw SetchainError(Errc::decode_error, "blob too large");
    return raw(n);
  }

  std::size_t remaining() const { return in_.size() - pos_; }
  bool done() const { return pos_ == in_.size(); }
  void expect_done() const {
    if (!done()) throw SetchainError(Errc::decode_error, "trailing bytes");
  }

  static constexpr std::size_t kMaxBlob = 64u << 20;

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw SetchainError(Errc::decode_error, "truncated input");
  }

  ByteView in_;
  std::size_t pos_ = 0;
};

}  // namespace setchain
