// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "setchain/core/types.hpp"

namespace setchain {

/// SHA-256 output.
using Digest = std::array<std::uint8_t, 32>;

Digest sha256(ByteView data);

std::string to_hex(ByteView data);
inline std::string to_hex(const Digest& d) { return to_hex(ByteView(d.data(), d.size())); }
Bytes from_hex(std::string_view hex);

struct DigestHash {
  std::size_t operator()(const Digest& d) const noexcept {
    std::size_t h = 0;
    for (int i = 0; i < 8; ++i) h = (h << 8) | d[i];
    return h;
  }
};

}  // namespace setchain
