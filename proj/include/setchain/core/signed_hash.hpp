// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "setchain/core/element.hpp"

namespace setchain {

/// A server's signature over the digest of a stamped epoch, carried as an
/// ordinary element. Payload layout:
///
///   "SEH1" | u64 h | digest[32]
///
/// The element's author is the signer and its signature covers the payload.
struct SignedEpochHash {
  EpochNumber h = 0;
  Digest digest{};
  ProcessId signer{};

  Bytes payload() const;
  Element sign(const Keyring& keys) const;

  /// nullopt unless the payload has the signed-hash layout. Does not check the
  /// signature; use valid() on the element for that.
  static std::optional<SignedEpochHash> parse(const Element& e);
};

}  // namespace setchain
