// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <memory>
#include <set>

#include "setchain/core/codec.hpp"
#include "setchain/core/crypto.hpp"
#include "setchain/core/digest.hpp"
#include "setchain/core/types.hpp"

namespace setchain {

/// An authenticated opaque payload, the unit of insertion.
///
/// Immutable; copies share one representation. The canonical serialization is
///
///   u32 payload_len | payload | u32 author | u32 sig_len | signature
///
/// (all integers big-endian) and the total order on elements is the
/// lexicographic order of those bytes.
class Element {
 public:
  Element(Bytes payload, ProcessId author, Bytes signature);

  /// Builds an element whose signature is produced by `author`'s key.
  static Element sign(const Keyring& keys, ProcessId author, Bytes payload);

  const Bytes& payload() const;
  ProcessId author() const;
  const Bytes& signature() const;

  ByteView canonical_bytes() const;
  std::size_t hash() const;

  void encode(ByteWriter& w) const { w.raw(canonical_bytes()); }
  static Element decode(ByteReader& r);

  bool operator==(const Element& o) const;
  std::strong_ordering operator<=>(const Element& o) const;

 private:
  friend bool valid(const Element& e, const Keyring& keys);

  struct Rep;
  std::shared_ptr<const Rep> rep_;
};

/// True iff the signature verifies over the payload under the author's key.
/// Unknown authors are invalid.
bool valid(const Element& e, const Keyring& keys);

struct ElementHash {
  std::size_t operator()(const Element& e) const noexcept { return e.hash(); }
};

using ElementSet = std::set<Element>;

/// Elements in canonical order, each prefixed with its u32 length.
Bytes canonical_serialization(const ElementSet& elements);

Digest hash_epoch(const ElementSet& elements);

Digest element_digest(const Element& e);

void encode_set(ByteWriter& w, const ElementSet& s);
ElementSet decode_set(ByteReader& r);

}  // namespace setchain
