// SPDX-License-Identifier: Apache-2.0
#include "setchain/core/signed_hash.hpp"

#include <algorithm>

#include "setchain/core/codec.hpp"

namespace setchain {

namespace {
constexpr std::uint8_t kMagic[4] = {'S', 'E', 'H', '1'};
}

Bytes SignedEpochHash::payload() const {
  ByteWriter w(44);
  w.raw(ByteView(kMagic, 4));
  w.u64(h);
  w.raw(ByteView(digest.data(), digest.size()));
  return std::move(w).take();
}

Element SignedEpochHash::sign(const Keyring& keys) const {
  return Element::sign(keys, signer, payload());
}

std::optional<SignedEpochHash> SignedEpochHash::parse(const Element& e) {
  const Bytes& p = e.payload();
  if (p.size() != 44 || !std::equal(kMagic, kMagic + 4, p.begin())) return std::nullopt;
  ByteReader r(p);
  r.raw(4);
  SignedEpochHash s;
  s.h = r.u64();
  ByteView d = r.raw(32);
  std::copy(d.begin(), d.end(), s.digest.begin());
  s.signer = e.author();
  return s;
}

}  // namespace setchain
