// SPDX-License-Identifier: Apache-2.0
#include "setchain/core/element.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <string_view>

namespace setchain {

namespace {
constexpr std::size_t kMaxPayload = 1u << 20;
constexpr std::size_t kMaxSignature = 1024;
}  // namespace

struct Element::Rep {
  Bytes payload;
  ProcessId author;
  Bytes signature;
  Bytes canonical;
  std::size_t hash = 0;
  // (keyring instance id << 1) | verdict, 0 when unknown.
  mutable std::atomic<std::uint64_t> verdict{0};
};

Element::Element(Bytes payload, ProcessId author, Bytes signature) {
  auto rep = std::make_shared<Rep>();
  ByteWriter w(payload.size() + signature.size() + 12);
  w.blob(payload);
  w.u32(raw(author));
  w.blob(signature);
  rep->canonical = std::move(w).take();
  rep->hash = std::hash<std::string_view>{}(std::string_view(
      reinterpret_cast<const char*>(rep->canonical.data()), rep->canonical.size()));
  rep->payload = std::move(payload);
  rep->author = author;
  rep->signature = std::move(signature);
  rep_ = std::move(rep);
}

Element Element::sign(const Keyring& keys, ProcessId author, Bytes payload) {
  Bytes sig = keys.sign(author, payload);
  return Element(std::move(payload), author, std::move(sig));
}

const Bytes& Element::payload() const { return rep_->payload; }
ProcessId Element::author() const { return rep_->author; }
const Bytes& Element::signature() const { return rep_->signature; }
ByteView Element::canonical_bytes() const { return rep_->canonical; }
std::size_t Element::hash() const { return rep_->hash; }

Element Element::decode(ByteReader& r) {
  ByteView payload = r.blob(kMaxPayload);
  std::uint32_t author = r.u32();
  ByteView sig = r.blob(kMaxSignature);
  return Element(Bytes(payload.begin(), payload.end()), make_pid(author),
                 Bytes(sig.begin(), sig.end()));
}

bool Element::operator==(const Element& o) const {
  return rep_ == o.rep_ || (rep_->hash == o.rep_->hash && rep_->canonical == o.rep_->canonical);
}

std::strong_ordering Element::operator<=>(const Element& o) const {
  if (rep_ == o.rep_) return std::strong_ordering::equal;
  const Bytes& a = rep_->canonical;
  const Bytes& b = o.rep_->canonical;
  std::size_t n = std::min(a.size(), b.size());
  int c = n == 0 ? 0 : std::memcmp(a.data(), b.data(), n);
  if (c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  return a.size() <=> b.size();
}

bool valid(const Element& e, const Keyring& keys) {
  const std::uint64_t tag = keys.instance_id() << 1;
  std::uint64_t cached = e.rep_->verdict.load(std::memory_order_relaxed);
  if (cached != 0 && (cached & ~std::uint64_t{1}) == tag) return (cached & 1) != 0;
  bool ok = keys.verify(e.author(), e.payload(), e.signature());
  e.rep_->verdict.store(tag | (ok ? 1 : 0), std::memory_order_relaxed);
  return ok;
}

Bytes canonical_serialization(const ElementSet& elements) {
  std::size_t total = 0;
  for (const auto& e : elements) total += e.canonical_bytes().size() + 4;
  ByteWriter w(total);
  // std::set iterates in canonical order already.
  for (const auto& e : elements) w.blob(e.canonical_bytes());
  return std::move(w).take();
}

Digest hash_epoch(const ElementSet& elements) { return sha256(canonical_serialization(elements)); }

Digest element_digest(const Element& e) { return sha256(e.canonical_bytes()); }

void encode_set(ByteWriter& w, const ElementSet& s) {
  w.u32(static_cast<std::uint32_t>(s.size()));
  for (const auto& e : s) e.encode(w);
}

ElementSet decode_set(ByteReader& r) {
  std::uint32_t n = r.u32();
  // Every element needs at least 12 bytes on the wire.
  if (static_cast<std::size_t>(n) * 12 > r.remaining())
    throw SetchainError(Errc::decode_error, "element count exceeds input");
  ElementSet out;
  for (std::uint32_t i = 0; i < n; ++i) out.insert(out.end(), Element::decode(r));
  return out;
}

}  // namespace setchain
