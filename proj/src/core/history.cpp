// SPDX-License-Identifier: Apache-2.0
#include "setchain/core/history.hpp"

namespace setchain {

const ElementSet& History::at(EpochNumber h) const {
  if (!defined(h)) throw std::out_of_range("epoch " + std::to_string(h) + " not in history");
  return entries_[h - 1];
}

std::optional<EpochNumber> History::epoch_of(const Element& e) const {
  auto it = index_.find(e);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void History::append(EpochNumber h, ElementSet stamped) {
  if (h != entries_.size() + 1)
    throw std::logic_error("history append out of order: " + std::to_string(h));
  total_ += stamped.size();
  for (const auto& e : stamped) index_.emplace(e, h);
  entries_.push_back(std::move(stamped));
}

void History::encode(ByteWriter& w) const {
  w.u32(static_cast<std::uint32_t>(entries_.size()));
  for (const auto& s : entries_) encode_set(w, s);
}

History History::decode(ByteReader& r) {
  std::uint32_t n = r.u32();
  if (static_cast<std::size_t>(n) * 4 > r.remaining())
    throw SetchainError(Errc::decode_error, "epoch count exceeds input");
  History h;
  for (std::uint32_t i = 1; i <= n; ++i) h.append(i, decode_set(r));
  return h;
}

void GetResult::encode(ByteWriter& w) const {
  encode_set(w, theset);
  history.encode(w);
  w.u64(epoch);
}

GetResult GetResult::decode(ByteReader& r) {
  GetResult g;
  g.theset = decode_set(r);
  g.history = History::decode(r);
  g.epoch = r.u64();
  return g;
}

}  // namespace setchain
