// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "setchain/core/element.hpp"

namespace setchain {

/// Epoch-indexed stamped sets. The domain is always [1..size()].
class History {
 public:
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool defined(EpochNumber h) const { return h >= 1 && h <= entries_.size(); }

  const ElementSet& at(EpochNumber h) const;

  /// "e ∈ H": the element is stamped in some epoch.
  bool contains(const Element& e) const { return index_.contains(e); }
  std::optional<EpochNumber> epoch_of(const Element& e) const;

  /// Requires h == size() + 1.
  void append(EpochNumber h, ElementSet stamped);

  /// Sets for distinct epochs never intersect.
  bool pairwise_disjoint() const { return index_.size() == total_; }

  std::size_t total_elements() const { return total_; }
  const std::vector<ElementSet>& entries() const { return entries_; }

  void encode(ByteWriter& w) const;
  static History decode(ByteReader& r);

  bool operator==(const History& o) const { return entries_ == o.entries_; }

 private:
  std::vector<ElementSet> entries_;
  std::unordered_map<Element, EpochNumber, ElementHash> index_;
  std::size_t total_ = 0;
};

/// Snapshot returned by a server's get().
struct GetResult {
  ElementSet theset;
  History history;
  EpochNumber epoch = 0;

  void encode(ByteWriter& w) const;
  static GetResult decode(ByteReader& r);

  bool operator==(const GetResult&) const = default;
};

}  // namespace setchain
