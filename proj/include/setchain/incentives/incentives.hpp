// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include <json.hpp>

#include "setchain/core/crypto.hpp"
#include "setchain/core/history.hpp"

namespace setchain::incentives {

/// Fees are settled in integer minor units; one token is 100 of them.
using Minor = std::int64_t;
inline constexpr Minor kMinorPerToken = 100;

struct RewardParams {
  double c = 0.0;
  std::size_t f_threshold = 0;
  std::size_t n = 4;
  // Per-element and per-signer terms; both must be strictly increasing.
  std::function<double(std::uint64_t)> elem_fn;
  std::function<double(std::uint64_t)> signer_fn;
  double fee_x = 0.0;
  double burn_ratio = 0.0;

  /// Linear terms alpha*e and beta*s.
  static RewardParams linear(double c, std::size_t f, std::size_t n, double alpha, double beta);
  /// Reads {"c","f","n","alpha","beta","fee_x","burn_ratio"}; missing keys
  /// take the linear defaults c=0, alpha=beta=1, fee_x=0, burn_ratio=0.
  static RewardParams from_json(const nlohmann::json& j);

  void validate() const;
};

/// Tokens minted for an epoch with e elements and s signers; nothing unless
/// more than f servers signed. Throws SetchainError(invalid_signer_count) for
/// s > n.
double reward(std::uint64_t e, std::uint64_t s, const RewardParams& p);

struct FeeSplit {
  std::map<ProcessId, Minor> payout;
  Minor burned = 0;

  Minor total() const;
};

/// Burns x*burn_ratio (rounded to the nearest minor unit) and splits the rest
/// equally; leftover minor units go to the lowest ids. Throws
/// SetchainError(no_signers) when someone should be paid but nobody signed.
FeeSplit fee_split(double x, const std::set<ProcessId>& signers, const RewardParams& p);

/// Servers whose valid signed digest of epoch h matches the stamped set and is
/// itself stamped in some epoch >= h.
std::set<ProcessId> epoch_signers(const History& history, EpochNumber h,
                                  const std::vector<ProcessId>& servers, const Keyring& keys);

}  // namespace setchain::incentives
