// SPDX-License-Identifier: Apache-2.0
#include "setchain/incentives/incentives.hpp"

#include <algorithm>
#include <cmath>

#include "setchain/core/signed_hash.hpp"

namespace setchain::incentives {

RewardParams RewardParams::linear(double c, std::size_t f, std::size_t n, double alpha,
                                  double beta) {
  RewardParams p;
  p.c = c;
  p.f_threshold = f;
  p.n = n;
  p.elem_fn = [alpha](std::uint64_t e) { return alpha * static_cast<double>(e); };
  p.signer_fn = [beta](std::uint64_t s) { return beta * static_cast<double>(s); };
  return p;
}

RewardParams RewardParams::from_json(const nlohmann::json& j) {
  RewardParams p = linear(j.value("c", 0.0), j.at("f").get<std::size_t>(),
                          j.at("n").get<std::size_t>(), j.value("alpha", 1.0), j.value("beta", 1.0));
  p.fee_x = j.value("fee_x", 0.0);
  p.burn_ratio = j.value("burn_ratio", 0.0);
  if (j.value("alpha", 1.0) <= 0 || j.value("beta", 1.0) <= 0)
    throw std::invalid_argument("alpha and beta must be positive");
  p.validate();
  return p;
}

void RewardParams::validate() const {
  if (c < 0) throw std::invalid_argument("c must be non-negative");
  if (!elem_fn || !signer_fn) throw std::invalid_argument("reward functions missing");
  if (!(burn_ratio >= 0.0 && burn_ratio <= 1.0))
    throw std::invalid_argument("burn_ratio must lie in [0,1]");
  if (fee_x < 0) throw std::invalid_argument("fee must be non-negative");
}

double reward(std::uint64_t e, std::uint64_t s, const RewardParams& p) {
  if (s > p.n)
    throw SetchainError(Errc::invalid_signer_count,
                        std::to_string(s) + " signers with n=" + std::to_string(p.n));
  if (s <= p.f_threshold) return 0.0;
  return p.c + p.elem_fn(e) + p.signer_fn(s);
}

Minor FeeSplit::total() const {
  Minor t = burned;
  for (const auto& [id, m] : payout) t += m;
  return t;
}

FeeSplit fee_split(double x, const std::set<ProcessId>& signers, const RewardParams& p) {
  if (x < 0) throw std::invalid_argument("fee must be non-negative");
  if (!(p.burn_ratio >= 0.0 && p.burn_ratio <= 1.0))
    throw std::invalid_argument("burn_ratio must lie in [0,1]");
  const Minor total = std::llround(x * static_cast<double>(kMinorPerToken));
  FeeSplit out;
  out.burned = std::llround(static_cast<double>(total) * p.burn_ratio);
  const Minor rest = total - out.burned;
  if (rest == 0) {
    for (ProcessId s : signers) out.payout[s] = 0;
    return out;
  }
  if (signers.empty()) throw SetchainError(Errc::no_signers, "fee to distribute but no signers");
  const Minor k = static_cast<Minor>(signers.size());
  Minor leftover = rest % k;
  for (ProcessId s : signers) {
    out.payout[s] = rest / k + (leftover > 0 ? 1 : 0);
    if (leftover > 0) --leftover;
  }
  return out;
}

std::set<ProcessId> epoch_signers(const History& history, EpochNumber h,
                                  const std::vector<ProcessId>& servers, const Keyring& keys) {
  std::set<ProcessId> out;
  if (!history.defined(h)) return out;
  const Digest digest = hash_epoch(history.at(h));
  for (EpochNumber k = h; k <= history.size(); ++k) {
    for (const Element& e : history.at(k)) {
      auto s = SignedEpochHash::parse(e);
      if (!s || s->h != h || s->digest != digest) continue;
      if (std::find(servers.begin(), servers.end(), s->signer) == servers.end()) continue;
      if (valid(e, keys)) out.insert(s->signer);
    }
  }
  return out;
}

}  // namespace setchain::incentives
