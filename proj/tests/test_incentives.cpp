// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "setchain/core/digest.hpp"
#include "setchain/core/signed_hash.hpp"
#include "setchain/incentives/incentives.hpp"

using namespace setchain;
using namespace setchain::incentives;

namespace {

std::set<ProcessId> pids(std::initializer_list<std::uint32_t> ids) {
  std::set<ProcessId> out;
  for (auto i : ids) out.insert(make_pid(i));
  return out;
}

RewardParams fees(double x, double burn) {
  RewardParams p = RewardParams::linear(0, 1, 4, 1, 1);
  p.fee_x = x;
  p.burn_ratio = burn;
  return p;
}

}  // namespace

TEST(Reward, NothingAtOrBelowTheThreshold) {
  const auto p = RewardParams::linear(5, 1, 4, 1, 1);
  EXPECT_EQ(reward(100, 0, p), 0.0);
  EXPECT_EQ(reward(100, 1, p), 0.0);
  EXPECT_GT(reward(100, 2, p), 0.0);
}

TEST(Reward, LinearExamples) {
  EXPECT_DOUBLE_EQ(reward(10, 3, RewardParams::linear(1, 1, 4, 1, 1)), 14.0);
  EXPECT_DOUBLE_EQ(reward(0, 4, RewardParams::linear(0, 1, 4, 1, 1)), 4.0);
  EXPECT_DOUBLE_EQ(reward(3, 7, RewardParams::linear(0.5, 2, 7, 2, 0.25)), 0.5 + 6 + 1.75);
}

TEST(Reward, StrictlyIncreasingAboveThreshold) {
  const auto p = RewardParams::linear(1, 3, 10, 0.3, 2);
  for (std::uint64_t s = 4; s <= 10; ++s)
    for (std::uint64_t e = 0; e < 50; ++e) {
      EXPECT_LT(reward(e, s, p), reward(e + 1, s, p));
      if (s < 10) EXPECT_LT(reward(e, s, p), reward(e, s + 1, p));
    }
}

TEST(Reward, TooManySigners) {
  try {
    reward(1, 5, RewardParams::linear(0, 1, 4, 1, 1));
    FAIL();
  } catch (const SetchainError& e) {
    EXPECT_EQ(e.code(), Errc::invalid_signer_count);
  }
}

TEST(FeeSplit, FullBurn) {
  const auto s = fee_split(10, pids({1, 2}), fees(10, 1));
  EXPECT_EQ(s.burned, 1000);
  EXPECT_EQ(s.payout.at(make_pid(1)), 0);
  EXPECT_EQ(s.payout.at(make_pid(2)), 0);
}

TEST(FeeSplit, HalfBurnTwoSigners) {
  const auto s = fee_split(10, pids({1, 2}), fees(10, 0.5));
  EXPECT_EQ(s.burned, 500);
  EXPECT_EQ(s.payout.at(make_pid(1)), 250);
  EXPECT_EQ(s.payout.at(make_pid(2)), 250);
}

TEST(FeeSplit, ZeroFeePaysZero) {
  const auto s = fee_split(0, pids({3}), fees(0, 0.5));
  EXPECT_EQ(s.burned, 0);
  EXPECT_EQ(s.payout.at(make_pid(3)), 0);
  EXPECT_EQ(fee_split(0, {}, fees(0, 0)).total(), 0);
}

TEST(FeeSplit, LeftoverGoesToLowestIds) {
  const auto s = fee_split(0.07, pids({5, 1, 3}), fees(0.07, 0));
  EXPECT_EQ(s.payout.at(make_pid(1)), 3);
  EXPECT_EQ(s.payout.at(make_pid(3)), 2);
  EXPECT_EQ(s.payout.at(make_pid(5)), 2);
}

TEST(FeeSplit, Errors) {
  try {
    fee_split(1, {}, fees(1, 0.5));
    FAIL();
  } catch (const SetchainError& e) {
    EXPECT_EQ(e.code(), Errc::no_signers);
  }
  EXPECT_THROW(fee_split(-1, pids({1}), fees(0, 0)), std::invalid_argument);
  EXPECT_THROW(fee_split(1, pids({1}), fees(1, 1.5)), std::invalid_argument);
}

TEST(FeeSplit, ConservesEveryMinorUnit) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> fee(0, 1000), burn(0, 1);
  for (int i = 0; i < 2000; ++i) {
    const double x = fee(rng);
    std::set<ProcessId> signers;
    const auto k = 1 + rng() % 10;
    while (signers.size() < k) signers.insert(make_pid(static_cast<std::uint32_t>(rng() % 20)));
    const auto s = fee_split(x, signers, fees(x, burn(rng)));
    ASSERT_EQ(s.total(), std::llround(x * 100));
    Minor lo = s.payout.begin()->second, hi = lo;
    for (const auto& [p, m] : s.payout) {
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    EXPECT_LE(hi - lo, 1);
  }
}

TEST(RewardParams, FromJson) {
  const auto p = RewardParams::from_json({{"c", 2}, {"f", 1}, {"n", 4}, {"alpha", 3}, {"fee_x", 5}});
  EXPECT_DOUBLE_EQ(reward(2, 2, p), 2 + 6 + 2);
  EXPECT_EQ(p.fee_x, 5.0);
  EXPECT_EQ(p.burn_ratio, 0.0);
  EXPECT_THROW(RewardParams::from_json({{"n", 4}}), nlohmann::json::exception);
  EXPECT_THROW(RewardParams::from_json({{"f", 1}, {"n", 4}, {"beta", 0}}), std::invalid_argument);
  EXPECT_THROW(RewardParams::from_json({{"f", 1}, {"n", 4}, {"c", -1}}), std::invalid_argument);
  EXPECT_THROW(RewardParams::from_json({{"f", 1}, {"n", 4}, {"burn_ratio", 2}}), std::invalid_argument);
}

TEST(EpochSigners, CountsMatchingStampedSignatures) {
  Keyring keys(scheme_by_name("hmac"), 9);
  std::vector<ProcessId> servers;
  for (std::uint32_t i = 0; i < 4; ++i) {
    servers.push_back(make_pid(i));
    keys.register_process(make_pid(i));
  }
  keys.register_process(make_pid(50));
  const Element x = Element::sign(keys, make_pid(50), Bytes{'x'});
  auto seh = [&](std::uint32_t signer, EpochNumber h, Digest d) {
    SignedEpochHash s;
    s.h = h;
    s.digest = d;
    s.signer = make_pid(signer);
    return s.sign(keys);
  };
  const Digest d1 = hash_epoch({x});
  Digest wrong = d1;
  wrong[5] ^= 1;
  History h;
  h.append(1, {x});
  h.append(2, {seh(0, 1, d1), seh(1, 1, wrong), seh(50, 1, d1)});
  h.append(3, {seh(2, 1, d1), seh(0, 1, d1)});
  EXPECT_EQ(epoch_signers(h, 1, servers, keys), pids({0, 2}));
  EXPECT_TRUE(epoch_signers(h, 2, servers, keys).empty());
  EXPECT_TRUE(epoch_signers(h, 9, servers, keys).empty());
}
