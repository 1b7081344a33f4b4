// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>

#include "setchain/bench/bench.hpp"

using namespace setchain;
using namespace setchain::bench;

namespace {

Scenario small(std::uint64_t seed = 1) {
  Scenario s;
  s.name = "small";
  s.add_rate = 10'000;
  s.duration = 5'000;
  s.agg = {4, 100};
  s.seed = seed;
  return s;
}

std::size_t columns(const std::string& line) { return std::count(line.begin(), line.end(), ',') + 1; }

}  // namespace

TEST(Bench, IdleRunCompletesOneEpochPerPeriod) {
  Scenario s;
  s.duration = 100'000;
  s.epoch_period = 200;
  s.drain = false;
  const auto r = run_scenario(s);
  ASSERT_TRUE(r.passed()) << r.property_violations.front();
  EXPECT_EQ(r.adds_attempted, 0u);
  EXPECT_GE(r.epochs_completed, 495u);
  EXPECT_LE(r.epochs_completed, 500u);
}

TEST(Bench, SameScenarioSameReport) {
  Scenario s = small();
  s.algorithm = server::Algorithm::fast;
  s.byzantine = Adversary::havoc;
  EXPECT_EQ(run_scenario(s).to_json(), run_scenario(s).to_json());
  Scenario t = s;
  t.seed = 2;
  EXPECT_NE(run_scenario(s).to_json(), run_scenario(t).to_json());
}

TEST(Bench, SilentMinorityKeepsEverythingStamped) {
  Scenario s = small(3);
  s.n = 10;
  s.f = 3;
  s.byzantine = Adversary::silent;
  const auto r = run_scenario(s);
  ASSERT_TRUE(r.passed()) << r.property_violations.front();
  EXPECT_TRUE(r.drained);
  EXPECT_GT(r.adds_stamped, 0u);
}

TEST(Bench, AggregationSavesMessages) {
  Scenario agg = small(4);
  agg.n = 7;
  agg.f = 2;
  Scenario plain = agg;
  plain.algorithm = server::Algorithm::fast;
  const auto a = run_scenario(agg), p = run_scenario(plain);
  ASSERT_TRUE(a.passed() && p.passed());
  EXPECT_LT(compare(a, p, Metric::messages_per_add), 1.0);
}

TEST(Bench, CompareAndDegenerateMetrics) {
  const auto r = run_scenario(small());
  EXPECT_DOUBLE_EQ(compare(r, r, Metric::adds_per_sec), 1.0);
  EXPECT_DOUBLE_EQ(compare_within(r, Metric::adds_per_sec, Metric::adds_per_sec), 1.0);
  RunReport empty;
  empty.duration = 1000;
  try {
    metric_value(empty, Metric::messages_per_add);
    FAIL();
  } catch (const SetchainError& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_metric);
  }
  EXPECT_THROW(compare(r, empty, Metric::adds_per_sec), SetchainError);
  EXPECT_EQ(metric_from_string("epochs_per_sec"), Metric::epochs_per_sec);
  EXPECT_EQ(to_string(Metric::messages_per_add), "messages_per_add");
  EXPECT_THROW(metric_from_string("latency"), std::invalid_argument);
}

TEST(Scenario, JsonRoundTripAndDefaults) {
  Scenario s = small();
  s.byzantine = Adversary::havoc;
  s.rewards = nlohmann::json{{"c", 1}};
  const Scenario back = Scenario::from_json(s.to_json());
  EXPECT_EQ(back.to_json(), s.to_json());
  const Scenario d = Scenario::from_json(nlohmann::json::object());
  EXPECT_EQ(d.n, 4u);
  EXPECT_EQ(d.algorithm, server::Algorithm::fast_agg);
}

TEST(Scenario, InvalidInputsAreRejected) {
  for (const char* text : {R"({"n":3,"f":1})", R"({"algorithm":"slow"})", R"({"byzantine":"evil"})",
                           R"({"n":"four"})", R"({"duration":0})", R"({"scheme":"rsa"})"}) {
    try {
      Scenario::from_json(nlohmann::json::parse(text));
      ADD_FAILURE() << text;
    } catch (const SetchainError& e) {
      EXPECT_EQ(e.code(), Errc::invalid_scenario) << text;
    }
  }
}

TEST(Bench, WindowedMedians) {
  RunReport r;
  r.duration = 100;
  r.latency_samples = {{0, 5}, {10, 7}, {20, 6}, {60, 1}, {70, 3}};
  EXPECT_EQ(windowed_median_latency(r, 2), (std::vector<double>{6, 2}));
  EXPECT_EQ(windowed_median_latency(r, 4), (std::vector<double>{6, 0, 2, 0}));
}

TEST(Bench, CsvRowMatchesHeader) {
  const auto r = run_scenario(small());
  EXPECT_EQ(columns(csv_header()), columns(csv_row(r)));
  EXPECT_EQ(csv_row(r).rfind("small,1,", 0), 0u);
}

TEST(Bench, RewardsAreTalliedFromSignedEpochs) {
  Scenario s = small();
  s.sign_epochs = true;
  s.rewards = nlohmann::json{{"c", 1}, {"alpha", 1}, {"beta", 1}};
  const auto r = run_scenario(s);
  ASSERT_TRUE(r.passed()) << r.property_violations.front();
  EXPECT_GT(r.rewards_minted, 0.0);
  EXPECT_EQ(run_scenario(small()).rewards_minted, 0.0);
}

TEST(Bench, MatrixKeepsInputOrder) {
  std::vector<Scenario> m;
  for (std::uint64_t seed = 0; seed < 4; ++seed) m.push_back(small(seed));
  const auto out = run_matrix(m, 3);
  ASSERT_EQ(out.size(), 4u);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    EXPECT_EQ(out[seed].seed, seed);
    EXPECT_EQ(out[seed].to_json(), run_scenario(m[seed]).to_json());
  }
}
