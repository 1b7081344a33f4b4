// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "setchain/incentives/incentives.hpp"
#include "setchain/server/server.hpp"
#include "setchain/simnet/network.hpp"

namespace setchain::bench {

enum class Adversary : std::uint8_t { none, silent, havoc };

std::string_view to_string(Adversary a);
Adversary adversary_from_string(std::string_view s);

struct Scenario {
  std::string name = "default";
  std::size_t n = 4;
  std::size_t f = 1;
  server::Algorithm algorithm = server::Algorithm::fast_agg;
  Adversary byzantine = Adversary::none;
  SimTime epoch_period = 200;
  double add_rate = 0;  // adds per simulated second
  SimTime duration = 100'000;
  std::uint64_t seed = 0;
  sim::NetConfig net;
  server::AggConfig agg;
  server::CostModel cost{1000, 200, 50};
  SimTime sbc_window = 50;
  SimTime decision_cost = 100;
  bool sign_epochs = false;
  std::string scheme = "hmac";
  // Stop issuing adds after this many (0: no cap).
  std::uint64_t max_adds = 0;
  SimTime havoc_interval = 40;
  // After the measured window: stop the load, keep epochs going until every
  // element is stamped, then run to quiescence and check convergence.
  bool drain = true;
  SimTime drain_limit = 200'000;
  // Width of the stamp-latency buckets.
  SimTime latency_bucket = kTicksPerSecond;
  std::optional<nlohmann::json> rewards;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults. Throws SetchainError(invalid_scenario).
  static Scenario from_json(const nlohmann::json& j);
};

struct LatencyBucket {
  SimTime start = 0;
  std::uint64_t count = 0;
  SimTime max = 0;
  double avg = 0;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t f = 0;
  std::string algorithm;
  std::string byzantine;
  SimTime duration = 0;
  SimTime sbc_window = 0;
  SimTime decision_cost = 0;

  std::uint64_t adds_attempted = 0;
  std::uint64_t adds_accepted = 0;
  std::uint64_t adds_stamped = 0;
  std::uint64_t epochs_completed = 0;
  std::uint64_t messages = 0;
  std::uint64_t events = 0;
  std::map<std::string, std::uint64_t> message_count;
  std::vector<LatencyBucket> stamp_latency;
  // (request tick, latency) per stamped add, in request order.
  std::vector<std::pair<SimTime, SimTime>> latency_samples;
  std::vector<std::string> property_violations;
  bool drained = false;
  double rewards_minted = 0;

  double seconds() const { return static_cast<double>(duration) / kTicksPerSecond; }
  bool passed() const { return property_violations.empty(); }

  /// Omits the per-add samples.
  nlohmann::json to_json() const;
};

/// Runs one seeded simulation. Properties are checked after every handler
/// and, when draining, again at quiescence.
RunReport run_scenario(const Scenario& s);

enum class Metric : std::uint8_t { adds_per_sec, epochs_per_sec, messages_per_add };

Metric metric_from_string(std::string_view s);
std::string_view to_string(Metric m);
/// Throws SetchainError(degenerate_metric) when the metric has a zero
/// denominator (e.g. messages per add with nothing stamped).
double metric_value(const RunReport& r, Metric m);
/// metric(a) / metric(b); zero denominator is SetchainError(degenerate_metric).
double compare(const RunReport& a, const RunReport& b, Metric m);
/// Ratio of two metrics of the same report.
double compare_within(const RunReport& r, Metric num, Metric den);

/// Median stamp latency of each of `windows` equal slices of the measured
/// window, by request time. Empty slices report 0.
std::vector<double> windowed_median_latency(const RunReport& r, std::size_t windows);

/// Runs every scenario, spreading them over `threads` workers; results keep
/// the input order.
std::vector<RunReport> run_matrix(const std::vector<Scenario>& scenarios, unsigned threads);

std::string csv_header();
std::string csv_row(const RunReport& r);

}  // namespace setchain::bench
