// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include "setchain/core/crypto.hpp"
#include "setchain/core/history.hpp"
#include "setchain/simnet/network.hpp"

namespace setchain::model {

/// Knowledge pooled by all Byzantine servers of a run.
struct HavocShared {
  ElementSet knowledge;
  std::vector<Element> knowledge_list;  // same elements, for uniform picks
  std::set<ProcessId> coalition;

  void learn(const Element& e);
};

struct HavocConfig {
  std::vector<ProcessId> members;
  ProcessId sbc{};
  std::shared_ptr<const Keyring> keys;
  std::shared_ptr<HavocShared> shared;
  std::uint64_t seed = 0;
  // Mean ticks between spontaneous actions.
  SimTime mean_interval = 40;
  // Called with every element this process puts on the wire.
  std::function<void(const Element&)> on_emit;
};

/// Byzantine server driven by a seeded RNG. It learns every valid element it
/// sees, echoes and readies broadcasts at random, answers gets with random
/// subsets and partitions, and on its own broadcasts equivocating adds,
/// arbitrary epoch increments and proposals built from what it knows plus
/// broken elements.
class HavocServer : public sim::Process {
 public:
  explicit HavocServer(HavocConfig cfg);

  void on_message(sim::Network& net, const sim::Envelope& env) override;
  void on_timer(sim::Network& net, std::uint64_t tag) override;

  /// Joins the coalition and schedules the first spontaneous action.
  void start(sim::Network& net);
  /// No further spontaneous actions; reactions to incoming traffic continue.
  void stop() { active_ = false; }

  std::uint64_t actions() const { return actions_; }

 private:
  bool coin(double p);
  std::vector<ProcessId> random_subset(const std::vector<ProcessId>& from);
  ElementSet invalid_elems();
  Element pick_element();
  ElementSet havoc_subset();
  void learn(const Element& e);
  void absorb_broadcast_payload(ByteView payload);
  void init_to(sim::Network& net, const std::vector<ProcessId>& to, const Bytes& payload);
  void do_stuff(sim::Network& net);
  void answer_get(sim::Network& net, ProcessId to, std::uint64_t req);

  HavocConfig cfg_;
  std::mt19937_64 rng_;
  bool active_ = false;
  EpochNumber seen_epoch_ = 0;
  std::uint64_t actions_ = 0;
  std::uint64_t junk_counter_ = 0;
};

}  // namespace setchain::model
