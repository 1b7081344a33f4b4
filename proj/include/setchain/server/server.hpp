// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>

#include "setchain/brb/brb.hpp"
#include "setchain/core/crypto.hpp"
#include "setchain/core/history.hpp"
#include "setchain/sbc/sbc.hpp"
#include "setchain/simnet/network.hpp"

namespace setchain::server {

enum class Algorithm : std::uint8_t { fast, fast_agg };

std::string_view to_string(Algorithm a);
/// "fast" or "fast-agg"; throws std::invalid_argument otherwise.
Algorithm algorithm_from_string(std::string_view s);

struct AggConfig {
  // Flush when the buffer holds more than max_batch elements or its oldest
  // element has waited max_wait ticks.
  std::size_t max_batch = 1000;
  SimTime max_wait = 5 * kTicksPerSecond;

  static AggConfig desk() { return {}; }
  static AggConfig production() { return {1'000'000, 5 * kTicksPerSecond}; }
};

/// Simulated CPU charged per handled event, in nanoseconds.
struct CostModel {
  std::uint64_t msg_ns = 0;      // protocol message (broadcast frame, set-deliver)
  std::uint64_t request_ns = 0;  // client request
  std::uint64_t elem_ns = 0;     // each element carried by the event
};

struct ServerConfig {
  Algorithm algorithm = Algorithm::fast;
  std::vector<ProcessId> members;
  std::size_t f = 0;
  ProcessId sbc{};
  std::shared_ptr<const Keyring> keys;
  AggConfig agg;
  CostModel cost;
  // Add a signed epoch digest as an element after every stamped epoch.
  bool sign_epochs = false;
  // Adversarial variant: sign a digest that does not match the stamped set.
  bool forge_epoch_digest = false;
};

/// A replica running the broadcast-based algorithm, optionally aggregating
/// adds into batches.
class Server : public sim::Process {
 public:
  using StampHook = std::function<void(ProcessId server, EpochNumber h, const ElementSet& stamped)>;
  using AddHook = std::function<void(ProcessId server, const Element& e)>;
  using InsertHook = std::function<void(ProcessId server, const Element& e)>;

  explicit Server(ServerConfig cfg);

  void on_message(sim::Network& net, const sim::Envelope& env) override;
  void on_timer(sim::Network& net, std::uint64_t tag) override;

  Status add(sim::Network& net, const Element& e);
  Status epoch_inc(sim::Network& net, EpochNumber h);
  GetResult get() const;

  const ElementSet& theset() const { return theset_; }
  const History& history() const { return history_; }
  EpochNumber epoch() const { return epoch_; }
  // theset minus every stamped element.
  const ElementSet& unstamped() const { return unstamped_; }
  const std::map<Element, SimTime>& tobroadcast() const { return tobroadcast_; }
  std::size_t tobroadcast_size() const { return tobroadcast_.size(); }
  bool tobroadcast_contains(const Element& e) const { return tobroadcast_.contains(e); }
  bool proposed(EpochNumber h) const { return proposed_.contains(h); }
  std::size_t buffered_epochincs() const { return pending_epochinc_.size(); }
  std::size_t buffered_set_delivers() const { return pending_set_deliver_.size(); }
  std::uint64_t flushes() const { return flushes_; }
  // Bumped whenever theset, history or epoch changes.
  std::uint64_t revision() const { return revision_; }
  const ServerConfig& config() const { return cfg_; }

  void set_stamp_hook(StampHook h) { stamp_hook_ = std::move(h); }
  // Called for each add() that returns ok.
  void set_add_hook(AddHook h) { add_hook_ = std::move(h); }
  // Called whenever an element enters theset.
  void set_insert_hook(InsertHook h) { insert_hook_ = std::move(h); }

  /// {"epoch":..,"theset":[hex digests],"history":[{"h":..,"digest":..,"size":..}]}
  std::string snapshot_json() const;

 private:
  void ensure_engine();
  void brb_broadcast(sim::Network& net, Bytes payload);
  void on_brb_deliver(sim::Network& net, ProcessId origin, const Bytes& payload);
  void on_epochinc(sim::Network& net, EpochNumber h);
  void on_set_deliver(sim::Network& net, sbc::SetDeliver sd);
  void apply_set_deliver(sim::Network& net, EpochNumber h, const sbc::Decision& d);
  void catch_up(sim::Network& net);
  void propose(sim::Network& net, EpochNumber h);
  void insert_element(const Element& e);
  void flush(sim::Network& net);
  void arm_flush_timer(sim::Network& net, SimTime delay);
  void sign_epoch(sim::Network& net, EpochNumber h, const ElementSet& stamped);
  void reply_get(sim::Network& net, ProcessId to, std::uint64_t req_id);

  ServerConfig cfg_;
  std::unique_ptr<brb::Engine> brb_;

  ElementSet theset_;
  ElementSet unstamped_;
  History history_;
  EpochNumber epoch_ = 0;
  std::set<EpochNumber> proposed_;
  std::set<EpochNumber> pending_epochinc_;
  std::map<EpochNumber, sbc::Decision> pending_set_deliver_;

  std::map<Element, SimTime> tobroadcast_;
  std::deque<std::pair<SimTime, Element>> tobroadcast_order_;
  bool flush_timer_armed_ = false;
  std::uint64_t flushes_ = 0;

  std::uint64_t revision_ = 0;
  StampHook stamp_hook_;
  AddHook add_hook_;
  InsertHook insert_hook_;
};

/// Byzantine server that never sends anything.
class SilentServer : public sim::Process {
 public:
  void on_message(sim::Network&, const sim::Envelope&) override {}
};

/// Single-process reference implementation: adds apply immediately and an
/// epoch increment stamps every unstamped element at once.
class Central {
 public:
  explicit Central(std::shared_ptr<const Keyring> keys) : keys_(std::move(keys)) {}

  Status add(const Element& e);
  Status epoch_inc(EpochNumber h);
  GetResult get() const { return {theset_, history_, epoch_}; }

 private:
  std::shared_ptr<const Keyring> keys_;
  ElementSet theset_;
  ElementSet unstamped_;
  History history_;
  EpochNumber epoch_ = 0;
};

}  // namespace setchain::server
