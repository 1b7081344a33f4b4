// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "setchain/core/crypto.hpp"
#include "setchain/core/history.hpp"
#include "setchain/simnet/network.hpp"

namespace setchain::client {

struct DpoGetResult {
  ElementSet S;
  History H;
  EpochNumber h = 0;
};

/// Combines get responses: S keeps elements reported by at least f+1
/// servers; H grows epoch by epoch while f+1 of the still-trusted servers
/// report the same set, dropping servers that disagree or whose history ends.
/// Elements of H are merged into S.
DpoGetResult dpo_combine(const std::vector<GetResult>& responses, std::size_t f);

struct DpoConfig {
  std::vector<ProcessId> servers;
  std::size_t f = 0;
  SimTime get_timeout = 1000;
};

/// Quorum client: writes go to f+1 servers, reads to every server and
/// complete on the first 2f+1 responses.
class DpoClient : public sim::Process {
 public:
  struct GetOutcome {
    std::optional<DpoGetResult> result;
    std::optional<Errc> error;
    std::size_t responses = 0;
  };
  using GetCallback = std::function<void(sim::Network&, const GetOutcome&)>;

  explicit DpoClient(DpoConfig cfg);

  void on_message(sim::Network& net, const sim::Envelope& env) override;
  void on_timer(sim::Network& net, std::uint64_t tag) override;

  /// Returns the servers contacted.
  std::vector<ProcessId> add(sim::Network& net, const Element& e);
  std::vector<ProcessId> epoch_inc(sim::Network& net, EpochNumber h);
  void get(sim::Network& net, GetCallback cb);

  bool get_in_flight() const { return static_cast<bool>(pending_cb_); }

 private:
  std::vector<ProcessId> pick_writers();

  DpoConfig cfg_;
  std::uint64_t rotation_ = 0;
  std::uint64_t next_req_ = 1;
  std::uint64_t active_req_ = 0;
  std::vector<GetResult> responses_;
  std::set<ProcessId> responded_;
  GetCallback pending_cb_;
};

struct Confirmation {
  Digest element_digest{};
  EpochNumber epoch = 0;
  Digest epoch_digest{};
  std::vector<ProcessId> signers;

  /// {"element-digest":..,"epoch":..,"epoch-digest":..,"signers":[..]}
  std::string to_json() const;
};

/// Looks for e in the reported history and counts distinct member servers
/// whose valid signed-hash elements carry that epoch and the recomputed
/// digest of its set. nullopt when e is unstamped or fewer than f+1 sign.
std::optional<Confirmation> verify_stamp(const GetResult& r, const Element& e,
                                         const std::vector<ProcessId>& servers, std::size_t f,
                                         const Keyring& keys);

struct RetryPolicy {
  SimTime wait = 600;
  std::uint32_t backoff = 2;
  std::uint32_t budget = 5;
};

struct OptimisticConfig {
  std::vector<ProcessId> servers;
  std::size_t f = 0;
  std::shared_ptr<const Keyring> keys;
  RetryPolicy retry;
};

/// Single-server client: one add, later one get, accepted only on f+1
/// matching epoch signatures. Retries rotate through the servers.
class OptimisticClient : public sim::Process {
 public:
  struct Outcome {
    std::optional<Confirmation> confirmation;
    std::optional<Errc> error;
    std::uint32_t attempts = 0;
    std::vector<ProcessId> targets;
  };
  using Callback = std::function<void(sim::Network&, const Outcome&)>;

  explicit OptimisticClient(OptimisticConfig cfg);

  void on_message(sim::Network& net, const sim::Envelope& env) override;
  void on_timer(sim::Network& net, std::uint64_t tag) override;

  void add_and_confirm(sim::Network& net, const Element& e, Callback cb);
  bool busy() const { return static_cast<bool>(cb_); }

 private:
  void attempt(sim::Network& net);
  void next_attempt(sim::Network& net);
  void finish(sim::Network& net, Outcome out);

  OptimisticConfig cfg_;
  std::optional<Element> element_;
  Callback cb_;
  std::uint32_t attempt_ = 0;
  ProcessId target_{};
  std::uint64_t req_id_ = 0;
  std::uint64_t next_req_ = 1;
  std::vector<ProcessId> targets_;
};

/// Byzantine server that answers every get with a fabricated history placing
/// the last element it was asked to add in epoch 1, signed by every colluder.
class LyingServer : public sim::Process {
 public:
  LyingServer(std::shared_ptr<const Keyring> keys, std::vector<ProcessId> colluders)
      : keys_(std::move(keys)), colluders_(std::move(colluders)) {}

  void on_message(sim::Network& net, const sim::Envelope& env) override;

 private:
  std::shared_ptr<const Keyring> keys_;
  std::vector<ProcessId> colluders_;
  std::optional<Element> last_;
};

}  // namespace setchain::client
