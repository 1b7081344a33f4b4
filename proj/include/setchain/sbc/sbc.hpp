// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "setchain/core/element.hpp"
#include "setchain/simnet/network.hpp"

namespace setchain::sbc {

/// Wire tags of the set-consensus service.
///
///   propose     0x20 | u64 h | set
///   inform      0x21 | u64 h | u32 proposer | set
///   set-deliver 0x22 | u64 h | u32 count | (u32 proposer | set)*
///
/// where `set` is u32 count followed by canonical element encodings.
inline constexpr std::uint8_t kProposeTag = 0x20;
inline constexpr std::uint8_t kInformTag = 0x21;
inline constexpr std::uint8_t kSetDeliverTag = 0x22;

/// Decided value: proposer -> proposed set.
using Decision = std::map<ProcessId, ElementSet>;

ElementSet decision_union(const Decision& d);

Bytes encode_propose(EpochNumber h, const ElementSet& prop);
Bytes encode_inform(EpochNumber h, ProcessId proposer, const ElementSet& prop);
Bytes encode_set_deliver(EpochNumber h, const Decision& d);

struct Proposal {
  EpochNumber h = 0;
  ElementSet prop;
};
struct Inform {
  EpochNumber h = 0;
  ProcessId proposer{};
  ElementSet prop;
};
struct SetDeliver {
  EpochNumber h = 0;
  Decision decision;
};

// All decoders throw SetchainError(decode_error) on malformed input.
Proposal decode_propose(ByteView body);
Inform decode_inform(ByteView body);
SetDeliver decode_set_deliver(ByteView body);

inline std::uint8_t tag_of(const sim::Envelope& env) {
  return env.body && !env.body->empty() ? (*env.body)[0] : 0;
}

struct ServiceConfig {
  std::vector<ProcessId> members;
  // An instance decides no earlier than window ticks after its first
  // proposal, and never before gst.
  SimTime window = 50;
  SimTime gst = 0;
  // Extra latency between deciding and emitting SetDeliver.
  SimTime decision_cost = 0;
  // Keep proposal contents after decision (tests inspect them).
  bool retain = true;
};

struct DecisionRecord {
  EpochNumber h = 0;
  SimTime decided_at = 0;
  std::vector<ProcessId> proposers;
  std::size_t union_size = 0;

  /// {"h":..,"proposers":[..],"union_size":..}
  std::string to_json_line() const;
};

/// Deterministic set-consensus decider.
///
/// Instances decide in order. Instance h decides once h-1 has decided, it has
/// at least one proposal and the clock has reached its deadline; the decided
/// value is every proposal registered by then (first proposal per proposer).
/// Every proposal, including repeated ones, is announced to the other members
/// with an inform message.
class Service : public sim::Process {
 public:
  struct Instance {
    std::map<ProcessId, ElementSet> proposals;
    std::uint64_t propose_calls = 0;
    SimTime first_arrival = 0;
    SimTime deadline = 0;
    std::optional<Decision> decided;
  };

  using ProposalHook = std::function<void(ProcessId proposer, EpochNumber h, const ElementSet&)>;

  explicit Service(ServiceConfig cfg);

  void on_message(sim::Network& net, const sim::Envelope& env) override;
  void on_timer(sim::Network& net, std::uint64_t tag) override;

  void set_proposal_hook(ProposalHook hook) { proposal_hook_ = std::move(hook); }

  const std::map<EpochNumber, Instance>& instances() const { return instances_; }
  const std::vector<DecisionRecord>& records() const { return records_; }
  EpochNumber last_decided() const { return last_decided_; }
  const ServiceConfig& config() const { return cfg_; }

 private:
  void try_decide(sim::Network& net);
  void emit(sim::Network& net, EpochNumber h);

  ServiceConfig cfg_;
  std::map<EpochNumber, Instance> instances_;
  std::map<EpochNumber, SharedBytes> outgoing_;
  std::vector<DecisionRecord> records_;
  EpochNumber last_decided_ = 0;
  ProposalHook proposal_hook_;
};

}  // namespace setchain::sbc
