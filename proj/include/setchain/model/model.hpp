// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "setchain/core/types.hpp"

namespace setchain::model {

/// Abstract element: validity is part of the value, so no cryptography is
/// needed to explore traces.
struct Elem {
  std::uint32_t id = 0;
  bool valid = true;
  auto operator<=>(const Elem&) const = default;
};
using ElemSet = std::set<Elem>;
/// Consensus outcome: the chosen subset of the proposals made for an instance.
using PropSet = std::set<ElemSet>;

ElemSet valid_part(const ElemSet& s);
ElemSet flatten(const PropSet& ps);

enum class MsgKind : std::uint8_t { madd, mepochinc, proposal };

struct Msg {
  MsgKind kind = MsgKind::madd;
  Elem e{};
  EpochNumber h = 0;
  ElemSet prop;
  auto operator<=>(const Msg&) const = default;

  static Msg add(Elem e) { return Msg{MsgKind::madd, e, 0, {}}; }
  static Msg epochinc(EpochNumber h) { return Msg{MsgKind::mepochinc, {}, h, {}}; }
  static Msg proposal(EpochNumber h, ElemSet p) { return Msg{MsgKind::proposal, {}, h, std::move(p)}; }
};

using Multiset = std::map<Msg, std::uint32_t>;

bool multiset_leq(const Multiset& a, const Multiset& b);
Multiset multiset_of(const std::vector<Msg>& seq);
void multiset_add(Multiset& into, const Multiset& m);

struct NetEntry {
  std::vector<Msg> sent;
  Multiset pending;
  std::vector<Msg> received;
  bool operator==(const NetEntry&) const = default;
};

struct LocalState {
  ElemSet S;
  std::vector<ElemSet> H;  // H[k-1] is the set stamped in epoch k
  EpochNumber epoch = 0;
  bool operator==(const LocalState&) const = default;

  bool stamped(const Elem& e) const;
};

using Pid = std::uint32_t;

enum class Model : std::uint8_t { gamma, gamma_prime };

/// Process layout. Servers are 0..n-1 and the last f of them are Byzantine
/// in the f-adversary model; the single-adversary model replaces those f
/// servers with one process b = n.
struct System {
  Model model = Model::gamma;
  std::size_t n = 4;
  std::size_t f = 1;

  System prime() const { return {Model::gamma_prime, n, f}; }
  Pid b() const { return static_cast<Pid>(n); }
  std::vector<Pid> correct() const;
  std::vector<Pid> byzantine() const;
  std::vector<Pid> processes() const;
  bool is_byzantine(Pid p) const;
  bool is_correct(Pid p) const { return p < n - f; }
  void validate() const;
};

enum class Tag : std::uint8_t {
  get,
  add,
  brb_broadcast,
  brb_deliver,
  epoch_inc,
  sbc_propose,
  sbc_inform,
  sbc_set_deliver,
  sbc_consensus,
  nop,
};

std::string_view to_string(Tag t);

struct Event {
  Tag tag = Tag::nop;
  std::optional<Pid> server;
  Elem e{};          // add
  Msg msg{};         // brb_broadcast, brb_deliver, sbc_inform
  EpochNumber h = 0; // epoch_inc, sbc_propose, sbc_set_deliver, sbc_consensus
  ElemSet prop;      // sbc_propose
  PropSet propset;   // sbc_set_deliver, sbc_consensus
  bool operator==(const Event&) const = default;

  static Event nop() { return {}; }
};

std::string describe(const Event& ev);

/// (Σ, Δ, H, K) in the f-adversary model; in the single-adversary model the
/// knowledge field is the local state of b.
struct Config {
  std::map<Pid, LocalState> sigma;
  std::map<Pid, NetEntry> delta;
  std::map<EpochNumber, PropSet> consensus;
  ElemSet knowledge;
  bool operator==(const Config&) const = default;
};

Config initial(const System& sys);

/// Valid elements an event discloses to the process it happens at.
ElemSet valid_elements(const Event& ev);

bool enabled(const System& sys, const Event& ev, const Config& cfg);
/// Throws SetchainError(harness) when ev is not enabled.
void apply(const System& sys, const Event& ev, Config& cfg);
Config effect(const System& sys, const Event& ev, const Config& cfg);

/// Network and configuration equivalence between an f-adversary config and a
/// single-adversary config. On failure `why` names the first violated check.
bool network_equiv(const System& gamma, const Config& phi, const Config& phi_prime,
                   std::string* why = nullptr);
bool obs_equiv(const System& gamma, const Config& phi, const Config& phi_prime,
               std::string* why = nullptr);

/// Every valid element in b's received messages is in its knowledge.
bool receive_within_knowledge(const System& gamma_prime, const Config& cfg);

/// Random valid trace. Every emitted event is checked enabled before it is
/// applied; a disabled pick throws SetchainError(harness).
std::vector<Event> generate_trace(const System& sys, std::uint64_t seed, std::size_t steps);

struct MappingResult {
  bool ok = true;
  std::vector<Event> mapped;
  std::size_t step = 0;  // index into the input trace of the first failure
  std::string reason;
  Config left;   // f-adversary side at the failure
  Config right;  // single-adversary side at the failure
};

/// Replays a trace of the f-adversary model, builds the single-adversary trace
/// step by step and checks equivalence after every step.
MappingResult map_forward(const System& gamma, const std::vector<Event>& trace);

/// Replays a single-adversary trace and builds a stuttered f-adversary trace
/// (f-1 leading nops, then f events per input event); configuration i*f+j of
/// the output must be equivalent to configuration i of the input, 0 <= j < f.
MappingResult map_backward(const System& gamma, const std::vector<Event>& trace_prime);

// JSON forms used by counterexample bundles.
nlohmann::json to_json(const Event& ev);
Event event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Config& cfg);

struct Counterexample {
  std::string direction;  // "forward" or "backward"
  std::size_t n = 0;
  std::size_t f = 0;
  std::uint64_t seed = 0;
  std::vector<Event> trace;
  MappingResult result;

  nlohmann::json to_json() const;
  static Counterexample from_json(const nlohmann::json& j);
};

/// Re-runs the mapping recorded in a bundle.
MappingResult replay(const Counterexample& cx);

}  // namespace setchain::model
