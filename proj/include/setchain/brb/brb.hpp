// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "setchain/core/digest.hpp"
#include "setchain/simnet/network.hpp"

namespace setchain::brb {

/// Frame layout (big-endian):
///
///   u8 0x10 | u8 phase | u32 origin | digest[32] | u32 len | payload[len]
///
/// INIT and ECHO carry the payload; READY carries an empty payload.
inline constexpr std::uint8_t kFrameTag = 0x10;

enum class Phase : std::uint8_t { init = 1, echo = 2, ready = 3 };

std::string_view to_string(Phase p);

struct Frame {
  Phase phase = Phase::init;
  ProcessId origin{};
  Digest digest{};
  ByteView payload;
};

Bytes encode_frame(Phase phase, ProcessId origin, const Digest& digest, ByteView payload);
/// nullopt when the bytes are not a well-formed BRB frame.
std::optional<Frame> decode_frame(ByteView bytes);

/// Bracha-style Byzantine reliable broadcast, one engine per process.
///
/// Instances are keyed by (origin, payload digest). A process echoes the first
/// INIT it gets from the origin, sends READY on 2f+1 ECHOes or f+1 READYs, and
/// delivers on 2f+1 READYs once it holds the payload.
class Engine {
 public:
  using DeliverFn = std::function<void(sim::Network&, ProcessId origin, const Bytes& payload)>;

  Engine(ProcessId self, std::vector<ProcessId> members, std::size_t f, DeliverFn on_deliver);

  /// Idempotent for identical payload bytes from this origin.
  void broadcast(sim::Network& net, Bytes payload);

  /// Returns false when the envelope is not a BRB frame.
  bool handle(sim::Network& net, const sim::Envelope& env);

  std::size_t f() const { return f_; }
  std::size_t quorum() const { return 2 * f_ + 1; }
  const std::vector<ProcessId>& members() const { return members_; }
  std::uint64_t delivered_count() const { return delivered_; }
  bool has_delivered(ProcessId origin, const Digest& d) const;

 private:
  struct Key {
    ProcessId origin;
    Digest digest;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return DigestHash{}(k.digest) ^ (static_cast<std::size_t>(raw(k.origin)) * 0x9e3779b97f4a7c15ull);
    }
  };
  struct Instance {
    std::uint64_t echoes = 0;
    std::uint64_t readies = 0;
    bool sent_echo = false;
    bool sent_ready = false;
    bool delivered = false;
    SharedBytes payload;
  };

  int member_index(ProcessId p) const;
  void send_all(sim::Network& net, Phase phase, const Key& key, ByteView payload);
  bool adopt_payload(Instance& inst, const Key& key, ByteView payload);
  void maybe_ready(sim::Network& net, Instance& inst, const Key& key);
  void maybe_deliver(sim::Network& net, Instance& inst, const Key& key);

  ProcessId self_;
  std::vector<ProcessId> members_;
  std::unordered_map<ProcessId, int> index_;
  std::size_t f_;
  DeliverFn on_deliver_;
  std::unordered_map<Key, Instance, KeyHash> instances_;
  std::uint64_t delivered_ = 0;
};

}  // namespace setchain::brb
