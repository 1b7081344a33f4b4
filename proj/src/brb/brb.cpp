// SPDX-License-Identifier: Apache-2.0
#include "setchain/brb/brb.hpp"

#include <bit>

#include "setchain/core/codec.hpp"

namespace setchain::brb {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::init: return "brb-init";
    case Phase::echo: return "brb-echo";
    case Phase::ready: return "brb-ready";
  }
  return "brb-unknown";
}

Bytes encode_frame(Phase phase, ProcessId origin, const Digest& digest, ByteView payload) {
  ByteWriter w(payload.size() + 42);
  w.u8(kFrameTag);
  w.u8(static_cast<std::uint8_t>(phase));
  w.u32(raw(origin));
  w.raw(ByteView(digest.data(), digest.size()));
  w.blob(payload);
  return std::move(w).take();
}

std::optional<Frame> decode_frame(ByteView bytes) {
  try {
    ByteReader r(bytes);
    if (r.u8() != kFrameTag) return std::nullopt;
    Frame f;
    std::uint8_t phase = r.u8();
    if (phase < 1 || phase > 3) return std::nullopt;
    f.phase = static_cast<Phase>(phase);
    f.origin = make_pid(r.u32());
    ByteView d = r.raw(f.digest.size());
    std::copy(d.begin(), d.end(), f.digest.begin());
    f.payload = r.blob();
    r.expect_done();
    if (f.phase == Phase::ready && !f.payload.empty()) return std::nullopt;
    return f;
  } catch (const SetchainError&) {
    return std::nullopt;
  }
}

Engine::Engine(ProcessId self, std::vector<ProcessId> members, std::size_t f, DeliverFn on_deliver)
    : self_(self), members_(std::move(members)), f_(f), on_deliver_(std::move(on_deliver)) {
  if (members_.size() > 64) throw std::invalid_argument("BRB supports at most 64 members");
  if (members_.size() < 3 * f_ + 1) throw std::invalid_argument("BRB requires n >= 3f+1");
  for (std::size_t i = 0; i < members_.size(); ++i) index_[members_[i]] = static_cast<int>(i);
}

int Engine::member_index(ProcessId p) const {
  auto it = index_.find(p);
  return it == index_.end() ? -1 : it->second;
}

bool Engine::has_delivered(ProcessId origin, const Digest& d) const {
  auto it = instances_.find(Key{origin, d});
  return it != instances_.end() && it->second.delivered;
}

void Engine::send_all(sim::Network& net, Phase phase, const Key& key, ByteView payload) {
  auto body = std::make_shared<const Bytes>(encode_frame(phase, key.origin, key.digest, payload));
  net.multicast(self_, members_, std::move(body), to_string(phase));
}

void Engine::broadcast(sim::Network& net, Bytes payload) {
  Key key{self_, sha256(payload)};
  auto [it, fresh] = instances_.try_emplace(key);
  if (!fresh) return;
  it->second.payload = std::make_shared<const Bytes>(std::move(payload));
  send_all(net, Phase::init, key, *it->second.payload);
}

bool Engine::adopt_payload(Instance& inst, const Key& key, ByteView payload) {
  if (inst.payload) return true;
  if (sha256(payload) != key.digest) return false;
  inst.payload = std::make_shared<const Bytes>(payload.begin(), payload.end());
  return true;
}

void Engine::maybe_ready(sim::Network& net, Instance& inst, const Key& key) {
  if (inst.sent_ready) return;
  if (static_cast<std::size_t>(std::popcount(inst.echoes)) >= quorum() ||
      static_cast<std::size_t>(std::popcount(inst.readies)) >= f_ + 1) {
    inst.sent_ready = true;
    send_all(net, Phase::ready, key, {});
  }
}

void Engine::maybe_deliver(sim::Network& net, Instance& inst, const Key& key) {
  if (inst.delivered || !inst.payload) return;
  if (static_cast<std::size_t>(std::popcount(inst.readies)) < quorum()) return;
  inst.delivered = true;
  ++delivered_;
  SharedBytes payload = std::move(inst.payload);
  inst.payload.reset();
  inst.echoes = inst.readies = 0;
  on_deliver_(net, key.origin, *payload);
}

bool Engine::handle(sim::Network& net, const sim::Envelope& env) {
  if (!env.body || env.body->empty() || (*env.body)[0] != kFrameTag) return false;
  auto frame = decode_frame(*env.body);
  if (!frame) return true;  // malformed BRB traffic is discarded
  const int from_idx = member_index(env.from);
  if (from_idx < 0 || member_index(frame->origin) < 0) return true;

  Key key{frame->origin, frame->digest};
  Instance& inst = instances_[key];
  if (inst.delivered) return true;
  const std::uint64_t bit = std::uint64_t{1} << from_idx;

  switch (frame->phase) {
    case Phase::init:
      if (env.from != frame->origin) return true;
      if (!adopt_payload(inst, key, frame->payload)) return true;
      if (!inst.sent_echo) {
        inst.sent_echo = true;
        send_all(net, Phase::echo, key, *inst.payload);
      }
      break;
    case Phase::echo:
      if (!adopt_payload(inst, key, frame->payload)) return true;
      inst.echoes |= bit;
      maybe_ready(net, inst, key);
      break;
    case Phase::ready:
      inst.readies |= bit;
      maybe_ready(net, inst, key);
      break;
  }
  maybe_deliver(net, inst, key);
  return true;
}

}  // namespace setchain::brb
