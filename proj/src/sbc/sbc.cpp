// SPDX-License-Identifier: Apache-2.0
#include "setchain/sbc/sbc.hpp"

#include <algorithm>
#include <sstream>

#include "setchain/core/codec.hpp"

namespace setchain::sbc {

namespace {

constexpr std::uint64_t kEmitBit = std::uint64_t{1} << 63;

void expect_tag(ByteReader& r, std::uint8_t tag) {
  if (r.u8() != tag) throw SetchainError(Errc::decode_error, "unexpected message tag");
}

}  // namespace

ElementSet decision_union(const Decision& d) {
  ElementSet out;
  for (const auto& [p, s] : d) out.insert(s.begin(), s.end());
  return out;
}

Bytes encode_propose(EpochNumber h, const ElementSet& prop) {
  ByteWriter w;
  w.u8(kProposeTag);
  w.u64(h);
  encode_set(w, prop);
  return std::move(w).take();
}

Bytes encode_inform(EpochNumber h, ProcessId proposer, const ElementSet& prop) {
  ByteWriter w;
  w.u8(kInformTag);
  w.u64(h);
  w.u32(raw(proposer));
  encode_set(w, prop);
  return std::move(w).take();
}

Bytes encode_set_deliver(EpochNumber h, const Decision& d) {
  ByteWriter w;
  w.u8(kSetDeliverTag);
  w.u64(h);
  w.u32(static_cast<std::uint32_t>(d.size()));
  for (const auto& [p, s] : d) {
    w.u32(raw(p));
    encode_set(w, s);
  }
  return std::move(w).take();
}

Proposal decode_propose(ByteView body) {
  ByteReader r(body);
  expect_tag(r, kProposeTag);
  Proposal p;
  p.h = r.u64();
  p.prop = decode_set(r);
  r.expect_done();
  return p;
}

Inform decode_inform(ByteView body) {
  ByteReader r(body);
  expect_tag(r, kInformTag);
  Inform i;
  i.h = r.u64();
  i.proposer = make_pid(r.u32());
  i.prop = decode_set(r);
  r.expect_done();
  return i;
}

SetDeliver decode_set_deliver(ByteView body) {
  ByteReader r(body);
  expect_tag(r, kSetDeliverTag);
  SetDeliver sd;
  sd.h = r.u64();
  std::uint32_t count = r.u32();
  if (count > r.remaining() / 8) throw SetchainError(Errc::decode_error, "proposer count too large");
  for (std::uint32_t i = 0; i < count; ++i) {
    ProcessId p = make_pid(r.u32());
    if (!sd.decision.emplace(p, decode_set(r)).second)
      throw SetchainError(Errc::decode_error, "duplicate proposer");
  }
  r.expect_done();
  return sd;
}

std::string DecisionRecord::to_json_line() const {
  std::ostringstream os;
  os << "{\"h\":" << h << ",\"proposers\":[";
  for (std::size_t i = 0; i < proposers.size(); ++i) os << (i ? "," : "") << raw(proposers[i]);
  os << "],\"union_size\":" << union_size << "}";
  return os.str();
}

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.window < 0 || cfg_.decision_cost < 0)
    throw std::invalid_argument("negative window or decision cost");
}

void Service::on_message(sim::Network& net, const sim::Envelope& env) {
  if (tag_of(env) != kProposeTag) return;
  if (std::find(cfg_.members.begin(), cfg_.members.end(), env.from) == cfg_.members.end()) return;
  Proposal p;
  try {
    p = decode_propose(*env.body);
  } catch (const SetchainError&) {
    return;
  }
  if (p.h == 0) return;

  if (proposal_hook_) proposal_hook_(env.from, p.h, p.prop);

  std::vector<ProcessId> others;
  for (ProcessId m : cfg_.members)
    if (m != env.from) others.push_back(m);
  net.multicast(id(), others, std::make_shared<const Bytes>(encode_inform(p.h, env.from, p.prop)),
                "sbc-inform");

  auto [it, fresh] = instances_.try_emplace(p.h);
  Instance& inst = it->second;
  ++inst.propose_calls;
  if (inst.decided) return;
  if (fresh || inst.proposals.empty()) {
    inst.first_arrival = net.now();
    inst.deadline = std::max(net.now() + cfg_.window, cfg_.gst);
    net.set_timer(id(), inst.deadline - net.now(), p.h);
  }
  inst.proposals.try_emplace(env.from, std::move(p.prop));
  try_decide(net);
}

void Service::on_timer(sim::Network& net, std::uint64_t tag) {
  if (tag & kEmitBit) {
    emit(net, tag & ~kEmitBit);
    return;
  }
  try_decide(net);
}

void Service::try_decide(sim::Network& net) {
  for (;;) {
    auto it = instances_.find(last_decided_ + 1);
    if (it == instances_.end()) return;
    Instance& inst = it->second;
    if (inst.proposals.empty() || net.now() < inst.deadline) return;

    const EpochNumber h = it->first;
    Decision d = inst.proposals;
    DecisionRecord rec;
    rec.h = h;
    rec.decided_at = net.now();
    for (const auto& [p, s] : d) rec.proposers.push_back(p);
    rec.union_size = decision_union(d).size();
    records_.push_back(std::move(rec));

    outgoing_[h] = std::make_shared<const Bytes>(encode_set_deliver(h, d));
    if (cfg_.retain) {
      inst.decided = std::move(d);
    } else {
      inst.decided = Decision{};
      inst.proposals.clear();
    }
    last_decided_ = h;
    if (cfg_.decision_cost > 0)
      net.set_timer(id(), cfg_.decision_cost, h | kEmitBit);
    else
      emit(net, h);
  }
}

void Service::emit(sim::Network& net, EpochNumber h) {
  auto it = outgoing_.find(h);
  if (it == outgoing_.end()) return;
  net.multicast(id(), cfg_.members, it->second, "sbc-set-deliver");
  outgoing_.erase(it);
}

}  // namespace setchain::sbc
