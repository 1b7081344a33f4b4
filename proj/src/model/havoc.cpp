// SPDX-License-Identifier: Apache-2.0
#include "setchain/model/havoc.hpp"

#include "setchain/brb/brb.hpp"
#include "setchain/core/codec.hpp"
#include "setchain/sbc/sbc.hpp"
#include "setchain/server/messages.hpp"

namespace setchain::model {

namespace {
constexpr std::uint64_t kDoStuff = 1;
}

void HavocShared::learn(const Element& e) {
  if (knowledge.insert(e).second) knowledge_list.push_back(e);
}

HavocServer::HavocServer(HavocConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
  if (!cfg_.keys || !cfg_.shared) throw std::invalid_argument("havoc server needs keys and shared state");
  if (cfg_.mean_interval <= 0) throw std::invalid_argument("mean_interval must be positive");
}

bool HavocServer::coin(double p) { return std::bernoulli_distribution(p)(rng_); }

std::vector<ProcessId> HavocServer::random_subset(const std::vector<ProcessId>& from) {
  std::vector<ProcessId> out;
  for (ProcessId p : from)
    if (coin(0.5)) out.push_back(p);
  return out;
}

ElementSet HavocServer::invalid_elems() {
  ElementSet out;
  while (out.size() < 4 && coin(0.5)) {
    ByteWriter w;
    w.u64(cfg_.seed);
    w.u32(raw(id()));
    w.u64(junk_counter_++);
    Bytes payload = std::move(w).take();
    Bytes sig(32);
    for (auto& b : sig) b = static_cast<std::uint8_t>(rng_());
    const ProcessId author = cfg_.members[rng_() % cfg_.members.size()];
    out.insert(Element(std::move(payload), author, std::move(sig)));
  }
  return out;
}

Element HavocServer::pick_element() {
  const auto& known = cfg_.shared->knowledge_list;
  if (!known.empty() && coin(0.7)) return known[rng_() % known.size()];
  ElementSet junk;
  while (junk.empty()) junk = invalid_elems();
  return *junk.begin();
}

ElementSet HavocServer::havoc_subset() {
  ElementSet out = invalid_elems();
  const auto& known = cfg_.shared->knowledge_list;
  // Sample instead of scanning so long runs stay cheap.
  const std::size_t draws = known.empty() ? 0 : std::min<std::size_t>(known.size(), 16);
  for (std::size_t i = 0; i < draws; ++i) out.insert(known[rng_() % known.size()]);
  return out;
}

void HavocServer::learn(const Element& e) {
  if (!cfg_.shared->knowledge.contains(e) && valid(e, *cfg_.keys)) cfg_.shared->learn(e);
}

void HavocServer::absorb_broadcast_payload(ByteView payload) {
  try {
    auto m = server::decode_app(payload);
    if (auto* one = std::get_if<server::AddOne>(&m)) learn(one->e);
    if (auto* batch = std::get_if<server::AddBatch>(&m))
      for (const Element& e : batch->s) learn(e);
  } catch (const SetchainError&) {
  }
}

void HavocServer::start(sim::Network& net) {
  cfg_.shared->coalition.insert(id());
  active_ = true;
  std::exponential_distribution<double> gap(1.0 / static_cast<double>(cfg_.mean_interval));
  net.set_timer(id(), 1 + static_cast<SimTime>(gap(rng_)), kDoStuff);
}

void HavocServer::on_timer(sim::Network& net, std::uint64_t tag) {
  if (tag != kDoStuff || !active_) return;
  do_stuff(net);
  std::exponential_distribution<double> gap(1.0 / static_cast<double>(cfg_.mean_interval));
  net.set_timer(id(), 1 + static_cast<SimTime>(gap(rng_)), kDoStuff);
}

void HavocServer::init_to(sim::Network& net, const std::vector<ProcessId>& to,
                          const Bytes& payload) {
  if (to.empty()) return;
  auto frame = std::make_shared<const Bytes>(
      brb::encode_frame(brb::Phase::init, id(), sha256(payload), payload));
  net.multicast(id(), to, frame, "brb-init");
}

void HavocServer::do_stuff(sim::Network& net) {
  ++actions_;
  switch (rng_() % 4) {
    case 0: {
      // Equivocate: two different add payloads to two random halves.
      auto left = random_subset(cfg_.members);
      std::vector<ProcessId> right;
      for (ProcessId p : cfg_.members)
        if (std::find(left.begin(), left.end(), p) == left.end()) right.push_back(p);
      for (auto* group : {&left, &right}) {
        Bytes payload;
        if (coin(0.5)) {
          Element e = pick_element();
          if (cfg_.on_emit) cfg_.on_emit(e);
          payload = server::encode_app(server::AddOne{e});
        } else {
          ElementSet s = havoc_subset();
          if (cfg_.on_emit)
            for (const Element& e : s) cfg_.on_emit(e);
          payload = server::encode_app(server::AddBatch{s});
        }
        init_to(net, *group, payload);
      }
      break;
    }
    case 1: {
      const EpochNumber h = seen_epoch_ + std::uniform_int_distribution<EpochNumber>(0, 3)(rng_);
      init_to(net, coin(0.5) ? cfg_.members : random_subset(cfg_.members),
              server::encode_app(server::EpochInc{h}));
      break;
    }
    case 2: {
      const EpochNumber h = seen_epoch_ + 1 + (coin(0.5) ? 1 : 0);
      ElementSet prop = havoc_subset();
      if (cfg_.on_emit)
        for (const Element& e : prop) cfg_.on_emit(e);
      net.send(id(), cfg_.sbc, sbc::encode_propose(h, prop), "sbc-propose");
      break;
    }
    default:
      break;
  }
}

void HavocServer::answer_get(sim::Network& net, ProcessId to, std::uint64_t req) {
  GetResult r;
  r.theset = havoc_subset();
  ElementSet part = havoc_subset();
  const std::size_t epochs = std::uniform_int_distribution<std::size_t>(0, 3)(rng_);
  std::vector<ElementSet> bins(epochs);
  if (epochs > 0)
    for (const Element& e : part) bins[rng_() % epochs].insert(e);
  for (std::size_t i = 0; i < epochs; ++i) r.history.append(i + 1, std::move(bins[i]));
  r.epoch = std::uniform_int_distribution<EpochNumber>(0, 5)(rng_);
  net.send(id(), to, server::encode_get_response(req, r), "get-response");
}

void HavocServer::on_message(sim::Network& net, const sim::Envelope& env) {
  const std::uint8_t tag = sbc::tag_of(env);
  try {
    if (tag == brb::kFrameTag) {
      auto frame = brb::decode_frame(*env.body);
      if (!frame) return;
      if (!frame->payload.empty()) absorb_broadcast_payload(frame->payload);
      // Reacting to the coalition's own frames would feed back without bound.
      if (env.from == id() || cfg_.shared->coalition.contains(env.from)) return;
      if (frame->phase != brb::Phase::ready && coin(0.5)) {
        auto to = coin(0.5) ? cfg_.members : random_subset(cfg_.members);
        auto body = std::make_shared<const Bytes>(brb::encode_frame(
            brb::Phase::echo, frame->origin, frame->digest, frame->payload));
        net.multicast(id(), to, body, "brb-echo");
      }
      if (coin(0.3)) {
        auto to = coin(0.5) ? cfg_.members : random_subset(cfg_.members);
        auto body = std::make_shared<const Bytes>(
            brb::encode_frame(brb::Phase::ready, frame->origin, frame->digest, {}));
        net.multicast(id(), to, body, "brb-ready");
      }
      return;
    }
    switch (tag) {
      case sbc::kInformTag:
        for (const Element& e : sbc::decode_inform(*env.body).prop) learn(e);
        return;
      case sbc::kSetDeliverTag: {
        auto sd = sbc::decode_set_deliver(*env.body);
        seen_epoch_ = std::max(seen_epoch_, sd.h);
        for (const auto& [p, s] : sd.decision)
          for (const Element& e : s) learn(e);
        return;
      }
      case server::kAddRequest:
        learn(server::decode_add_request(*env.body));
        return;
      case server::kGetRequest:
        answer_get(net, env.from, server::decode_get_request(*env.body));
        return;
      default:
        return;
    }
  } catch (const SetchainError& e) {
    if (e.code() != Errc::decode_error) throw;
  }
}

}  // namespace setchain::model
