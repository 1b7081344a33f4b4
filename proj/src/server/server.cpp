// SPDX-License-Identifier: Apache-2.0
#include "setchain/server/server.hpp"

#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "setchain/core/signed_hash.hpp"
#include "setchain/server/messages.hpp"

namespace setchain::server {

namespace {
constexpr std::uint64_t kFlushTimer = 1;
}

std::string_view to_string(Algorithm a) { return a == Algorithm::fast ? "fast" : "fast-agg"; }

Algorithm algorithm_from_string(std::string_view s) {
  if (s == "fast") return Algorithm::fast;
  if (s == "fast-agg") return Algorithm::fast_agg;
  throw std::invalid_argument("unknown algorithm: " + std::string(s));
}

Server::Server(ServerConfig cfg) : cfg_(std::move(cfg)) {
  if (!cfg_.keys) throw std::invalid_argument("server needs a keyring");
}

void Server::on_message(sim::Network& net, const sim::Envelope& env) {
  ensure_engine();
  const std::uint8_t tag = sbc::tag_of(env);
  try {
    if (tag == brb::kFrameTag) {
      net.charge(cfg_.cost.msg_ns);
      brb_->handle(net, env);
      return;
    }
    switch (tag) {
      case sbc::kSetDeliverTag:
        if (env.from != cfg_.sbc) return;
        net.charge(cfg_.cost.msg_ns);
        on_set_deliver(net, sbc::decode_set_deliver(*env.body));
        return;
      case sbc::kInformTag:
        // Correct replicas have no use for other proposals.
        return;
      case kAddRequest:
        net.charge(cfg_.cost.request_ns + cfg_.cost.elem_ns);
        add(net, decode_add_request(*env.body));
        return;
      case kEpochIncRequest:
        net.charge(cfg_.cost.request_ns);
        epoch_inc(net, decode_epochinc_request(*env.body));
        return;
      case kGetRequest:
        net.charge(cfg_.cost.request_ns + cfg_.cost.elem_ns * theset_.size());
        reply_get(net, env.from, decode_get_request(*env.body));
        return;
      default:
        return;
    }
  } catch (const SetchainError& e) {
    if (e.code() != Errc::decode_error) throw;
    // Malformed traffic is discarded.
  }
}

void Server::on_timer(sim::Network& net, std::uint64_t tag) {
  if (tag != kFlushTimer) return;
  flush_timer_armed_ = false;
  while (!tobroadcast_order_.empty()) {
    const auto& [t, e] = tobroadcast_order_.front();
    auto it = tobroadcast_.find(e);
    if (it != tobroadcast_.end() && it->second == t) break;
    tobroadcast_order_.pop_front();
  }
  if (tobroadcast_order_.empty()) return;
  const SimTime oldest = tobroadcast_order_.front().first;
  if (net.now() - oldest >= cfg_.agg.max_wait)
    flush(net);
  else
    arm_flush_timer(net, oldest + cfg_.agg.max_wait - net.now());
}

Status Server::add(sim::Network& net, const Element& e) {
  if (!valid(e, *cfg_.keys)) return Status::invalid_element;
  if (theset_.contains(e)) return Status::already_present;
  if (cfg_.algorithm == Algorithm::fast) {
    if (add_hook_) add_hook_(id(), e);
    brb_broadcast(net, encode_app(AddOne{e}));
    return Status::ok;
  }
  if (tobroadcast_.contains(e)) return Status::already_present;
  if (add_hook_) add_hook_(id(), e);
  const bool was_empty = tobroadcast_.empty();
  tobroadcast_.emplace(e, net.now());
  tobroadcast_order_.emplace_back(net.now(), e);
  if (tobroadcast_.size() > cfg_.agg.max_batch)
    flush(net);
  else if (was_empty && !flush_timer_armed_)
    arm_flush_timer(net, cfg_.agg.max_wait);
  return Status::ok;
}

Status Server::epoch_inc(sim::Network& net, EpochNumber h) {
  if (h != epoch_ + 1) return Status::stale_or_future_epoch;
  brb_broadcast(net, encode_app(EpochInc{h}));
  return Status::ok;
}

GetResult Server::get() const { return GetResult{theset_, history_, epoch_}; }

void Server::brb_broadcast(sim::Network& net, Bytes payload) {
  ensure_engine();
  brb_->broadcast(net, std::move(payload));
}

void Server::ensure_engine() {
  if (brb_) return;
  brb_ = std::make_unique<brb::Engine>(
      id(), cfg_.members, cfg_.f, [this](sim::Network& n, ProcessId origin, const Bytes& payload) {
        on_brb_deliver(n, origin, payload);
      });
}

void Server::insert_element(const Element& e) {
  if (theset_.insert(e).second) {
    if (!history_.contains(e)) unstamped_.insert(e);
    ++revision_;
    if (insert_hook_) insert_hook_(id(), e);
  }
  tobroadcast_.erase(e);
}

void Server::on_brb_deliver(sim::Network& net, ProcessId origin, const Bytes& payload) {
  (void)origin;
  std::optional<AppMessage> decoded;
  try {
    decoded = decode_app(payload);
  } catch (const SetchainError&) {
    return;
  }
  AppMessage& m = *decoded;
  if (auto* one = std::get_if<AddOne>(&m)) {
    net.charge(cfg_.cost.elem_ns);
    if (theset_.contains(one->e) || valid(one->e, *cfg_.keys)) insert_element(one->e);
  } else if (auto* batch = std::get_if<AddBatch>(&m)) {
    net.charge(cfg_.cost.elem_ns * batch->s.size());
    // Each member is checked on its own; an invalid one does not sink the rest.
    for (const Element& e : batch->s)
      if (theset_.contains(e) || valid(e, *cfg_.keys)) insert_element(e);
  } else {
    on_epochinc(net, std::get<EpochInc>(m).h);
  }
}

void Server::on_epochinc(sim::Network& net, EpochNumber h) {
  if (h < epoch_ + 1) return;
  if (h > epoch_ + 1) {
    pending_epochinc_.insert(h);
    return;
  }
  propose(net, h);
}

void Server::propose(sim::Network& net, EpochNumber h) {
  if (!proposed_.insert(h).second) return;
  ElementSet prop = unstamped_;
  for (const auto& [e, t] : tobroadcast_) prop.insert(e);
  net.charge(cfg_.cost.elem_ns * prop.size());
  net.send(id(), cfg_.sbc, sbc::encode_propose(h, prop), "sbc-propose");
}

void Server::on_set_deliver(sim::Network& net, sbc::SetDeliver sd) {
  if (sd.h < epoch_ + 1) return;
  if (sd.h > epoch_ + 1) {
    pending_set_deliver_.emplace(sd.h, std::move(sd.decision));
    return;
  }
  apply_set_deliver(net, sd.h, sd.decision);
  catch_up(net);
}

void Server::apply_set_deliver(sim::Network& net, EpochNumber h, const sbc::Decision& d) {
  ElementSet stamped;
  std::size_t seen = 0;
  for (const auto& [proposer, s] : d) {
    seen += s.size();
    for (const Element& e : s) {
      if (history_.contains(e)) continue;
      auto it = theset_.find(e);
      if (it != theset_.end())
        stamped.insert(*it);
      else if (valid(e, *cfg_.keys))
        stamped.insert(e);
    }
  }
  net.charge(cfg_.cost.elem_ns * seen);

  for (const Element& e : stamped) {
    if (theset_.insert(e).second && insert_hook_) insert_hook_(id(), e);
    unstamped_.erase(e);
    tobroadcast_.erase(e);
  }
  history_.append(h, stamped);
  epoch_ = h;
  ++revision_;
  proposed_.erase(proposed_.begin(), proposed_.lower_bound(h));
  if (stamp_hook_) stamp_hook_(id(), h, history_.at(h));
  if (cfg_.sign_epochs) sign_epoch(net, h, history_.at(h));
}

void Server::catch_up(sim::Network& net) {
  for (;;) {
    auto it = pending_set_deliver_.find(epoch_ + 1);
    if (it == pending_set_deliver_.end()) break;
    sbc::Decision d = std::move(it->second);
    pending_set_deliver_.erase(it);
    apply_set_deliver(net, epoch_ + 1, d);
  }
  pending_set_deliver_.erase(pending_set_deliver_.begin(),
                             pending_set_deliver_.upper_bound(epoch_));
  pending_epochinc_.erase(pending_epochinc_.begin(), pending_epochinc_.upper_bound(epoch_));
  if (pending_epochinc_.contains(epoch_ + 1)) {
    pending_epochinc_.erase(epoch_ + 1);
    propose(net, epoch_ + 1);
  }
}

void Server::flush(sim::Network& net) {
  if (tobroadcast_.empty()) return;
  AddBatch batch;
  for (const auto& [e, t] : tobroadcast_) batch.s.insert(e);
  tobroadcast_.clear();
  tobroadcast_order_.clear();
  ++flushes_;
  brb_broadcast(net, encode_app(batch));
}

void Server::arm_flush_timer(sim::Network& net, SimTime delay) {
  flush_timer_armed_ = true;
  net.set_timer(id(), delay, kFlushTimer);
}

void Server::sign_epoch(sim::Network& net, EpochNumber h, const ElementSet& stamped) {
  SignedEpochHash s;
  s.h = h;
  s.digest = hash_epoch(stamped);
  if (cfg_.forge_epoch_digest) s.digest[0] ^= 0xff;
  s.signer = id();
  add(net, s.sign(*cfg_.keys));
}

void Server::reply_get(sim::Network& net, ProcessId to, std::uint64_t req_id) {
  net.send(id(), to, encode_get_response(req_id, get()), "get-response");
}

std::string Server::snapshot_json() const {
  nlohmann::json j;
  j["epoch"] = epoch_;
  auto& set = j["theset"] = nlohmann::json::array();
  for (const Element& e : theset_) set.push_back(to_hex(element_digest(e)));
  auto& hist = j["history"] = nlohmann::json::array();
  for (EpochNumber h = 1; h <= history_.size(); ++h)
    hist.push_back({{"h", h}, {"digest", to_hex(hash_epoch(history_.at(h)))},
                    {"size", history_.at(h).size()}});
  return j.dump();
}

Status Central::add(const Element& e) {
  if (!valid(e, *keys_)) return Status::invalid_element;
  if (!theset_.insert(e).second) return Status::already_present;
  unstamped_.insert(e);
  return Status::ok;
}

Status Central::epoch_inc(EpochNumber h) {
  if (h != epoch_ + 1) return Status::stale_or_future_epoch;
  history_.append(h, std::exchange(unstamped_, {}));
  epoch_ = h;
  return Status::ok;
}

}  // namespace setchain::server
