// SPDX-License-Identifier: Apache-2.0
#include "setchain/client/client.hpp"

#include <algorithm>
#include <json.hpp>

#include "setchain/core/signed_hash.hpp"
#include "setchain/server/messages.hpp"

namespace setchain::client {

namespace {

constexpr std::uint64_t kTimeoutBit = std::uint64_t{1} << 62;

std::uint8_t tag_of(const sim::Envelope& env) {
  return env.body && !env.body->empty() ? (*env.body)[0] : 0;
}

// A response's history is only trusted up to the shorter of its claimed epoch
// and the entries it actually carries.
EpochNumber reach(const GetResult& r) { return std::min<EpochNumber>(r.epoch, r.history.size()); }

}  // namespace

DpoGetResult dpo_combine(const std::vector<GetResult>& responses, std::size_t f) {
  DpoGetResult out;
  std::map<Element, std::size_t> votes;
  for (const GetResult& r : responses)
    for (const Element& e : r.theset) ++votes[e];
  for (const auto& [e, c] : votes)
    if (c >= f + 1) out.S.insert(e);

  std::vector<std::size_t> trusted;
  for (std::size_t s = 0; s < responses.size(); ++s)
    if (reach(responses[s]) >= 1) trusted.push_back(s);

  EpochNumber i = 1;
  for (;;) {
    std::map<ElementSet, std::size_t> tally;
    for (std::size_t s : trusted) ++tally[responses[s].history.at(i)];
    const ElementSet* agreed = nullptr;
    std::size_t best = 0;
    for (const auto& [set, c] : tally) {
      if (c >= f + 1 && c > best) {
        agreed = &set;
        best = c;
      }
    }
    if (agreed == nullptr) break;
    ElementSet E = *agreed;
    std::erase_if(trusted, [&](std::size_t s) {
      return responses[s].history.at(i) != E || reach(responses[s]) == i;
    });
    out.H.append(i, std::move(E));
    ++i;
  }
  out.h = i - 1;
  for (const ElementSet& s : out.H.entries()) out.S.insert(s.begin(), s.end());
  return out;
}

DpoClient::DpoClient(DpoConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.servers.size() < 3 * cfg_.f + 1)
    throw std::invalid_argument("quorum client needs at least 3f+1 servers");
}

std::vector<ProcessId> DpoClient::pick_writers() {
  const std::size_t n = cfg_.servers.size();
  const std::size_t start = (raw(id()) + rotation_++) % n;
  std::vector<ProcessId> out;
  for (std::size_t k = 0; k <= cfg_.f; ++k) out.push_back(cfg_.servers[(start + k) % n]);
  return out;
}

std::vector<ProcessId> DpoClient::add(sim::Network& net, const Element& e) {
  auto to = pick_writers();
  net.multicast(id(), to, std::make_shared<const Bytes>(server::encode_add_request(e)),
                "add-request");
  return to;
}

std::vector<ProcessId> DpoClient::epoch_inc(sim::Network& net, EpochNumber h) {
  auto to = pick_writers();
  net.multicast(id(), to, std::make_shared<const Bytes>(server::encode_epochinc_request(h)),
                "epochinc-request");
  return to;
}

void DpoClient::get(sim::Network& net, GetCallback cb) {
  if (pending_cb_) throw SetchainError(Errc::harness, "quorum client already has a get in flight");
  active_req_ = next_req_++;
  responses_.clear();
  responded_.clear();
  pending_cb_ = std::move(cb);
  net.multicast(id(), cfg_.servers,
                std::make_shared<const Bytes>(server::encode_get_request(active_req_)),
                "get-request");
  net.set_timer(id(), cfg_.get_timeout, active_req_ | kTimeoutBit);
}

void DpoClient::on_message(sim::Network& net, const sim::Envelope& env) {
  if (!pending_cb_ || tag_of(env) != server::kGetResponse) return;
  if (std::find(cfg_.servers.begin(), cfg_.servers.end(), env.from) == cfg_.servers.end()) return;
  std::pair<std::uint64_t, GetResult> resp;
  try {
    resp = server::decode_get_response(*env.body);
  } catch (const SetchainError&) {
    return;
  }
  if (resp.first != active_req_ || !responded_.insert(env.from).second) return;
  responses_.push_back(std::move(resp.second));
  if (responses_.size() < 2 * cfg_.f + 1) return;

  GetOutcome out;
  out.result = dpo_combine(responses_, cfg_.f);
  out.responses = responses_.size();
  GetCallback cb = std::move(pending_cb_);
  pending_cb_ = nullptr;
  active_req_ = 0;
  cb(net, out);
}

void DpoClient::on_timer(sim::Network& net, std::uint64_t tag) {
  if (!pending_cb_ || tag != (active_req_ | kTimeoutBit)) return;
  GetOutcome out;
  out.error = Errc::insufficient_responses;
  out.responses = responses_.size();
  GetCallback cb = std::move(pending_cb_);
  pending_cb_ = nullptr;
  active_req_ = 0;
  cb(net, out);
}

std::string Confirmation::to_json() const {
  nlohmann::json j;
  j["element-digest"] = to_hex(element_digest);
  j["epoch"] = epoch;
  j["epoch-digest"] = to_hex(epoch_digest);
  auto& s = j["signers"] = nlohmann::json::array();
  for (ProcessId p : signers) s.push_back(raw(p));
  return j.dump();
}

std::optional<Confirmation> verify_stamp(const GetResult& r, const Element& e,
                                         const std::vector<ProcessId>& servers, std::size_t f,
                                         const Keyring& keys) {
  auto h = r.history.epoch_of(e);
  if (!h) return std::nullopt;
  const Digest digest = hash_epoch(r.history.at(*h));

  std::set<ProcessId> signers;
  auto consider = [&](const Element& cand) {
    auto s = SignedEpochHash::parse(cand);
    if (!s || s->h != *h || s->digest != digest) return;
    if (std::find(servers.begin(), servers.end(), s->signer) == servers.end()) return;
    if (!valid(cand, keys)) return;
    signers.insert(s->signer);
  };
  for (const Element& cand : r.theset) consider(cand);
  for (const ElementSet& set : r.history.entries())
    for (const Element& cand : set) consider(cand);
  if (signers.size() < f + 1) return std::nullopt;

  Confirmation c;
  c.element_digest = element_digest(e);
  c.epoch = *h;
  c.epoch_digest = digest;
  c.signers.assign(signers.begin(), signers.end());
  return c;
}

OptimisticClient::OptimisticClient(OptimisticConfig cfg) : cfg_(std::move(cfg)) {
  if (!cfg_.keys) throw std::invalid_argument("optimistic client needs a keyring");
  if (cfg_.servers.empty()) throw std::invalid_argument("optimistic client needs servers");
  if (cfg_.retry.budget == 0) throw std::invalid_argument("retry budget must be positive");
}

void OptimisticClient::add_and_confirm(sim::Network& net, const Element& e, Callback cb) {
  if (cb_) throw SetchainError(Errc::harness, "optimistic client already busy");
  element_ = e;
  cb_ = std::move(cb);
  attempt_ = 0;
  targets_.clear();
  attempt(net);
}

void OptimisticClient::attempt(sim::Network& net) {
  const std::size_t n = cfg_.servers.size();
  target_ = cfg_.servers[(raw(id()) + attempt_) % n];
  targets_.push_back(target_);
  net.send(id(), target_, server::encode_add_request(*element_), "add-request");
  SimTime wait = cfg_.retry.wait;
  for (std::uint32_t k = 0; k < attempt_; ++k) wait *= cfg_.retry.backoff;
  req_id_ = next_req_++;
  net.set_timer(id(), wait, req_id_ << 1);
}

void OptimisticClient::on_timer(sim::Network& net, std::uint64_t tag) {
  if (!cb_ || req_id_ == 0) return;
  if (tag == req_id_ << 1) {
    // Done waiting: probe the same server, and give up on it if it stays mute.
    net.send(id(), target_, server::encode_get_request(req_id_), "get-request");
    net.set_timer(id(), cfg_.retry.wait, (req_id_ << 1) | 1);
  } else if (tag == ((req_id_ << 1) | 1)) {
    req_id_ = 0;
    next_attempt(net);
  }
}

void OptimisticClient::on_message(sim::Network& net, const sim::Envelope& env) {
  if (!cb_ || env.from != target_ || tag_of(env) != server::kGetResponse) return;
  std::pair<std::uint64_t, GetResult> resp;
  try {
    resp = server::decode_get_response(*env.body);
  } catch (const SetchainError&) {
    return;
  }
  if (req_id_ == 0 || resp.first != req_id_) return;
  req_id_ = 0;

  if (auto c = verify_stamp(resp.second, *element_, cfg_.servers, cfg_.f, *cfg_.keys)) {
    Outcome out;
    out.attempts = attempt_ + 1;
    out.targets = targets_;
    out.confirmation = std::move(c);
    finish(net, std::move(out));
    return;
  }
  next_attempt(net);
}

void OptimisticClient::next_attempt(sim::Network& net) {
  if (attempt_ + 1 >= cfg_.retry.budget) {
    Outcome out;
    out.attempts = attempt_ + 1;
    out.targets = targets_;
    out.error = Errc::unconfirmed;
    finish(net, std::move(out));
    return;
  }
  ++attempt_;
  attempt(net);
}

void OptimisticClient::finish(sim::Network& net, Outcome out) {
  Callback cb = std::move(cb_);
  cb_ = nullptr;
  element_.reset();
  cb(net, out);
}

void LyingServer::on_message(sim::Network& net, const sim::Envelope& env) {
  try {
    switch (tag_of(env)) {
      case server::kAddRequest:
        last_ = server::decode_add_request(*env.body);
        return;
      case server::kGetRequest: {
        const std::uint64_t req = server::decode_get_request(*env.body);
        GetResult fake;
        if (last_) {
          ElementSet epoch1{*last_};
          fake.theset = epoch1;
          fake.history.append(1, epoch1);
          fake.epoch = 1;
          SignedEpochHash s;
          s.h = 1;
          s.digest = hash_epoch(epoch1);
          for (ProcessId c : colluders_) {
            s.signer = c;
            fake.theset.insert(s.sign(*keys_));
          }
        }
        net.send(id(), env.from, server::encode_get_response(req, fake), "get-response");
        return;
      }
      default:
        return;
    }
  } catch (const SetchainError& e) {
    if (e.code() != Errc::decode_error) throw;
  }
}

}  // namespace setchain::client
