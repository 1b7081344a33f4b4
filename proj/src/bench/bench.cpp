// SPDX-License-Identifier: Apache-2.0
#include "setchain/bench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "setchain/core/signed_hash.hpp"
#include "setchain/model/havoc.hpp"
#include "setchain/sbc/sbc.hpp"
#include "setchain/server/messages.hpp"

namespace setchain::bench {

std::string_view to_string(Adversary a) {
  switch (a) {
    case Adversary::none: return "none";
    case Adversary::silent: return "silent";
    case Adversary::havoc: return "havoc";
  }
  return "?";
}

Adversary adversary_from_string(std::string_view s) {
  if (s == "none") return Adversary::none;
  if (s == "silent") return Adversary::silent;
  if (s == "havoc") return Adversary::havoc;
  throw SetchainError(Errc::invalid_scenario, "unknown adversary: " + std::string(s));
}

void Scenario::validate() const {
  auto bad = [](const std::string& why) { throw SetchainError(Errc::invalid_scenario, why); };
  if (n < 3 * f + 1) bad("n must be at least 3f+1");
  if (n == 0 || n > 64) bad("n must be in [1,64]");
  if (add_rate < 0 || !std::isfinite(add_rate)) bad("add_rate must be a non-negative number");
  if (epoch_period <= 0) bad("epoch_period must be positive");
  if (duration <= 0) bad("duration must be positive");
  if (drain_limit < 0) bad("negative drain_limit");
  if (sbc_window < 0 || decision_cost < 0) bad("negative set-consensus timing");
  if (havoc_interval <= 0) bad("havoc_interval must be positive");
  if (latency_bucket <= 0) bad("latency_bucket must be positive");
  if (agg.max_wait <= 0) bad("agg.max_wait must be positive");
  if (f == 0 && byzantine != Adversary::none) bad("an adversary needs f >= 1");
  try {
    net.validate();
    scheme_by_name(scheme);
  } catch (const std::invalid_argument& e) {
    bad(e.what());
  }
}

nlohmann::json Scenario::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["n"] = n;
  j["f"] = f;
  j["algorithm"] = std::string(server::to_string(algorithm));
  j["byzantine"] = std::string(bench::to_string(byzantine));
  j["epoch_period"] = epoch_period;
  j["add_rate"] = add_rate;
  j["duration"] = duration;
  j["seed"] = seed;
  j["net"] = {{"latency_min", net.latency_min},
              {"latency_max", net.latency_max},
              {"gst", net.gst},
              {"post_gst_bound", net.post_gst_bound}};
  j["agg"] = {{"max_batch", agg.max_batch}, {"max_wait", agg.max_wait}};
  j["cost"] = {{"msg_ns", cost.msg_ns}, {"request_ns", cost.request_ns}, {"elem_ns", cost.elem_ns}};
  j["sbc"] = {{"window", sbc_window}, {"decision_cost", decision_cost}};
  j["sign_epochs"] = sign_epochs;
  j["scheme"] = scheme;
  j["max_adds"] = max_adds;
  j["havoc_interval"] = havoc_interval;
  j["drain"] = drain;
  j["drain_limit"] = drain_limit;
  j["latency_bucket"] = latency_bucket;
  if (rewards) j["rewards"] = *rewards;
  return j;
}

Scenario Scenario::from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    s.name = j.value("name", s.name);
    s.n = j.value("n", s.n);
    s.f = j.value("f", s.f);
    if (j.contains("algorithm"))
      s.algorithm = server::algorithm_from_string(j.at("algorithm").get<std::string>());
    if (j.contains("byzantine")) s.byzantine = adversary_from_string(j.at("byzantine").get<std::string>());
    s.epoch_period = j.value("epoch_period", s.epoch_period);
    s.add_rate = j.value("add_rate", s.add_rate);
    s.duration = j.value("duration", s.duration);
    s.seed = j.value("seed", s.seed);
    if (j.contains("net")) {
      const auto& n = j.at("net");
      s.net.latency_min = n.value("latency_min", s.net.latency_min);
      s.net.latency_max = n.value("latency_max", s.net.latency_max);
      s.net.gst = n.value("gst", s.net.gst);
      s.net.post_gst_bound = n.value("post_gst_bound", s.net.post_gst_bound);
    }
    if (j.contains("agg")) {
      const auto& a = j.at("agg");
      if (a.value("preset", std::string{}) == "production") s.agg = server::AggConfig::production();
      s.agg.max_batch = a.value("max_batch", s.agg.max_batch);
      s.agg.max_wait = a.value("max_wait", s.agg.max_wait);
    }
    if (j.contains("cost")) {
      const auto& c = j.at("cost");
      s.cost.msg_ns = c.value("msg_ns", s.cost.msg_ns);
      s.cost.request_ns = c.value("request_ns", s.cost.request_ns);
      s.cost.elem_ns = c.value("elem_ns", s.cost.elem_ns);
    }
    if (j.contains("sbc")) {
      s.sbc_window = j.at("sbc").value("window", s.sbc_window);
      s.decision_cost = j.at("sbc").value("decision_cost", s.decision_cost);
    }
    s.sign_epochs = j.value("sign_epochs", s.sign_epochs);
    s.scheme = j.value("scheme", s.scheme);
    s.max_adds = j.value("max_adds", s.max_adds);
    s.havoc_interval = j.value("havoc_interval", s.havoc_interval);
    s.drain = j.value("drain", s.drain);
    s.drain_limit = j.value("drain_limit", s.drain_limit);
    s.latency_bucket = j.value("latency_bucket", s.latency_bucket);
    if (j.contains("rewards")) s.rewards = j.at("rewards");
  } catch (const nlohmann::json::exception& e) {
    throw SetchainError(Errc::invalid_scenario, e.what());
  } catch (const std::invalid_argument& e) {
    throw SetchainError(Errc::invalid_scenario, e.what());
  }
  s.validate();
  return s;
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["n"] = n;
  j["f"] = f;
  j["algorithm"] = algorithm;
  j["byzantine"] = byzantine;
  j["duration"] = duration;
  j["sbc_window"] = sbc_window;
  j["decision_cost"] = decision_cost;
  j["adds_attempted"] = adds_attempted;
  j["adds_accepted"] = adds_accepted;
  j["adds_stamped"] = adds_stamped;
  j["epochs_completed"] = epochs_completed;
  j["messages"] = messages;
  j["events"] = events;
  j["message_count"] = message_count;
  auto& lat = j["stamp_latency"] = nlohmann::json::array();
  for (const auto& b : stamp_latency)
    lat.push_back({{"start", b.start}, {"count", b.count}, {"max", b.max}, {"avg", b.avg}});
  j["property_violations"] = property_violations;
  j["drained"] = drained;
  j["rewards_minted"] = rewards_minted;
  return j;
}

namespace {

constexpr std::uint32_t kSbcId = 1000;
constexpr std::uint32_t kLoadId = 2000;
constexpr std::uint32_t kDriverId = 2001;
constexpr std::size_t kMaxViolations = 20;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a * 0x9e3779b97f4a7c15ull ^ (b + 0x632be59bd9b4e019ull);
  x ^= x >> 31;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 29;
  return x;
}

class LoadGenerator : public sim::Process {
 public:
  using IssueFn = std::function<void(const Element&)>;

  LoadGenerator(std::vector<ProcessId> servers, double rate, std::uint64_t max_adds,
                std::shared_ptr<const Keyring> keys, std::uint64_t seed, IssueFn on_issue)
      : servers_(std::move(servers)),
        rate_(rate),
        max_adds_(max_adds),
        keys_(std::move(keys)),
        rng_(seed),
        on_issue_(std::move(on_issue)) {
    interval_ = std::max<SimTime>(1, static_cast<SimTime>(kTicksPerSecond / std::max(rate_, 1.0)));
  }

  void start(sim::Network& net) {
    if (rate_ <= 0) return;
    active_ = true;
    net.set_timer(id(), interval_, 0);
  }
  void stop() { active_ = false; }
  std::uint64_t issued() const { return issued_; }

  void on_message(sim::Network&, const sim::Envelope&) override {}

  void on_timer(sim::Network& net, std::uint64_t) override {
    if (!active_) return;
    owed_ += rate_ * static_cast<double>(interval_) / kTicksPerSecond;
    while (owed_ >= 1.0 && (max_adds_ == 0 || issued_ < max_adds_)) {
      owed_ -= 1.0;
      issue(net);
    }
    if (max_adds_ != 0 && issued_ >= max_adds_) return;
    net.set_timer(id(), interval_, 0);
  }

 private:
  void issue(sim::Network& net) {
    const std::size_t len = std::uniform_int_distribution<std::size_t>(116, 126)(rng_);
    Bytes payload(len);
    for (std::size_t i = 0; i < 8; ++i) payload[i] = static_cast<std::uint8_t>(issued_ >> (8 * i));
    for (std::size_t i = 8; i < len; ++i) payload[i] = static_cast<std::uint8_t>(rng_());
    Element e = Element::sign(*keys_, id(), std::move(payload));
    on_issue_(e);
    const ProcessId to = servers_[issued_ % servers_.size()];
    ++issued_;
    net.send(id(), to, server::encode_add_request(e), "add-request");
  }

  std::vector<ProcessId> servers_;
  double rate_;
  std::uint64_t max_adds_;
  std::shared_ptr<const Keyring> keys_;
  std::mt19937_64 rng_;
  IssueFn on_issue_;
  SimTime interval_ = 1;
  double owed_ = 0;
  std::uint64_t issued_ = 0;
  bool active_ = false;
};

// Issues epoch increments to f+1 servers every period, each carrying the
// target's next epoch number.
class EpochDriver : public sim::Process {
 public:
  using NextFn = std::function<EpochNumber(ProcessId)>;

  EpochDriver(std::vector<ProcessId> servers, std::size_t f, SimTime period, NextFn next)
      : servers_(std::move(servers)), f_(f), period_(period), next_(std::move(next)) {}

  void start(sim::Network& net) {
    active_ = true;
    net.set_timer(id(), period_, ++generation_);
  }
  void stop() {
    active_ = false;
    ++generation_;
  }

  void on_message(sim::Network&, const sim::Envelope&) override {}

  void on_timer(sim::Network& net, std::uint64_t tag) override {
    if (!active_ || tag != generation_) return;
    for (std::size_t k = 0; k <= f_; ++k) {
      const ProcessId to = servers_[(rotation_ + k) % servers_.size()];
      net.send(id(), to, server::encode_epochinc_request(next_(to)), "epochinc-request");
    }
    rotation_ = (rotation_ + 1) % servers_.size();
    net.set_timer(id(), period_, generation_);
  }

 private:
  std::vector<ProcessId> servers_;
  std::size_t f_;
  SimTime period_;
  NextFn next_;
  bool active_ = false;
  std::uint64_t generation_ = 0;
  std::size_t rotation_ = 0;
};

class Harness {
 public:
  Harness(const Scenario& sc, RunReport& rep) : sc_(sc), rep_(rep), net_(net_config(sc)) {}

  void run();

 private:
  static sim::NetConfig net_config(const Scenario& sc) {
    sim::NetConfig c = sc.net;
    c.rng_seed = mix(sc.seed, 1);
    return c;
  }

  void violation(std::string what) {
    if (rep_.property_violations.size() >= kMaxViolations) return;
    std::ostringstream os;
    os << "t=" << net_.now() << " " << what << " [scenario " << sc_.name << ", seed " << sc_.seed << "]";
    rep_.property_violations.push_back(os.str());
  }

  bool is_payload(const Element& e) const {
    return !sc_.sign_epochs || !SignedEpochHash::parse(e).has_value();
  }

  void build();
  void on_stamp(ProcessId s, EpochNumber h, const ElementSet& E);
  void after_handler(ProcessId who);
  bool settled() const;
  void final_checks();
  void tally_rewards();

  const Scenario& sc_;
  RunReport& rep_;
  std::shared_ptr<Keyring> keys_;
  sim::Network net_;
  std::vector<ProcessId> servers_;
  std::vector<server::Server*> correct_;
  std::unordered_map<ProcessId, server::Server*> by_id_;
  std::vector<model::HavocServer*> havocs_;
  sbc::Service* service_ = nullptr;
  LoadGenerator* load_ = nullptr;
  EpochDriver* driver_ = nullptr;

  std::unordered_set<Element, ElementHash> provenance_;
  std::unordered_map<Element, SimTime, ElementHash> requested_;
  std::vector<std::pair<ProcessId, Element>> accepted_;
  std::vector<ElementSet> global_history_;
  std::vector<std::pair<ProcessId, EpochNumber>> pending_stamps_;
  std::unordered_map<ProcessId, std::unordered_set<Element, ElementHash>> stamped_;
  std::vector<Element> pending_inserts_;
  std::optional<server::Central> oracle_;
};

void Harness::build() {
  keys_ = std::make_shared<Keyring>(scheme_by_name(sc_.scheme), mix(sc_.seed, 2));
  for (std::uint32_t i = 0; i < sc_.n; ++i) servers_.push_back(make_pid(i));
  for (ProcessId p : servers_) keys_->register_process(p);
  keys_->register_process(make_pid(kLoadId));

  std::vector<ProcessId> order = servers_;
  std::mt19937_64 placement(mix(sc_.seed, 3));
  std::shuffle(order.begin(), order.end(), placement);
  std::set<ProcessId> byz;
  if (sc_.byzantine != Adversary::none) byz.insert(order.begin(), order.begin() + sc_.f);
  if (sc_.byzantine == Adversary::none) oracle_.emplace(keys_);

  auto shared = std::make_shared<model::HavocShared>();
  for (ProcessId p : servers_) {
    if (byz.contains(p)) {
      if (sc_.byzantine == Adversary::silent) {
        net_.spawn<server::SilentServer>(p, ProcessKind::byzantine_server);
      } else {
        model::HavocConfig hc;
        hc.members = servers_;
        hc.sbc = make_pid(kSbcId);
        hc.keys = keys_;
        hc.shared = shared;
        hc.seed = mix(sc_.seed, 100 + raw(p));
        hc.mean_interval = sc_.havoc_interval;
        hc.on_emit = [this](const Element& e) { provenance_.insert(e); };
        havocs_.push_back(&net_.spawn<model::HavocServer>(p, ProcessKind::byzantine_server, hc));
      }
      continue;
    }
    server::ServerConfig cfg;
    cfg.algorithm = sc_.algorithm;
    cfg.members = servers_;
    cfg.f = sc_.f;
    cfg.sbc = make_pid(kSbcId);
    cfg.keys = keys_;
    cfg.agg = sc_.agg;
    cfg.cost = sc_.cost;
    cfg.sign_epochs = sc_.sign_epochs;
    auto& s = net_.spawn<server::Server>(p, ProcessKind::correct_server, cfg);
    s.set_stamp_hook([this](ProcessId who, EpochNumber h, const ElementSet& E) { on_stamp(who, h, E); });
    s.set_add_hook([this](ProcessId who, const Element& e) {
      provenance_.insert(e);
      accepted_.emplace_back(who, e);
      if (oracle_) oracle_->add(e);
    });
    s.set_insert_hook([this](ProcessId, const Element& e) { pending_inserts_.push_back(e); });
    correct_.push_back(&s);
    by_id_[p] = &s;
  }

  sbc::ServiceConfig scfg;
  scfg.members = servers_;
  scfg.window = sc_.sbc_window;
  scfg.gst = sc_.net.gst;
  scfg.decision_cost = sc_.decision_cost;
  scfg.retain = false;
  service_ = &net_.spawn<sbc::Service>(make_pid(kSbcId), ProcessKind::service, scfg);
  service_->set_proposal_hook([this](ProcessId, EpochNumber, const ElementSet& prop) {
    for (const Element& e : prop) provenance_.insert(e);
  });

  load_ = &net_.spawn<LoadGenerator>(make_pid(kLoadId), ProcessKind::client, servers_, sc_.add_rate,
                                     sc_.max_adds, keys_, mix(sc_.seed, 4), [this](const Element& e) {
                                       provenance_.insert(e);
                                       requested_.emplace(e, net_.now());
                                     });
  driver_ = &net_.spawn<EpochDriver>(make_pid(kDriverId), ProcessKind::client, servers_, sc_.f,
                                     sc_.epoch_period, [this](ProcessId to) {
                                       auto it = by_id_.find(to);
                                       if (it != by_id_.end()) return it->second->epoch() + 1;
                                       EpochNumber top = 0;
                                       for (auto* s : correct_) top = std::max(top, s->epoch());
                                       return top + 1;
                                     });
  net_.set_log_enabled(false);
  net_.set_after_handler([this](ProcessId who) { after_handler(who); });
}

void Harness::on_stamp(ProcessId s, EpochNumber h, const ElementSet& E) {
  pending_stamps_.emplace_back(s, h);
  if (h <= global_history_.size()) {
    if (global_history_[h - 1] != E)
      violation("P6 consistent gets: server " + std::to_string(raw(s)) + " stamped a different set for epoch " +
                std::to_string(h));
    return;
  }
  if (h != global_history_.size() + 1) {
    violation("stamp out of order at server " + std::to_string(raw(s)));
    return;
  }
  global_history_.push_back(E);
  if (oracle_) oracle_->epoch_inc(h);
  for (const Element& e : E) {
    auto it = requested_.find(e);
    if (it == requested_.end()) continue;
    const SimTime latency = net_.now() - it->second;
    if (it->second < sc_.duration) rep_.latency_samples.emplace_back(it->second, latency);
    if (net_.now() <= sc_.duration) ++rep_.adds_stamped;
  }
}

void Harness::after_handler(ProcessId who) {
  if (pending_stamps_.empty() && pending_inserts_.empty()) return;
  for (const auto& [s, h] : pending_stamps_) {
    const server::Server& srv = *by_id_.at(s);
    const History& hist = srv.history();
    auto& seen = stamped_[s];
    for (const Element& e : hist.at(h)) {
      if (!srv.theset().contains(e))
        violation("P1 consistent sets: history(" + std::to_string(h) + ") not within theset at server " +
                  std::to_string(raw(s)));
      if (!seen.insert(e).second)
        violation("P5 unique epoch: element stamped twice at server " + std::to_string(raw(s)));
    }
    if (srv.epoch() != hist.size())
      violation("epoch does not match history length at server " + std::to_string(raw(s)));
  }
  for (const Element& e : pending_inserts_)
    if (!provenance_.contains(e))
      violation("P8 add-before-get: element without provenance entered theset at server " +
                std::to_string(raw(who)));
  pending_stamps_.clear();
  pending_inserts_.clear();
}

bool Harness::settled() const {
  for (const auto* s : correct_) {
    for (const Element& e : s->unstamped())
      if (is_payload(e)) return false;
    for (const auto& [e, t] : s->tobroadcast())
      if (is_payload(e)) return false;
  }
  for (const auto& [who, e] : accepted_) {
    if (!is_payload(e)) continue;
    for (const auto* s : correct_)
      if (!s->history().contains(e)) return false;
  }
  return true;
}

void Harness::final_checks() {
  if (correct_.empty()) return;
  const server::Server& ref = *correct_.front();
  for (const auto* s : correct_) {
    if (s->theset() != ref.theset())
      violation("P3 get-global: thesets of servers " + std::to_string(raw(ref.id())) + " and " +
                std::to_string(raw(s->id())) + " differ at quiescence");
    if (!(s->history() == ref.history()))
      violation("P6 consistent gets: histories of servers " + std::to_string(raw(ref.id())) + " and " +
                std::to_string(raw(s->id())) + " differ at quiescence");
    for (const Element& e : s->unstamped())
      if (is_payload(e)) {
        violation("P4 eventual-get: unstamped element at server " + std::to_string(raw(s->id())));
        break;
      }
  }
  for (const auto& [who, e] : accepted_) {
    if (!by_id_.at(who)->theset().contains(e)) {
      violation("P2 add-get-local: accepted element missing from theset of server " +
                std::to_string(raw(who)));
      break;
    }
    if (!is_payload(e)) continue;
    bool everywhere = true;
    for (const auto* s : correct_) everywhere = everywhere && s->history().contains(e);
    if (!everywhere) {
      violation("get-after-add: accepted element not stamped at every correct server");
      break;
    }
  }
  if (oracle_) {
    oracle_->epoch_inc(oracle_->get().epoch + 1);
    const GetResult reference = oracle_->get();
    ElementSet expected, got;
    for (const ElementSet& s : reference.history.entries())
      for (const Element& e : s)
        if (is_payload(e)) expected.insert(e);
    for (const ElementSet& s : ref.history().entries())
      for (const Element& e : s)
        if (is_payload(e)) got.insert(e);
    if (expected != got)
      violation("oracle convergence: stamped set differs from the sequential reference (" +
                std::to_string(got.size()) + " vs " + std::to_string(expected.size()) + ")");
  }
}

void Harness::tally_rewards() {
  if (!sc_.rewards || !sc_.sign_epochs || correct_.empty()) return;
  nlohmann::json j = *sc_.rewards;
  if (!j.contains("n")) j["n"] = sc_.n;
  if (!j.contains("f")) j["f"] = sc_.f;
  const auto params = incentives::RewardParams::from_json(j);
  const History& hist = correct_.front()->history();
  for (EpochNumber h = 1; h <= hist.size(); ++h) {
    const auto signers = incentives::epoch_signers(hist, h, servers_, *keys_);
    rep_.rewards_minted += incentives::reward(hist.at(h).size(), signers.size(), params);
  }
}

void Harness::run() {
  build();
  for (auto* h : havocs_) h->start(net_);
  load_->start(net_);
  driver_->start(net_);

  net_.run_until(sc_.duration);
  for (auto* s : correct_) rep_.epochs_completed = std::max<std::uint64_t>(rep_.epochs_completed, s->epoch());
  rep_.messages = net_.messages_sent();
  rep_.message_count.insert(net_.message_counts().begin(), net_.message_counts().end());
  rep_.adds_attempted = load_->issued();
  rep_.adds_accepted = 0;
  for (const auto& [who, e] : accepted_)
    if (requested_.contains(e)) ++rep_.adds_accepted;

  if (sc_.drain) {
    load_->stop();
    for (auto* h : havocs_) h->stop();
    const SimTime deadline = sc_.duration + sc_.drain_limit;
    bool ok = false;
    // Elements can surface after the driver stops (late Byzantine traffic),
    // so keep alternating until a quiescent state is also settled.
    for (int round = 0; round < 8 && !ok; ++round) {
      driver_->start(net_);
      while (net_.now() < deadline && !settled()) net_.run_until(net_.now() + sc_.epoch_period);
      driver_->stop();
      if (!net_.run_until_quiescent(deadline + sc_.drain_limit)) break;
      ok = settled();
      if (net_.now() >= deadline) break;
    }
    rep_.drained = ok;
    if (!ok) violation("liveness: elements still unstamped after the drain limit");
    final_checks();
  }
  tally_rewards();
  rep_.events = net_.events_processed();

  std::map<SimTime, LatencyBucket> buckets;
  for (const auto& [t, lat] : rep_.latency_samples) {
    auto& b = buckets[t / sc_.latency_bucket];
    b.start = (t / sc_.latency_bucket) * sc_.latency_bucket;
    b.max = std::max(b.max, lat);
    b.avg += static_cast<double>(lat);
    ++b.count;
  }
  for (auto& [k, b] : buckets) {
    b.avg /= static_cast<double>(b.count);
    rep_.stamp_latency.push_back(b);
  }
}

}  // namespace

RunReport run_scenario(const Scenario& s) {
  s.validate();
  RunReport rep;
  rep.scenario = s.name;
  rep.seed = s.seed;
  rep.n = s.n;
  rep.f = s.f;
  rep.algorithm = std::string(server::to_string(s.algorithm));
  rep.byzantine = std::string(to_string(s.byzantine));
  rep.duration = s.duration;
  rep.sbc_window = s.sbc_window;
  rep.decision_cost = s.decision_cost;
  Harness h(s, rep);
  try {
    h.run();
  } catch (const SetchainError& e) {
    rep.property_violations.push_back(std::string("harness failure: ") + e.what());
  }
  std::sort(rep.latency_samples.begin(), rep.latency_samples.end());
  return rep;
}

Metric metric_from_string(std::string_view s) {
  if (s == "adds_per_sec") return Metric::adds_per_sec;
  if (s == "epochs_per_sec") return Metric::epochs_per_sec;
  if (s == "messages_per_add") return Metric::messages_per_add;
  throw std::invalid_argument("unknown metric: " + std::string(s));
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::adds_per_sec: return "adds_per_sec";
    case Metric::epochs_per_sec: return "epochs_per_sec";
    case Metric::messages_per_add: return "messages_per_add";
  }
  return "?";
}

double metric_value(const RunReport& r, Metric m) {
  switch (m) {
    case Metric::adds_per_sec:
    case Metric::epochs_per_sec:
      if (r.duration <= 0) throw SetchainError(Errc::degenerate_metric, "zero-length run");
      return static_cast<double>(m == Metric::adds_per_sec ? r.adds_stamped : r.epochs_completed) /
             r.seconds();
    case Metric::messages_per_add:
      if (r.adds_stamped == 0) throw SetchainError(Errc::degenerate_metric, "no stamped adds");
      return static_cast<double>(r.messages) / static_cast<double>(r.adds_stamped);
  }
  throw SetchainError(Errc::degenerate_metric, "unknown metric");
}

double compare(const RunReport& a, const RunReport& b, Metric m) {
  const double den = metric_value(b, m);
  if (den == 0) throw SetchainError(Errc::degenerate_metric, std::string(to_string(m)) + " is zero");
  return metric_value(a, m) / den;
}

double compare_within(const RunReport& r, Metric num, Metric den) {
  const double d = metric_value(r, den);
  if (d == 0) throw SetchainError(Errc::degenerate_metric, std::string(to_string(den)) + " is zero");
  return metric_value(r, num) / d;
}

std::vector<double> windowed_median_latency(const RunReport& r, std::size_t windows) {
  std::vector<double> out(windows, 0.0);
  if (windows == 0 || r.duration <= 0) return out;
  std::vector<std::vector<SimTime>> slices(windows);
  for (const auto& [t, lat] : r.latency_samples) {
    const auto k = static_cast<std::size_t>(t * static_cast<SimTime>(windows) / r.duration);
    if (k < windows) slices[k].push_back(lat);
  }
  for (std::size_t k = 0; k < windows; ++k) {
    auto& v = slices[k];
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    out[k] = v.size() % 2 ? static_cast<double>(v[mid]) : (v[mid - 1] + v[mid]) / 2.0;
  }
  return out;
}

std::vector<RunReport> run_matrix(const std::vector<Scenario>& scenarios, unsigned threads) {
  std::vector<RunReport> out(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) out[i] = run_scenario(scenarios[i]);
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(scenarios.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

std::string csv_header() {
  return "scenario,seed,n,f,algorithm,byzantine,duration,adds_attempted,adds_accepted,adds_stamped,"
         "epochs_completed,messages,adds_per_sec,epochs_per_sec,violations";
}

std::string csv_row(const RunReport& r) {
  std::ostringstream os;
  os << r.scenario << ',' << r.seed << ',' << r.n << ',' << r.f << ',' << r.algorithm << ','
     << r.byzantine << ',' << r.duration << ',' << r.adds_attempted << ',' << r.adds_accepted << ','
     << r.adds_stamped << ',' << r.epochs_completed << ',' << r.messages << ','
     << (r.duration > 0 ? r.adds_stamped / r.seconds() : 0.0) << ','
     << (r.duration > 0 ? r.epochs_completed / r.seconds() : 0.0) << ','
     << r.property_violations.size();
  return os.str();
}

}  // namespace setchain::bench
