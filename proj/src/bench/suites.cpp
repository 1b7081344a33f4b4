// SPDX-License-Identifier: Apache-2.0
#include "setchain/bench/suites.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "setchain/brb/brb.hpp"
#include "setchain/client/client.hpp"
#include "setchain/core/digest.hpp"
#include "setchain/incentives/incentives.hpp"
#include "setchain/sbc/sbc.hpp"
#include "setchain/server/messages.hpp"

namespace setchain::bench {

namespace {

constexpr std::size_t kKeptFailures = 10;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

std::string tag(std::size_t n, std::size_t f, std::uint64_t seed) {
  return "(n=" + std::to_string(n) + ",f=" + std::to_string(f) + ",seed=" + std::to_string(seed) + ")";
}

std::vector<ProcessId> pids(std::size_t n) {
  std::vector<ProcessId> out;
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(make_pid(i));
  return out;
}

// Seeded choice of f Byzantine positions among n.
std::set<ProcessId> pick_byzantine(std::size_t n, std::size_t f, std::mt19937_64& rng) {
  auto all = pids(n);
  std::shuffle(all.begin(), all.end(), rng);
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(f)};
}

// ---------------------------------------------------------------- BRB ----

enum class BrbFault : std::uint8_t { silent, equivocate, forge };

class BrbNode : public sim::Process {
 public:
  struct Delivery {
    ProcessId origin;
    Bytes payload;
  };

  BrbNode(ProcessId self, std::vector<ProcessId> members, std::size_t f)
      : engine_(self, std::move(members), f, [this](sim::Network&, ProcessId origin, const Bytes& p) {
          delivered.push_back({origin, p});
        }) {}

  void on_message(sim::Network& net, const sim::Envelope& env) override { engine_.handle(net, env); }
  void on_timer(sim::Network& net, std::uint64_t tag) override { engine_.broadcast(net, outbox.at(tag)); }

  std::vector<Bytes> outbox;
  std::vector<Delivery> delivered;

 private:
  brb::Engine engine_;
};

// Members of one coalition share the fault and the random stream, so they
// forge the same instance and back the same equivocation.
class BrbAdversary : public sim::Process {
 public:
  BrbAdversary(BrbFault fault, ProcessId leader, std::vector<ProcessId> members,
               std::vector<ProcessId> correct, std::uint64_t coalition_seed)
      : fault_(fault),
        leader_(leader),
        members_(std::move(members)),
        correct_(std::move(correct)),
        rng_(coalition_seed) {}

  void on_message(sim::Network&, const sim::Envelope&) override {}

  void on_timer(sim::Network& net, std::uint64_t) override {
    auto frame_to = [&](ProcessId to, brb::Phase ph, ProcessId origin, const Bytes& payload) {
      const Digest d = sha256(payload);
      const Bytes body = brb::encode_frame(ph, origin, d, ph == brb::Phase::ready ? ByteView{} : ByteView(payload));
      net.send(id(), to, body, "brb-byz");
    };
    switch (fault_) {
      case BrbFault::silent:
        return;
      case BrbFault::equivocate: {
        // The leader splits two INITs across the members; everyone in the
        // coalition echoes and readies both to everybody.
        const Bytes a = random_payload(), b = random_payload();
        if (id() == leader_)
          for (std::size_t i = 0; i < members_.size(); ++i)
            frame_to(members_[i], brb::Phase::init, id(), i % 2 ? a : b);
        for (ProcessId m : members_)
          for (const Bytes* x : {&a, &b}) {
            frame_to(m, brb::Phase::echo, leader_, *x);
            frame_to(m, brb::Phase::ready, leader_, *x);
          }
        return;
      }
      case BrbFault::forge: {
        // Claims a correct origin broadcast something it never did.
        const ProcessId victim = correct_[rng_() % correct_.size()];
        const Bytes fake = random_payload();
        for (ProcessId m : members_) {
          frame_to(m, brb::Phase::init, victim, fake);
          frame_to(m, brb::Phase::echo, victim, fake);
          frame_to(m, brb::Phase::ready, victim, fake);
        }
        return;
      }
    }
  }

 private:
  Bytes random_payload() {
    Bytes p(12);
    for (auto& b : p) b = static_cast<std::uint8_t>(rng_());
    p[0] = 0xBB;
    return p;
  }

  BrbFault fault_;
  ProcessId leader_;
  std::vector<ProcessId> members_;
  std::vector<ProcessId> correct_;
  std::mt19937_64 rng_;
};

void brb_case(std::size_t n, std::size_t f, std::uint64_t seed, SuiteResult& out) {
  std::mt19937_64 rng(seed * 7919 + n);
  sim::NetConfig nc;
  nc.latency_max = 20;
  nc.gst = std::uniform_int_distribution<SimTime>(0, 500)(rng);
  nc.rng_seed = rng();
  sim::Network net(nc);
  const auto members = pids(n);
  const auto byz = pick_byzantine(n, f, rng);
  std::vector<ProcessId> correct;
  for (ProcessId p : members)
    if (!byz.contains(p)) correct.push_back(p);

  std::map<ProcessId, BrbNode*> nodes;
  for (ProcessId p : correct) {
    auto& node = net.spawn<BrbNode>(p, ProcessKind::correct_server, p, members, f);
    for (std::uint64_t k = 0; k < 2; ++k) {
      Bytes payload{static_cast<std::uint8_t>(raw(p)), static_cast<std::uint8_t>(k),
                    static_cast<std::uint8_t>(rng())};
      node.outbox.push_back(payload);
      net.set_timer(p, std::uniform_int_distribution<SimTime>(0, 200)(rng), k);
    }
    nodes[p] = &node;
  }
  const auto fault = static_cast<BrbFault>(rng() % 3);
  const std::uint64_t coalition_seed = rng();
  const SimTime strike = std::uniform_int_distribution<SimTime>(0, 200)(rng);
  for (ProcessId p : byz) {
    net.spawn<BrbAdversary>(p, ProcessKind::byzantine_server, fault, *byz.begin(), members, correct,
                            coalition_seed);
    net.set_timer(p, strike, 0);
  }
  const std::string where = tag(n, f, seed);
  if (!net.run_until_quiescent(1'000'000)) {
    out.fail("BRB run did not quiesce " + where);
    return;
  }

  std::set<std::pair<ProcessId, Bytes>> reference;
  bool first = true;
  for (auto& [p, node] : nodes) {
    std::set<std::pair<ProcessId, Bytes>> got;
    for (const auto& d : node->delivered) {
      if (!got.emplace(d.origin, d.payload).second) out.fail("BRB no-duplication " + where);
      auto it = nodes.find(d.origin);
      if (it != nodes.end() &&
          std::find(it->second->outbox.begin(), it->second->outbox.end(), d.payload) == it->second->outbox.end())
        out.fail("BRB validity: delivered a message a correct origin never broadcast " + where);
    }
    for (const Bytes& mine : node->outbox)
      if (!got.contains({p, mine})) out.fail("BRB local termination " + where);
    if (first) {
      reference = got;
      first = false;
    } else if (got != reference) {
      out.fail("BRB global termination: correct processes delivered different sets " + where);
    }
  }
}

// ---------------------------------------------------------------- SBC ----

class SbcProbe : public sim::Process {
 public:
  struct Plan {
    EpochNumber h;
    ElementSet prop;
  };

  explicit SbcProbe(ProcessId service) : service_(service) {}

  void on_message(sim::Network&, const sim::Envelope& env) override {
    switch (sbc::tag_of(env)) {
      case sbc::kSetDeliverTag: {
        auto sd = sbc::decode_set_deliver(*env.body);
        if (deliveries.contains(sd.h)) ++duplicate_deliveries;
        deliveries[sd.h] = *env.body;
        return;
      }
      case sbc::kInformTag:
        informs.push_back(sbc::decode_inform(*env.body));
        return;
      default:
        return;
    }
  }

  void on_timer(sim::Network& net, std::uint64_t tag) override {
    const Plan& p = plan.at(tag);
    net.send(id(), service_, sbc::encode_propose(p.h, p.prop), "sbc-propose");
  }

  std::vector<Plan> plan;
  std::map<EpochNumber, Bytes> deliveries;
  std::vector<sbc::Inform> informs;
  std::uint64_t duplicate_deliveries = 0;

 private:
  ProcessId service_;
};

constexpr EpochNumber kSbcInstances = 6;
constexpr SimTime kSbcSpacing = 300;

void sbc_case(std::size_t n, std::size_t f, std::uint64_t seed, bool all_correct, SuiteResult& out) {
  std::mt19937_64 rng(seed * 104729 + n * 2 + (all_correct ? 1 : 0));
  auto keys = std::make_shared<Keyring>(make_hmac_scheme(), seed);
  const auto members = pids(n);
  for (ProcessId p : members) keys->register_process(p);
  sim::NetConfig nc;
  nc.latency_max = all_correct ? 5 : 40;
  nc.gst = all_correct ? 0 : std::uniform_int_distribution<SimTime>(0, 1200)(rng);
  nc.rng_seed = rng();
  sim::Network net(nc);
  const ProcessId service_id = make_pid(1000);
  sbc::ServiceConfig scfg;
  scfg.members = members;
  scfg.gst = nc.gst;
  scfg.decision_cost = 20;
  net.spawn<sbc::Service>(service_id, ProcessKind::service, scfg);
  const auto byz = all_correct ? std::set<ProcessId>{} : pick_byzantine(n, f, rng);

  std::uint64_t counter = 0;
  auto fresh = [&](ProcessId author) {
    Bytes payload(10);
    for (std::size_t i = 0; i < 8; ++i) payload[i] = static_cast<std::uint8_t>(counter >> (8 * i));
    payload[8] = static_cast<std::uint8_t>(raw(author));
    payload[9] = static_cast<std::uint8_t>(seed);
    ++counter;
    return Element::sign(*keys, author, std::move(payload));
  };

  // Every proposal sent, by (proposer, h), for the validity checks.
  std::map<std::pair<ProcessId, EpochNumber>, std::vector<ElementSet>> sent;
  std::map<EpochNumber, Element> common;
  std::map<EpochNumber, SimTime> start;
  std::map<ProcessId, SbcProbe*> probes;
  for (ProcessId p : members) probes[p] = &net.spawn<SbcProbe>(p, ProcessKind::correct_server, service_id);

  const Element shared_single = fresh(make_pid(0));
  for (EpochNumber h = 1; h <= kSbcInstances; ++h) {
    start[h] = static_cast<SimTime>(h) * kSbcSpacing;
    common.emplace(h, all_correct ? shared_single : fresh(make_pid(0)));
  }
  for (ProcessId p : members) {
    SbcProbe& probe = *probes[p];
    const bool faulty = byz.contains(p);
    for (EpochNumber h = 1; h <= (all_correct ? 1 : kSbcInstances); ++h) {
      std::vector<std::pair<SimTime, ElementSet>> mine;
      if (all_correct) {
        mine.push_back({start[h], ElementSet{common.at(h)}});
      } else if (!faulty) {
        ElementSet s{common.at(h)};
        for (std::uint64_t k = rng() % 3; k > 0; --k) s.insert(fresh(p));
        mine.push_back({start[h] + static_cast<SimTime>(rng() % 20), s});
      } else {
        // Byzantine: nothing, one odd proposal, or several different ones.
        const auto copies = rng() % 3;
        for (std::uint64_t c = 0; c < copies; ++c) {
          ElementSet s;
          for (std::uint64_t k = rng() % 3; k > 0; --k) s.insert(fresh(p));
          if (rng() % 2) s.insert(Element(Bytes{0xDE, 0xAD}, p, Bytes(32, 0)));
          mine.push_back({start[h] + static_cast<SimTime>(rng() % 200), s});
        }
      }
      for (auto& [at, s] : mine) {
        sent[{p, h}].push_back(s);
        probe.plan.push_back({h, s});
        net.set_timer(p, at, probe.plan.size() - 1);
      }
    }
  }

  const std::string where = tag(n, f, seed) + (all_correct ? " all-correct" : "");
  if (!net.run_until_quiescent(10'000'000)) {
    out.fail("SBC run did not quiesce " + where);
    return;
  }
  const EpochNumber instances = all_correct ? 1 : kSbcInstances;
  for (EpochNumber h = 1; h <= instances; ++h) {
    std::optional<Bytes> agreed;
    for (auto& [p, probe] : probes) {
      if (byz.contains(p)) continue;
      auto it = probe->deliveries.find(h);
      if (it == probe->deliveries.end()) {
        out.fail("SBC termination: instance " + std::to_string(h) + " never delivered " + where);
        continue;
      }
      if (!agreed) agreed = it->second;
      else if (*agreed != it->second)
        out.fail("SBC agreement: instance " + std::to_string(h) + " " + where);
      if (probe->duplicate_deliveries) out.fail("SBC delivered an instance twice " + where);
    }
    if (!agreed) continue;
    const auto decided = sbc::decode_set_deliver(*agreed);
    for (const auto& [proposer, s] : decided.decision) {
      auto it = sent.find({proposer, h});
      if (it == sent.end() || std::find(it->second.begin(), it->second.end(), s) == it->second.end())
        out.fail("SBC validity: decided set was never proposed " + where);
    }
    const ElementSet all = sbc::decision_union(decided.decision);
    if (all_correct) {
      if (all != ElementSet{common.at(h)}) out.fail("SBC nontriviality " + where);
    } else if (start[h] >= nc.gst && !all.contains(common.at(h))) {
      out.fail("SBC censorship resistance: common element dropped after gst " + where);
    }
  }
  for (auto& [p, probe] : probes) {
    if (byz.contains(p)) continue;
    for (const auto& inf : probe->informs) {
      auto it = sent.find({inf.proposer, inf.h});
      if (it == sent.end() || std::find(it->second.begin(), it->second.end(), inf.prop) == it->second.end())
        out.fail("SBC inform validity " + where);
    }
  }
}

// ------------------------------------------------------------- clients ----

// Sends each server an epoch increment for its next epoch every period.
class Ticker : public sim::Process {
 public:
  Ticker(std::vector<server::Server*> correct, std::vector<ProcessId> others, SimTime period)
      : correct_(std::move(correct)), others_(std::move(others)), period_(period) {}

  void start(sim::Network& net) { net.set_timer(id(), period_, 0); }
  void stop() { stopped_ = true; }

  void on_message(sim::Network&, const sim::Envelope&) override {}
  void on_timer(sim::Network& net, std::uint64_t) override {
    if (stopped_) return;
    EpochNumber top = 0;
    for (auto* s : correct_) {
      net.send(id(), s->id(), server::encode_epochinc_request(s->epoch() + 1), "epochinc-request");
      top = std::max(top, s->epoch());
    }
    for (ProcessId p : others_) net.send(id(), p, server::encode_epochinc_request(top + 1), "epochinc-request");
    net.set_timer(id(), period_, 0);
  }

 private:
  std::vector<server::Server*> correct_;
  std::vector<ProcessId> others_;
  SimTime period_;
  bool stopped_ = false;
};

enum class ClientFault : std::uint8_t { none, liar, forged_digest };

struct ClientWorld {
  std::shared_ptr<Keyring> keys;
  std::unique_ptr<sim::Network> net;
  std::vector<ProcessId> servers;
  std::vector<server::Server*> correct;
  Ticker* ticker = nullptr;
};

ClientWorld build_client_world(std::size_t n, std::size_t f, ClientFault fault, std::uint64_t seed,
                               bool sign_epochs) {
  std::mt19937_64 rng(seed * 31337 + static_cast<std::uint64_t>(fault));
  ClientWorld w;
  w.keys = std::make_shared<Keyring>(make_hmac_scheme(), seed);
  w.servers = pids(n);
  for (ProcessId p : w.servers) w.keys->register_process(p);
  w.keys->register_process(make_pid(2000));
  sim::NetConfig nc;
  nc.rng_seed = rng();
  w.net = std::make_unique<sim::Network>(nc);
  w.net->set_log_enabled(false);
  const auto byz = fault == ClientFault::none ? std::set<ProcessId>{} : pick_byzantine(n, f, rng);
  std::vector<ProcessId> others;
  for (ProcessId p : w.servers) {
    server::ServerConfig cfg;
    cfg.algorithm = server::Algorithm::fast;
    cfg.members = w.servers;
    cfg.f = f;
    cfg.sbc = make_pid(1000);
    cfg.keys = w.keys;
    cfg.sign_epochs = sign_epochs;
    cfg.cost = {0, 0, 0};
    if (byz.contains(p)) {
      others.push_back(p);
      if (fault == ClientFault::liar) {
        w.net->spawn<client::LyingServer>(p, ProcessKind::byzantine_server, w.keys,
                                          std::vector<ProcessId>(byz.begin(), byz.end()));
      } else {
        cfg.forge_epoch_digest = true;
        w.net->spawn<server::Server>(p, ProcessKind::byzantine_server, cfg);
      }
      continue;
    }
    w.correct.push_back(&w.net->spawn<server::Server>(p, ProcessKind::correct_server, cfg));
  }
  sbc::ServiceConfig scfg;
  scfg.members = w.servers;
  w.net->spawn<sbc::Service>(make_pid(1000), ProcessKind::service, scfg);
  w.ticker = &w.net->spawn<Ticker>(make_pid(2001), ProcessKind::client, w.correct, others, 150);
  w.ticker->start(*w.net);
  return w;
}

Element client_element(const Keyring& keys, std::uint64_t seed, std::uint64_t k) {
  Bytes payload(16);
  for (std::size_t i = 0; i < 8; ++i) {
    payload[i] = static_cast<std::uint8_t>(seed >> (8 * i));
    payload[8 + i] = static_cast<std::uint8_t>(k >> (8 * i));
  }
  return Element::sign(keys, make_pid(2000), std::move(payload));
}

void dpo_case(std::uint64_t seed, SuiteResult& out) {
  const std::size_t n = 4, f = 1;
  auto w = build_client_world(n, f, seed % 2 ? ClientFault::liar : ClientFault::forged_digest, seed, false);
  client::DpoConfig dc{w.servers, f, 1000};
  auto& dpo = w.net->spawn<client::DpoClient>(make_pid(2000), ProcessKind::client, dc);
  const std::string where = tag(n, f, seed);
  std::uint64_t completed = 0;
  for (std::uint64_t k = 0; k < 6; ++k) {
    dpo.add(*w.net, client_element(*w.keys, seed, k));
    w.net->run_until(w.net->now() + 100 + static_cast<SimTime>(k * 37));
    dpo.get(*w.net, [&](sim::Network&, const client::DpoClient::GetOutcome& o) {
      ++completed;
      if (!o.result) {
        out.fail("DPO get failed " + where);
        return;
      }
      // The longest correct history bounds every epoch a sound read may show.
      const History* longest = &w.correct.front()->history();
      for (auto* s : w.correct)
        if (s->history().size() > longest->size()) longest = &s->history();
      ElementSet known;
      for (auto* s : w.correct) known.insert(s->theset().begin(), s->theset().end());
      for (const Element& e : o.result->S)
        if (!known.contains(e)) out.fail("DPO soundness: element no correct server holds " + where);
      for (EpochNumber i = 1; i <= o.result->H.size(); ++i)
        if (i > longest->size() || o.result->H.at(i) != longest->at(i))
          out.fail("DPO soundness: epoch " + std::to_string(i) + " differs from correct history " + where);
    });
    w.net->run_until(w.net->now() + 1200);
  }
  if (completed != 6) out.fail("DPO get never completed " + where);
}

// Runs `count` optimistic add-and-confirm calls back to back. Returns
// (confirmed, false confirmations).
std::pair<std::uint64_t, std::uint64_t> optimistic_case(ClientFault fault, std::uint64_t seed,
                                                         std::uint64_t count, SuiteResult& out) {
  const std::size_t n = 4, f = 1;
  auto w = build_client_world(n, f, fault, seed, true);
  client::OptimisticConfig oc;
  oc.servers = w.servers;
  oc.f = f;
  oc.keys = w.keys;
  auto& opt = w.net->spawn<client::OptimisticClient>(make_pid(2000), ProcessKind::client, oc);
  std::uint64_t confirmed = 0, false_confirmations = 0, finished = 0;
  const std::string where = tag(n, f, seed);
  for (std::uint64_t k = 0; k < count; ++k) {
    const Element e = client_element(*w.keys, seed, k);
    opt.add_and_confirm(*w.net, e, [&, e](sim::Network&, const client::OptimisticClient::Outcome& o) {
      ++finished;
      if (!o.confirmation) return;
      ++confirmed;
      const auto& c = *o.confirmation;
      bool genuine = false;
      for (auto* s : w.correct) {
        const History& h = s->history();
        if (h.defined(c.epoch) && h.at(c.epoch).contains(e) && hash_epoch(h.at(c.epoch)) == c.epoch_digest)
          genuine = true;
      }
      if (!genuine) ++false_confirmations;
    });
    while (opt.busy() && w.net->now() < 2'000'000)
      if (!w.net->step()) break;
  }
  if (finished != count) out.fail("optimistic client left a request unfinished " + where);
  return {confirmed, false_confirmations};
}

// ---------------------------------------------------------------- misc ----

SuiteResult time_suite(const char* name, const std::function<void(SuiteResult&)>& body) {
  SuiteResult r;
  r.name = name;
  Stopwatch sw;
  body(r);
  r.wall_seconds = sw.seconds();
  return r;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

void SuiteResult::fail(std::string what) {
  ++failure_count;
  if (failures.size() < kKeptFailures) failures.push_back(std::move(what));
}

void SuiteResult::absorb(const SuiteResult& other) {
  cases += other.cases;
  failure_count += other.failure_count;
  for (const auto& f : other.failures)
    if (failures.size() < kKeptFailures) failures.push_back(f);
}

std::string SuiteResult::summary() const {
  std::ostringstream os;
  os << (passed() ? "PASS " : "FAIL ") << name << ": " << cases << " cases, " << failure_count
     << " failures";
  if (value) os << ", value " << fmt(*value);
  if (!detail.empty()) os << ", " << detail;
  os << " (" << fmt(wall_seconds) << " s)";
  return os.str();
}

std::vector<Scenario> property_matrix(std::uint64_t seeds) {
  std::vector<Scenario> out;
  for (std::size_t n : {4, 7, 10})
    for (auto alg : {server::Algorithm::fast, server::Algorithm::fast_agg})
      for (auto adv : {Adversary::none, Adversary::silent, Adversary::havoc})
        for (std::uint64_t seed = 0; seed < seeds; ++seed) {
          Scenario s;
          s.n = n;
          s.f = (n - 1) / 3;
          s.algorithm = alg;
          s.byzantine = adv;
          s.seed = seed;
          s.name = "n" + std::to_string(n) + "-" + std::string(server::to_string(alg)) + "-" +
                   std::string(to_string(adv));
          s.add_rate = 10'000;
          s.duration = 3'000;
          s.epoch_period = 200;
          s.agg = {4, 100};
          if (adv != Adversary::none) {
            std::mt19937_64 rng(seed ^ 0xA5A5);
            s.net.latency_max = 30;
            s.net.gst = std::uniform_int_distribution<SimTime>(0, 1500)(rng);
          }
          s.drain_limit = 100'000;
          out.push_back(std::move(s));
        }
  return out;
}

PropertySuites run_property_suites(std::uint64_t seeds, unsigned threads) {
  Stopwatch sw;
  const auto scenarios = property_matrix(seeds);
  const auto reports = run_matrix(scenarios, threads);
  PropertySuites out;
  out.safety.name = "safety properties after every handler";
  out.liveness.name = "liveness properties at quiescence";
  out.lemmas.name = "stamp-once, prefix equality and oracle convergence";
  auto starts = [](const std::string& v, std::string_view p) { return v.rfind(p, 0) == 0; };
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const std::string where = " [" + r.scenario + " seed " + std::to_string(r.seed) + "]";
    ++out.safety.cases;
    ++out.liveness.cases;
    ++out.lemmas.cases;
    if (r.events < 200) out.safety.fail("run shorter than 200 events" + where);
    for (const auto& v : r.property_violations) {
      // Violations are prefixed "t=<tick> <label>".
      const std::string label = v.substr(v.find(' ') + 1);
      if (starts(label, "P2") || starts(label, "P3") || starts(label, "P4") || starts(label, "get-after-add") ||
          starts(label, "liveness"))
        out.liveness.fail(v);
      else if (starts(label, "oracle"))
        out.lemmas.fail(v);
      else
        out.safety.fail(v);
      if (starts(label, "P5") || starts(label, "P6") || starts(label, "stamp out of order"))
        out.lemmas.fail(v);
    }
  }
  out.safety.wall_seconds = out.liveness.wall_seconds = out.lemmas.wall_seconds = sw.seconds();
  return out;
}

SuiteResult run_brb_suite(std::uint64_t seeds) {
  return time_suite("reliable broadcast contract", [&](SuiteResult& r) {
    for (auto [n, f] : {std::pair<std::size_t, std::size_t>{4, 1}, {7, 2}})
      for (std::uint64_t s = 0; s < seeds; ++s) {
        ++r.cases;
        brb_case(n, f, s, r);
      }
  });
}

SuiteResult run_sbc_suite(std::uint64_t seeds) {
  return time_suite("set consensus contract", [&](SuiteResult& r) {
    for (auto [n, f] : {std::pair<std::size_t, std::size_t>{4, 1}, {7, 2}})
      for (std::uint64_t s = 0; s < seeds; ++s) {
        r.cases += 2;
        sbc_case(n, f, s, false, r);
        sbc_case(n, f, s, true, r);
      }
  });
}

SuiteResult run_client_suite(std::uint64_t seeds) {
  return time_suite("client protocols", [&](SuiteResult& r) {
    std::uint64_t adversarial_confirmed = 0, false_confirmations = 0, honest = 0, honest_confirmed = 0;
    for (std::uint64_t s = 0; s < seeds; ++s) {
      r.cases += 3;
      dpo_case(s, r);
      const auto fault = s % 2 ? ClientFault::liar : ClientFault::forged_digest;
      auto [c, bad] = optimistic_case(fault, s, 3, r);
      adversarial_confirmed += c;
      false_confirmations += bad;
      auto [ok, bad2] = optimistic_case(ClientFault::none, s, 3, r);
      honest += 3;
      honest_confirmed += ok;
      false_confirmations += bad2;
    }
    if (false_confirmations) r.fail(std::to_string(false_confirmations) + " false confirmations");
    if (honest_confirmed != honest)
      r.fail("only " + std::to_string(honest_confirmed) + " of " + std::to_string(honest) +
             " adds confirmed with correct servers");
    r.detail = "false confirmations " + std::to_string(false_confirmations) + ", confirmed under faults " +
               std::to_string(adversarial_confirmed) + ", honest confirmation rate " +
               fmt(honest ? static_cast<double>(honest_confirmed) / honest : 0.0);
  });
}

SuiteResult run_byzmodel_suite(std::uint64_t seeds, std::size_t steps, unsigned threads,
                               std::vector<model::Counterexample>* counterexamples) {
  return time_suite("byzantine model equivalence", [&](SuiteResult& r) {
    const std::vector<model::System> systems{{model::Model::gamma, 4, 1}, {model::Model::gamma, 7, 2}};
    const std::size_t jobs = systems.size() * seeds;
    std::mutex mu;
    parallel_for(jobs, threads, [&](std::size_t job) {
      const model::System& sys = systems[job / seeds];
      const std::uint64_t seed = job % seeds;
      SuiteResult local;
      std::vector<model::Counterexample> found;
      const std::string where = tag(sys.n, sys.f, seed);
      auto knowledge_holds = [&](const std::vector<model::Event>& trace_prime, const char* which) {
        const model::System prime = sys.prime();
        model::Config cfg = model::initial(prime);
        for (std::size_t i = 0; i < trace_prime.size(); ++i) {
          model::apply(prime, trace_prime[i], cfg);
          if (!model::receive_within_knowledge(prime, cfg)) {
            local.fail(std::string("receive-within-knowledge fails on ") + which + " trace at step " +
                       std::to_string(i) + " " + where);
            return;
          }
        }
      };
      try {
        ++local.cases;
        const auto trace = model::generate_trace(sys, seed, steps);
        auto fwd = model::map_forward(sys, trace);
        if (!fwd.ok) {
          local.fail("forward mapping fails at step " + std::to_string(fwd.step) + ": " + fwd.reason + " " + where);
          found.push_back({"forward", sys.n, sys.f, seed, trace, fwd});
        } else {
          knowledge_holds(fwd.mapped, "mapped");
        }
        ++local.cases;
        const auto trace_prime = model::generate_trace(sys.prime(), seed, steps);
        knowledge_holds(trace_prime, "generated");
        auto bwd = model::map_backward(sys, trace_prime);
        if (!bwd.ok) {
          local.fail("backward mapping fails at step " + std::to_string(bwd.step) + ": " + bwd.reason + " " +
                     where);
          found.push_back({"backward", sys.n, sys.f, seed, trace_prime, bwd});
        }
      } catch (const SetchainError& e) {
        local.fail(std::string("model harness error: ") + e.what() + " " + where);
      }
      std::lock_guard lock(mu);
      r.absorb(local);
      if (counterexamples)
        counterexamples->insert(counterexamples->end(), found.begin(), found.end());
    });
  });
}

SuiteResult run_incentives_suite() {
  return time_suite("incentive rules", [](SuiteResult& r) {
    for (std::size_t n : {4, 7, 10}) {
      const std::size_t f = (n - 1) / 3;
      const auto p = incentives::RewardParams::linear(1.0, f, n, 1.0, 1.0);
      for (std::uint64_t e = 0; e <= 100; ++e)
        for (std::uint64_t s = 0; s <= n; ++s) {
          ++r.cases;
          const double t = incentives::reward(e, s, p);
          const std::string where = " (n=" + std::to_string(n) + ",e=" + std::to_string(e) +
                                    ",s=" + std::to_string(s) + ")";
          if (s <= f && t != 0.0) r.fail("cliff: reward paid with s <= f" + where);
          if (s > f && e < 100 && !(incentives::reward(e + 1, s, p) > t))
            r.fail("reward not strictly increasing in e" + where);
          if (s > f && s < n && !(incentives::reward(e, s + 1, p) > t))
            r.fail("reward not strictly increasing in s" + where);
        }
      const auto servers = pids(n);
      for (double x : {0.0, 0.01, 1.0, 2.5, 10.0, 123.45, 1000.0, 99999.99})
        for (double burn : {0.0, 0.25, 0.5, 1.0})
          for (std::size_t k = 1; k <= n; ++k) {
            ++r.cases;
            auto q = p;
            q.burn_ratio = burn;
            const std::set<ProcessId> signers(servers.begin(), servers.begin() + static_cast<std::ptrdiff_t>(k));
            const auto split = incentives::fee_split(x, signers, q);
            if (split.total() != std::llround(x * incentives::kMinorPerToken))
              r.fail("fee not conserved (x=" + fmt(x) + ", burn=" + fmt(burn) + ", signers=" + std::to_string(k) +
                     ")");
          }
    }
  });
}

Scenario h1_scenario() {
  Scenario s;
  s.name = "h1-default";
  s.n = 4;
  s.f = 1;
  s.algorithm = server::Algorithm::fast_agg;
  s.epoch_period = 200;
  s.add_rate = 1'000'000;
  s.duration = 100'000;
  s.agg = {1000, 100};
  return s;
}

SuiteResult run_h1() {
  return time_suite("H1 adds per second over epochs per second", [](SuiteResult& r) {
    const auto rep = run_scenario(h1_scenario());
    ++r.cases;
    for (const auto& v : rep.property_violations) r.fail(v);
    try {
      r.value = compare_within(rep, Metric::adds_per_sec, Metric::epochs_per_sec);
      if (*r.value < 100) r.fail("ratio " + fmt(*r.value) + " below 100");
    } catch (const SetchainError& e) {
      r.fail(e.what());
    }
    r.detail = "bound >= 100; adds/s " + fmt(metric_value(rep, Metric::adds_per_sec)) + ", epochs/s " +
               fmt(metric_value(rep, Metric::epochs_per_sec));
  });
}

SuiteResult run_h3() {
  return time_suite("H3 aggregation speed-up at n=7", [](SuiteResult& r) {
    Scenario s;
    s.n = 7;
    s.f = 2;
    s.epoch_period = 200;
    s.add_rate = 500'000;
    s.duration = 20'000;
    s.agg = {1000, 100};
    s.drain = false;
    s.name = "h3-fast-agg";
    s.algorithm = server::Algorithm::fast_agg;
    const auto agg = run_scenario(s);
    s.name = "h3-fast";
    s.algorithm = server::Algorithm::fast;
    const auto fast = run_scenario(s);
    ++r.cases;
    for (const auto* rep : {&agg, &fast})
      for (const auto& v : rep->property_violations) r.fail(v);
    try {
      r.value = compare(agg, fast, Metric::adds_per_sec);
      if (*r.value < 2) r.fail("speed-up " + fmt(*r.value) + " below 2");
      r.detail = "bound >= 2; messages/add ratio " + fmt(compare(agg, fast, Metric::messages_per_add));
    } catch (const SetchainError& e) {
      r.fail(e.what());
    }
  });
}

SuiteResult run_h4() {
  return time_suite("H4 silent adversary at n=10", [](SuiteResult& r) {
    Scenario s;
    s.n = 10;
    s.f = 3;
    s.epoch_period = 200;
    s.add_rate = 100'000;
    s.duration = 50'000;
    s.agg = {1000, 100};
    s.name = "h4-none";
    const auto none = run_scenario(s);
    s.name = "h4-silent";
    s.byzantine = Adversary::silent;
    const auto silent = run_scenario(s);
    ++r.cases;
    for (const auto* rep : {&none, &silent})
      for (const auto& v : rep->property_violations) r.fail(v);
    try {
      r.value = 1.0 - compare(silent, none, Metric::adds_per_sec);
      if (!(*r.value < 0.5)) r.fail("degradation " + fmt(*r.value) + " not below 0.5");
      r.detail = "bound < 0.5 (fraction of adds/s lost)";
    } catch (const SetchainError& e) {
      r.fail(e.what());
    }
  });
}

SuiteResult run_h5() {
  return time_suite("H5 latency stationarity", [](SuiteResult& r) {
    Scenario s;
    s.name = "h5-long";
    s.n = 4;
    s.f = 1;
    s.epoch_period = 200;
    s.add_rate = 50'000;
    s.duration = 1'000'000;
    s.agg = {1000, 100};
    const auto rep = run_scenario(s);
    ++r.cases;
    for (const auto& v : rep.property_violations) r.fail(v);
    const auto med = windowed_median_latency(rep, 10);
    if (med[1] <= 0) {
      r.fail("second window has no stamped adds");
      return;
    }
    r.value = med[9] / med[1];
    if (*r.value > 2) r.fail("last/second window median ratio " + fmt(*r.value) + " above 2");
    r.detail = "bound <= 2; medians " + fmt(med[1]) + " and " + fmt(med[9]) + " ticks";
  });
}

}  // namespace setchain::bench
