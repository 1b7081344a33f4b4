// SPDX-License-Identifier: Apache-2.0
#include "setchain/model/model.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace setchain::model {

ElemSet valid_part(const ElemSet& s) {
  ElemSet out;
  for (const Elem& e : s)
    if (e.valid) out.insert(e);
  return out;
}

ElemSet flatten(const PropSet& ps) {
  ElemSet out;
  for (const ElemSet& s : ps) out.insert(s.begin(), s.end());
  return out;
}

bool multiset_leq(const Multiset& a, const Multiset& b) {
  for (const auto& [m, c] : a) {
    auto it = b.find(m);
    if (it == b.end() || it->second < c) return false;
  }
  return true;
}

Multiset multiset_of(const std::vector<Msg>& seq) {
  Multiset out;
  for (const Msg& m : seq) ++out[m];
  return out;
}

void multiset_add(Multiset& into, const Multiset& m) {
  for (const auto& [msg, c] : m) into[msg] += c;
}

bool LocalState::stamped(const Elem& e) const {
  return std::any_of(H.begin(), H.end(), [&](const ElemSet& s) { return s.contains(e); });
}

std::vector<Pid> System::correct() const {
  std::vector<Pid> out;
  for (Pid p = 0; p < n - f; ++p) out.push_back(p);
  return out;
}

std::vector<Pid> System::byzantine() const {
  if (model == Model::gamma_prime) return {b()};
  std::vector<Pid> out;
  for (Pid p = static_cast<Pid>(n - f); p < n; ++p) out.push_back(p);
  return out;
}

std::vector<Pid> System::processes() const {
  std::vector<Pid> out = correct();
  for (Pid p : byzantine()) out.push_back(p);
  return out;
}

bool System::is_byzantine(Pid p) const {
  if (model == Model::gamma_prime) return p == b();
  return p >= n - f && p < n;
}

void System::validate() const {
  if (f < 1 || n < 3 * f + 1) throw std::invalid_argument("model needs 1 <= f and n >= 3f+1");
}

std::string_view to_string(Tag t) {
  switch (t) {
    case Tag::get: return "get";
    case Tag::add: return "add";
    case Tag::brb_broadcast: return "brb_broadcast";
    case Tag::brb_deliver: return "brb_deliver";
    case Tag::epoch_inc: return "epoch_inc";
    case Tag::sbc_propose: return "sbc_propose";
    case Tag::sbc_inform: return "sbc_inform";
    case Tag::sbc_set_deliver: return "sbc_set_deliver";
    case Tag::sbc_consensus: return "sbc_consensus";
    case Tag::nop: return "nop";
  }
  return "?";
}

namespace {

bool has_server(Tag t) { return t != Tag::nop && t != Tag::sbc_consensus; }

bool is_process(const System& sys, Pid p) {
  return sys.is_correct(p) || sys.is_byzantine(p);
}

std::uint32_t count_in(const std::vector<Msg>& seq, const Msg& m) {
  return static_cast<std::uint32_t>(std::count(seq.begin(), seq.end(), m));
}

std::uint32_t pending_count(const Config& cfg, Pid p, const Msg& m) {
  auto it = cfg.delta.find(p);
  if (it == cfg.delta.end()) return 0;
  auto jt = it->second.pending.find(m);
  return jt == it->second.pending.end() ? 0 : jt->second;
}

bool proposed_for(const NetEntry& d, EpochNumber h) {
  return std::any_of(d.sent.begin(), d.sent.end(),
                     [&](const Msg& m) { return m.kind == MsgKind::proposal && m.h == h; });
}

std::set<ElemSet> proposals_for(const Config& cfg, EpochNumber h) {
  std::set<ElemSet> out;
  for (const auto& [p, d] : cfg.delta)
    for (const Msg& m : d.sent)
      if (m.kind == MsgKind::proposal && m.h == h) out.insert(m.prop);
  return out;
}

void send(const System& sys, Config& cfg, const Msg& m, Pid from) {
  cfg.delta[from].sent.push_back(m);
  for (Pid p : sys.processes()) ++cfg.delta[p].pending[m];
}

void receive(Config& cfg, const Msg& m, Pid at) {
  NetEntry& d = cfg.delta[at];
  auto it = d.pending.find(m);
  if (it == d.pending.end()) throw SetchainError(Errc::harness, "receive of a message not pending");
  if (--it->second == 0) d.pending.erase(it);
  d.received.push_back(m);
}

std::string elems_str(const ElemSet& s) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const Elem& e : s) {
    os << (first ? "" : ",") << e.id << (e.valid ? "" : "!");
    first = false;
  }
  os << "}";
  return os.str();
}

std::string msg_str(const Msg& m) {
  switch (m.kind) {
    case MsgKind::madd: return "madd(" + std::to_string(m.e.id) + (m.e.valid ? ")" : "!)");
    case MsgKind::mepochinc: return "mepochinc(" + std::to_string(m.h) + ")";
    case MsgKind::proposal: return "(" + std::to_string(m.h) + "," + elems_str(m.prop) + ")";
  }
  return "?";
}

}  // namespace

std::string describe(const Event& ev) {
  std::ostringstream os;
  os << to_string(ev.tag);
  if (ev.server) os << "@" << *ev.server;
  switch (ev.tag) {
    case Tag::add: os << " " << ev.e.id << (ev.e.valid ? "" : "!"); break;
    case Tag::brb_broadcast:
    case Tag::brb_deliver:
    case Tag::sbc_inform: os << " " << msg_str(ev.msg); break;
    case Tag::epoch_inc: os << " " << ev.h; break;
    case Tag::sbc_propose: os << " " << ev.h << " " << elems_str(ev.prop); break;
    case Tag::sbc_set_deliver:
    case Tag::sbc_consensus:
      os << " " << ev.h << " [";
      for (const ElemSet& s : ev.propset) os << elems_str(s);
      os << "]";
      break;
    default: break;
  }
  return os.str();
}

Config initial(const System& sys) {
  Config cfg;
  for (Pid p : sys.correct()) cfg.sigma[p] = LocalState{};
  for (Pid p : sys.processes()) cfg.delta[p] = NetEntry{};
  return cfg;
}

ElemSet valid_elements(const Event& ev) {
  switch (ev.tag) {
    case Tag::add: return ev.e.valid ? ElemSet{ev.e} : ElemSet{};
    case Tag::brb_deliver:
      if (ev.msg.kind == MsgKind::madd && ev.msg.e.valid) return {ev.msg.e};
      return {};
    case Tag::sbc_inform: return valid_part(ev.msg.prop);
    case Tag::sbc_set_deliver: return valid_part(flatten(ev.propset));
    default: return {};
  }
}

bool enabled(const System& sys, const Event& ev, const Config& cfg) {
  if (has_server(ev.tag) != ev.server.has_value()) return false;
  if (ev.server && !is_process(sys, *ev.server)) return false;
  const Pid s = ev.server.value_or(0);
  const bool byz = ev.server && sys.is_byzantine(s);
  const LocalState* local = nullptr;
  if (ev.server && !byz) local = &cfg.sigma.at(s);

  switch (ev.tag) {
    case Tag::nop:
    case Tag::get: return true;
    case Tag::add: return ev.e.valid && (byz || !local->S.contains(ev.e));
    case Tag::brb_broadcast:
      if (!byz) return false;
      if (ev.msg.kind == MsgKind::mepochinc) return true;
      if (ev.msg.kind == MsgKind::madd) return cfg.knowledge.contains(ev.msg.e) || !ev.msg.e.valid;
      return false;
    case Tag::brb_deliver:
      if (pending_count(cfg, s, ev.msg) == 0) return false;
      if (ev.msg.kind == MsgKind::madd) return ev.msg.e.valid;
      if (ev.msg.kind == MsgKind::mepochinc) {
        if (byz || ev.msg.h < local->epoch + 1) return true;
        return ev.msg.h == local->epoch + 1 && !proposed_for(cfg.delta.at(s), ev.msg.h);
      }
      return false;
    case Tag::epoch_inc: return byz || ev.h == local->epoch + 1;
    case Tag::sbc_propose: {
      if (!byz || ev.h == 0) return false;
      ElemSet v = valid_part(ev.prop);
      return std::includes(cfg.knowledge.begin(), cfg.knowledge.end(), v.begin(), v.end());
    }
    case Tag::sbc_inform:
      return ev.msg.kind == MsgKind::proposal && pending_count(cfg, s, ev.msg) > 0;
    case Tag::sbc_set_deliver: {
      auto it = cfg.consensus.find(ev.h);
      if (it == cfg.consensus.end() || it->second != ev.propset) return false;
      return byz || ev.h == local->epoch + 1;
    }
    case Tag::sbc_consensus: {
      if (ev.h == 0 || cfg.consensus.contains(ev.h)) return false;
      if (ev.h > 1 && !cfg.consensus.contains(ev.h - 1)) return false;
      auto props = proposals_for(cfg, ev.h);
      if (props.empty()) return false;
      return std::includes(props.begin(), props.end(), ev.propset.begin(), ev.propset.end());
    }
  }
  return false;
}

void apply(const System& sys, const Event& ev, Config& cfg) {
  if (!enabled(sys, ev, cfg))
    throw SetchainError(Errc::harness, "event not enabled: " + describe(ev));
  const Pid s = ev.server.value_or(0);
  const bool byz = ev.server && sys.is_byzantine(s);

  if (byz) {
    ElemSet v = valid_elements(ev);
    cfg.knowledge.insert(v.begin(), v.end());
  }

  switch (ev.tag) {
    case Tag::nop:
    case Tag::get: break;
    case Tag::add:
      if (!byz) send(sys, cfg, Msg::add(ev.e), s);
      break;
    case Tag::brb_broadcast: send(sys, cfg, ev.msg, s); break;
    case Tag::brb_deliver:
      if (ev.msg.kind == MsgKind::madd) {
        receive(cfg, ev.msg, s);
        if (!byz) cfg.sigma[s].S.insert(ev.msg.e);
      } else {
        const LocalState& local = byz ? LocalState{} : cfg.sigma.at(s);
        if (byz || ev.msg.h < local.epoch + 1) {
          receive(cfg, ev.msg, s);
        } else {
          ElemSet ps;
          for (const Elem& e : local.S)
            if (!local.stamped(e)) ps.insert(e);
          receive(cfg, ev.msg, s);
          send(sys, cfg, Msg::proposal(ev.msg.h, std::move(ps)), s);
        }
      }
      break;
    case Tag::epoch_inc:
      if (!byz) send(sys, cfg, Msg::epochinc(ev.h), s);
      break;
    case Tag::sbc_propose: send(sys, cfg, Msg::proposal(ev.h, ev.prop), s); break;
    case Tag::sbc_inform: receive(cfg, ev.msg, s); break;
    case Tag::sbc_set_deliver:
      if (!byz) {
        LocalState& local = cfg.sigma[s];
        ElemSet E;
        for (const Elem& e : flatten(ev.propset))
          if (e.valid && !local.stamped(e)) E.insert(e);
        local.S.insert(E.begin(), E.end());
        local.H.push_back(std::move(E));
        local.epoch = ev.h;
      }
      break;
    case Tag::sbc_consensus: cfg.consensus[ev.h] = ev.propset; break;
  }
}

Config effect(const System& sys, const Event& ev, const Config& cfg) {
  Config out = cfg;
  apply(sys, ev, out);
  return out;
}

bool network_equiv(const System& gamma, const Config& phi, const Config& phi_prime,
                   std::string* why) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  const Pid b = gamma.b();
  for (Pid s : gamma.correct())
    if (phi.delta.at(s) != phi_prime.delta.at(s))
      return fail("network condition 1: correct process " + std::to_string(s) + " differs");

  const NetEntry& nb = phi_prime.delta.at(b);
  const Multiset b_received = multiset_of(nb.received);
  Multiset byz_sent, byz_received;
  for (Pid s : gamma.byzantine()) {
    const NetEntry& d = phi.delta.at(s);
    multiset_add(byz_sent, multiset_of(d.sent));
    multiset_add(byz_received, multiset_of(d.received));
  }
  if (byz_sent != multiset_of(nb.sent)) return fail("network condition 2: Byzantine sends differ");
  Multiset b_total = b_received;
  multiset_add(b_total, nb.pending);
  if (!multiset_leq(b_received, byz_received))
    return fail("network condition 4: b received a message no Byzantine server received");
  for (Pid s : gamma.byzantine()) {
    const NetEntry& d = phi.delta.at(s);
    const Multiset s_received = multiset_of(d.received);
    if (!multiset_leq(nb.pending, d.pending))
      return fail("network condition 3: pending at b not pending at " + std::to_string(s));
    Multiset s_total = s_received;
    multiset_add(s_total, d.pending);
    if (s_total != b_total)
      return fail("network condition 5: messages addressed to " + std::to_string(s) + " differ");
    if (!multiset_leq(s_received, b_received))
      return fail("network condition 6: " + std::to_string(s) + " received more than b");
  }
  return true;
}

bool obs_equiv(const System& gamma, const Config& phi, const Config& phi_prime, std::string* why) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  if (phi.sigma != phi_prime.sigma) return fail("correct local states differ");
  if (phi.consensus != phi_prime.consensus) return fail("consensus histories differ");
  if (phi.knowledge != phi_prime.knowledge) return fail("Byzantine knowledge differs");
  return network_equiv(gamma, phi, phi_prime, why);
}

bool receive_within_knowledge(const System& gamma_prime, const Config& cfg) {
  const NetEntry& d = cfg.delta.at(gamma_prime.b());
  for (const Msg& m : d.received) {
    if (m.kind == MsgKind::madd && m.e.valid && !cfg.knowledge.contains(m.e)) return false;
    if (m.kind == MsgKind::proposal)
      for (const Elem& e : m.prop)
        if (e.valid && !cfg.knowledge.contains(e)) return false;
  }
  return true;
}

namespace {

class Generator {
 public:
  Generator(const System& sys, std::uint64_t seed) : sys_(sys), rng_(seed) {}

  std::vector<Event> run(std::size_t steps) {
    Config cfg = initial(sys_);
    std::vector<Event> trace;
    trace.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) {
      cands_.clear();
      weights_.clear();
      collect(cfg);
      std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
      Event ev = std::move(cands_[pick(rng_)]);
      if (!enabled(sys_, ev, cfg))
        throw SetchainError(Errc::harness, "generator produced a disabled event: " + describe(ev));
      apply(sys_, ev, cfg);
      commit_fresh(ev);
      note(ev);
      trace.push_back(std::move(ev));
    }
    return trace;
  }

 private:
  void offer(Event ev, double w) {
    cands_.push_back(std::move(ev));
    weights_.push_back(w);
  }

  bool coin() { return std::uniform_int_distribution<int>(0, 1)(rng_) == 1; }

  template <class C>
  auto any_of(const C& c) {
    auto it = c.begin();
    std::advance(it, std::uniform_int_distribution<std::size_t>(0, c.size() - 1)(rng_));
    return *it;
  }

  Elem fresh(bool valid) { return Elem{next_id_++, valid}; }

  // Geometric(1/2) count of broken elements, capped at four.
  ElemSet invalid_elems() {
    ElemSet out;
    while (out.size() < 4 && coin()) out.insert(fresh(false));
    return out;
  }

  ElemSet havoc_subset(const ElemSet& from) {
    ElemSet out;
    for (const Elem& e : from)
      if (coin()) out.insert(e);
    return out;
  }

  void note(const Event& ev) {
    if (ev.tag == Tag::add && ev.e.valid) universe_.insert(ev.e);
  }

  void collect(const Config& cfg) {
    offer(Event::nop(), 1.0);
    {
      Event g;
      g.tag = Tag::get;
      g.server = any_of(sys_.processes());
      offer(g, 0.5);
    }
    EpochNumber top_epoch = 0;
    for (const auto& [p, st] : cfg.sigma) top_epoch = std::max(top_epoch, st.epoch);

    for (Pid s : sys_.correct()) {
      const LocalState& st = cfg.sigma.at(s);
      Event a;
      a.tag = Tag::add;
      a.server = s;
      a.e = Elem{next_id_, true};
      offer(a, 1.5);
      ElemSet missing;
      for (const Elem& e : universe_)
        if (!st.S.contains(e)) missing.insert(e);
      if (!missing.empty()) {
        a.e = any_of(missing);
        offer(a, 0.5);
      }
      Event inc;
      inc.tag = Tag::epoch_inc;
      inc.server = s;
      inc.h = st.epoch + 1;
      offer(inc, 1.0);
    }

    for (Pid s : sys_.byzantine()) {
      Event a;
      a.tag = Tag::add;
      a.server = s;
      a.e = !cfg.knowledge.empty() && coin() ? any_of(cfg.knowledge) : Elem{next_id_, true};
      offer(a, 0.5);

      Event bc;
      bc.tag = Tag::brb_broadcast;
      bc.server = s;
      if (!cfg.knowledge.empty()) {
        bc.msg = Msg::add(any_of(cfg.knowledge));
        offer(bc, 0.5);
      }
      bc.msg = Msg::add(Elem{next_id_, false});
      offer(bc, 0.3);
      bc.msg = Msg::epochinc(std::uniform_int_distribution<EpochNumber>(1, top_epoch + 2)(rng_));
      offer(bc, 0.5);

      Event inc;
      inc.tag = Tag::epoch_inc;
      inc.server = s;
      inc.h = std::uniform_int_distribution<EpochNumber>(0, top_epoch + 2)(rng_);
      offer(inc, 0.2);

      Event pr;
      pr.tag = Tag::sbc_propose;
      pr.server = s;
      pr.h = cfg.consensus.size() + 1 + (coin() ? 1 : 0);
      pr.prop = havoc_subset(cfg.knowledge);
      ElemSet bad = invalid_elems();
      pr.prop.insert(bad.begin(), bad.end());
      offer(pr, 0.7);

      if (!cfg.consensus.empty()) {
        Event sd;
        sd.tag = Tag::sbc_set_deliver;
        sd.server = s;
        auto it = cfg.consensus.begin();
        std::advance(it, std::uniform_int_distribution<std::size_t>(0, cfg.consensus.size() - 1)(rng_));
        sd.h = it->first;
        sd.propset = it->second;
        offer(sd, 0.5);
      }
    }

    for (const auto& [p, d] : cfg.delta) {
      for (const auto& [m, c] : d.pending) {
        Event ev;
        ev.server = p;
        ev.msg = m;
        ev.tag = m.kind == MsgKind::proposal ? Tag::sbc_inform : Tag::brb_deliver;
        if (enabled(sys_, ev, cfg)) offer(std::move(ev), 3.0);
      }
      if (sys_.is_correct(p)) {
        const LocalState& st = cfg.sigma.at(p);
        auto it = cfg.consensus.find(st.epoch + 1);
        if (it != cfg.consensus.end()) {
          Event sd;
          sd.tag = Tag::sbc_set_deliver;
          sd.server = p;
          sd.h = it->first;
          sd.propset = it->second;
          offer(sd, 3.0);
        }
      }
    }

    const EpochNumber next = cfg.consensus.size() + 1;
    auto props = proposals_for(cfg, next);
    if (!props.empty()) {
      Event c;
      c.tag = Tag::sbc_consensus;
      c.h = next;
      for (const ElemSet& p : props)
        if (coin()) c.propset.insert(p);
      offer(c, 2.0);
    }
  }

  // Fresh ids are reserved lazily: an offered fresh element only consumes its
  // id if that candidate is picked.
  void commit_fresh(const Event& ev) {
    auto bump = [&](const Elem& e) { next_id_ = std::max(next_id_, e.id + 1); };
    bump(ev.e);
    bump(ev.msg.e);
    for (const Elem& e : ev.prop) bump(e);
  }

  const System& sys_;
  std::mt19937_64 rng_;
  std::uint32_t next_id_ = 1;
  ElemSet universe_;
  std::vector<Event> cands_;
  std::vector<double> weights_;
};

}  // namespace

std::vector<Event> generate_trace(const System& sys, std::uint64_t seed, std::size_t steps) {
  sys.validate();
  Generator g(sys, seed);
  return g.run(steps);
}

MappingResult map_forward(const System& gamma, const std::vector<Event>& trace) {
  gamma.validate();
  const System gp = gamma.prime();
  MappingResult r;
  Config phi = initial(gamma);
  Config psi = initial(gp);
  auto fail = [&](std::size_t i, std::string why) {
    r.ok = false;
    r.step = i;
    r.reason = std::move(why);
    r.left = phi;
    r.right = psi;
    return r;
  };
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const Event& ev = trace[i];
    if (!enabled(gamma, ev, phi)) return fail(i, "input event not enabled: " + describe(ev));
    Event mapped = ev;
    if (ev.server && gamma.is_byzantine(*ev.server)) {
      mapped.server = gp.b();
      if (ev.tag == Tag::brb_deliver || ev.tag == Tag::sbc_inform) {
        const auto at_b = count_in(psi.delta.at(gp.b()).received, ev.msg);
        const auto at_s = count_in(phi.delta.at(*ev.server).received, ev.msg);
        // b already consumed this copy on behalf of another Byzantine server.
        if (at_b > at_s) mapped = Event::nop();
      }
    }
    apply(gamma, ev, phi);
    if (!enabled(gp, mapped, psi)) return fail(i, "mapped event not enabled: " + describe(mapped));
    apply(gp, mapped, psi);
    r.mapped.push_back(mapped);
    std::string why;
    if (!obs_equiv(gamma, phi, psi, &why)) return fail(i, why);
    if (!receive_within_knowledge(gp, psi)) return fail(i, "b received an element it does not know");
  }
  return r;
}

MappingResult map_backward(const System& gamma, const std::vector<Event>& trace_prime) {
  gamma.validate();
  const System gp = gamma.prime();
  const std::vector<Pid> byz = gamma.byzantine();
  MappingResult r;
  Config phi = initial(gamma);
  Config psi = initial(gp);
  std::size_t i = 0;
  auto fail = [&](std::string why) {
    r.ok = false;
    r.step = i;
    r.reason = std::move(why);
    r.left = phi;
    r.right = psi;
    return r;
  };
  auto emit = [&](const Event& ev) -> bool {
    if (!enabled(gamma, ev, phi)) return false;
    apply(gamma, ev, phi);
    r.mapped.push_back(ev);
    return true;
  };
  std::string why;
  for (std::size_t k = 0; k + 1 < byz.size(); ++k) {
    emit(Event::nop());
    if (!obs_equiv(gamma, phi, psi, &why)) return fail(why);
  }
  for (; i < trace_prime.size(); ++i) {
    const Event& ev = trace_prime[i];
    if (!enabled(gp, ev, psi)) return fail("input event not enabled: " + describe(ev));
    apply(gp, ev, psi);
    if (!receive_within_knowledge(gp, psi)) return fail("b received an element it does not know");

    std::vector<Event> block;
    const bool at_b = ev.server && *ev.server == gp.b();
    if (at_b && (ev.tag == Tag::brb_deliver || ev.tag == Tag::sbc_inform)) {
      for (Pid s : byz) {
        Event copy = ev;
        copy.server = s;
        block.push_back(copy);
      }
    } else {
      Event first = ev;
      if (at_b) first.server = byz.front();
      block.push_back(first);
      while (block.size() < byz.size()) block.push_back(Event::nop());
    }
    for (const Event& out : block) {
      if (!emit(out)) return fail("stuttered event not enabled: " + describe(out));
      if (!obs_equiv(gamma, phi, psi, &why)) return fail(why);
    }
  }
  return r;
}

namespace {

nlohmann::json elem_json(const Elem& e) { return nlohmann::json::array({e.id, e.valid}); }
Elem elem_from(const nlohmann::json& j) { return Elem{j.at(0).get<std::uint32_t>(), j.at(1).get<bool>()}; }

nlohmann::json set_json(const ElemSet& s) {
  auto a = nlohmann::json::array();
  for (const Elem& e : s) a.push_back(elem_json(e));
  return a;
}
ElemSet set_from(const nlohmann::json& j) {
  ElemSet s;
  for (const auto& x : j) s.insert(elem_from(x));
  return s;
}

nlohmann::json propset_json(const PropSet& ps) {
  auto a = nlohmann::json::array();
  for (const ElemSet& s : ps) a.push_back(set_json(s));
  return a;
}
PropSet propset_from(const nlohmann::json& j) {
  PropSet ps;
  for (const auto& x : j) ps.insert(set_from(x));
  return ps;
}

nlohmann::json msg_json(const Msg& m) {
  switch (m.kind) {
    case MsgKind::madd: return {{"kind", "madd"}, {"e", elem_json(m.e)}};
    case MsgKind::mepochinc: return {{"kind", "mepochinc"}, {"h", m.h}};
    case MsgKind::proposal: return {{"kind", "proposal"}, {"h", m.h}, {"prop", set_json(m.prop)}};
  }
  return {};
}
Msg msg_from(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "madd") return Msg::add(elem_from(j.at("e")));
  if (kind == "mepochinc") return Msg::epochinc(j.at("h").get<EpochNumber>());
  if (kind == "proposal") return Msg::proposal(j.at("h").get<EpochNumber>(), set_from(j.at("prop")));
  throw SetchainError(Errc::decode_error, "unknown message kind " + kind);
}

Tag tag_from(const std::string& s) {
  for (int t = 0; t <= static_cast<int>(Tag::nop); ++t)
    if (to_string(static_cast<Tag>(t)) == s) return static_cast<Tag>(t);
  throw SetchainError(Errc::decode_error, "unknown event tag " + s);
}

}  // namespace

nlohmann::json to_json(const Event& ev) {
  nlohmann::json j;
  j["tag"] = std::string(to_string(ev.tag));
  if (ev.server) j["server"] = *ev.server;
  switch (ev.tag) {
    case Tag::add: j["e"] = elem_json(ev.e); break;
    case Tag::brb_broadcast:
    case Tag::brb_deliver:
    case Tag::sbc_inform: j["msg"] = msg_json(ev.msg); break;
    case Tag::epoch_inc: j["h"] = ev.h; break;
    case Tag::sbc_propose:
      j["h"] = ev.h;
      j["prop"] = set_json(ev.prop);
      break;
    case Tag::sbc_set_deliver:
    case Tag::sbc_consensus:
      j["h"] = ev.h;
      j["propset"] = propset_json(ev.propset);
      break;
    default: break;
  }
  return j;
}

Event event_from_json(const nlohmann::json& j) {
  Event ev;
  ev.tag = tag_from(j.at("tag").get<std::string>());
  if (j.contains("server")) ev.server = j.at("server").get<Pid>();
  if (j.contains("e")) ev.e = elem_from(j.at("e"));
  if (j.contains("msg")) ev.msg = msg_from(j.at("msg"));
  if (j.contains("h")) ev.h = j.at("h").get<EpochNumber>();
  if (j.contains("prop")) ev.prop = set_from(j.at("prop"));
  if (j.contains("propset")) ev.propset = propset_from(j.at("propset"));
  return ev;
}

nlohmann::json to_json(const Config& cfg) {
  nlohmann::json j;
  auto& sigma = j["sigma"] = nlohmann::json::object();
  for (const auto& [p, st] : cfg.sigma) {
    auto hist = nlohmann::json::array();
    for (const ElemSet& s : st.H) hist.push_back(set_json(s));
    sigma[std::to_string(p)] = {{"S", set_json(st.S)}, {"H", hist}, {"epoch", st.epoch}};
  }
  auto& delta = j["delta"] = nlohmann::json::object();
  for (const auto& [p, d] : cfg.delta) {
    auto sent = nlohmann::json::array(), rec = nlohmann::json::array(), pend = nlohmann::json::array();
    for (const Msg& m : d.sent) sent.push_back(msg_json(m));
    for (const Msg& m : d.received) rec.push_back(msg_json(m));
    for (const auto& [m, c] : d.pending) pend.push_back({msg_json(m), c});
    delta[std::to_string(p)] = {{"sent", sent}, {"pending", pend}, {"received", rec}};
  }
  auto& cons = j["consensus"] = nlohmann::json::object();
  for (const auto& [h, ps] : cfg.consensus) cons[std::to_string(h)] = propset_json(ps);
  j["knowledge"] = set_json(cfg.knowledge);
  return j;
}

nlohmann::json Counterexample::to_json() const {
  nlohmann::json j;
  j["direction"] = direction;
  j["n"] = n;
  j["f"] = f;
  j["seed"] = seed;
  auto& t = j["trace"] = nlohmann::json::array();
  for (const Event& ev : trace) t.push_back(model::to_json(ev));
  auto& m = j["mapped"] = nlohmann::json::array();
  for (const Event& ev : result.mapped) m.push_back(model::to_json(ev));
  j["ok"] = result.ok;
  j["step"] = result.step;
  j["reason"] = result.reason;
  j["left"] = model::to_json(result.left);
  j["right"] = model::to_json(result.right);
  return j;
}

Counterexample Counterexample::from_json(const nlohmann::json& j) {
  Counterexample cx;
  cx.direction = j.at("direction").get<std::string>();
  if (cx.direction != "forward" && cx.direction != "backward")
    throw SetchainError(Errc::decode_error, "direction must be forward or backward");
  cx.n = j.at("n").get<std::size_t>();
  cx.f = j.at("f").get<std::size_t>();
  cx.seed = j.value("seed", std::uint64_t{0});
  for (const auto& e : j.at("trace")) cx.trace.push_back(event_from_json(e));
  cx.result.ok = j.value("ok", false);
  cx.result.step = j.value("step", std::size_t{0});
  cx.result.reason = j.value("reason", std::string{});
  return cx;
}

MappingResult replay(const Counterexample& cx) {
  System g{Model::gamma, cx.n, cx.f};
  return cx.direction == "forward" ? map_forward(g, cx.trace) : map_backward(g, cx.trace);
}

}  // namespace setchain::model
