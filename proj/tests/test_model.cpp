// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "setchain/model/havoc.hpp"
#include "setchain/model/model.hpp"
#include "setchain/server/server.hpp"

using namespace setchain;
using namespace setchain::model;

namespace {

const System kSys{Model::gamma, 4, 1};  // servers 0..2 correct, 3 Byzantine
const Elem a{1, true}, b{2, true}, bad{9, false};

Event at(Tag t, Pid s) {
  Event ev;
  ev.tag = t;
  ev.server = s;
  return ev;
}
Event add(Pid s, Elem e) {
  Event ev = at(Tag::add, s);
  ev.e = e;
  return ev;
}
Event deliver(Pid s, Msg m) {
  Event ev = at(Tag::brb_deliver, s);
  ev.msg = std::move(m);
  return ev;
}
Event inform(Pid s, Msg m) {
  Event ev = at(Tag::sbc_inform, s);
  ev.msg = std::move(m);
  return ev;
}
Event epoch_inc(Pid s, EpochNumber h) {
  Event ev = at(Tag::epoch_inc, s);
  ev.h = h;
  return ev;
}
Event consensus(EpochNumber h, PropSet ps) {
  Event ev;
  ev.tag = Tag::sbc_consensus;
  ev.h = h;
  ev.propset = std::move(ps);
  return ev;
}
Event set_deliver(Pid s, EpochNumber h, PropSet ps) {
  Event ev = at(Tag::sbc_set_deliver, s);
  ev.h = h;
  ev.propset = std::move(ps);
  return ev;
}

// Server 0 learns a, then asks for epoch 1 and proposes {a}.
Config proposed_a() {
  Config c = initial(kSys);
  apply(kSys, add(0, a), c);
  apply(kSys, deliver(0, Msg::add(a)), c);
  apply(kSys, epoch_inc(0, 1), c);
  apply(kSys, deliver(0, Msg::epochinc(1)), c);
  return c;
}

}  // namespace

TEST(ModelEvents, NopChangesNothing) {
  const Config c = proposed_a();
  EXPECT_TRUE(enabled(kSys, Event::nop(), c));
  EXPECT_EQ(effect(kSys, Event::nop(), c), c);
}

TEST(ModelEvents, DeliverNeedsAPendingMessage) {
  Config c = initial(kSys);
  EXPECT_FALSE(enabled(kSys, deliver(1, Msg::add(a)), c));
  EXPECT_THROW(apply(kSys, deliver(1, Msg::add(a)), c), SetchainError);
  apply(kSys, add(0, a), c);
  EXPECT_TRUE(enabled(kSys, deliver(1, Msg::add(a)), c));
}

TEST(ModelEvents, AddPreconditions) {
  Config c = initial(kSys);
  EXPECT_FALSE(enabled(kSys, add(0, bad), c));
  apply(kSys, add(0, a), c);
  apply(kSys, deliver(0, Msg::add(a)), c);
  EXPECT_FALSE(enabled(kSys, add(0, a), c));
  EXPECT_TRUE(enabled(kSys, add(3, a), c));
  EXPECT_FALSE(enabled(kSys, epoch_inc(0, 2), c));
  EXPECT_TRUE(enabled(kSys, epoch_inc(3, 7), c));
}

TEST(ModelEvents, ConsensusPicksFromProposals) {
  Config c = proposed_a();
  EXPECT_FALSE(enabled(kSys, consensus(1, {{b}}), c));
  EXPECT_FALSE(enabled(kSys, consensus(2, {{a}}), c));
  EXPECT_FALSE(enabled(kSys, consensus(0, {{a}}), c));
  EXPECT_TRUE(enabled(kSys, consensus(1, {{a}}), c));
  EXPECT_TRUE(enabled(kSys, consensus(1, {}), c));
  apply(kSys, consensus(1, {{a}}), c);
  EXPECT_FALSE(enabled(kSys, consensus(1, {{a}}), c));
  EXPECT_FALSE(enabled(kSys, set_deliver(1, 1, {}), c));
}

TEST(ModelEvents, InformTeachesTheAdversary) {
  Config c = proposed_a();
  EXPECT_TRUE(c.knowledge.empty());
  apply(kSys, inform(3, Msg::proposal(1, {a})), c);
  EXPECT_EQ(c.knowledge, ElemSet{a});
}

TEST(ModelEvents, ByzantineCannotBroadcastUnknownValidElements) {
  Config c = initial(kSys);
  Event ev = at(Tag::brb_broadcast, 3);
  ev.msg = Msg::add(a);
  EXPECT_FALSE(enabled(kSys, ev, c));
  ev.msg = Msg::add(bad);
  EXPECT_TRUE(enabled(kSys, ev, c));
  Event prop = at(Tag::sbc_propose, 3);
  prop.h = 1;
  prop.prop = {bad};
  EXPECT_TRUE(enabled(kSys, prop, c));
  prop.prop = {a, bad};
  EXPECT_FALSE(enabled(kSys, prop, c));
}

TEST(ModelEvents, SetDeliverStampsOnlyValidUnstamped) {
  Config c = proposed_a();
  // The Byzantine server proposes an invalid element alongside a.
  Event prop = at(Tag::sbc_propose, 3);
  prop.h = 1;
  prop.prop = {bad};
  apply(kSys, prop, c);
  apply(kSys, consensus(1, {{a}, {bad}}), c);
  apply(kSys, set_deliver(1, 1, {{a}, {bad}}), c);
  const LocalState& s = c.sigma.at(1);
  EXPECT_EQ(s.epoch, 1u);
  ASSERT_EQ(s.H.size(), 1u);
  EXPECT_EQ(s.H[0], ElemSet{a});
  EXPECT_EQ(s.S, ElemSet{a});
}

TEST(ModelEquiv, InitialConfigsAreEquivalent) {
  for (auto [n, f] : {std::pair<std::size_t, std::size_t>{4, 1}, {7, 2}, {10, 3}}) {
    const System g{Model::gamma, n, f};
    EXPECT_TRUE(obs_equiv(g, initial(g), initial(g.prime())));
  }
}

TEST(ModelEquiv, DifferentCorrectEpochBreaksEquivalence) {
  Config left = initial(kSys);
  Config right = initial(kSys.prime());
  left.sigma[1].epoch = 1;
  std::string why;
  EXPECT_FALSE(obs_equiv(kSys, left, right, &why));
  EXPECT_FALSE(why.empty());
}

TEST(ModelMapping, CorrectOnlyTraceMapsToItself) {
  std::vector<Event> trace{add(0, a), deliver(0, Msg::add(a)), deliver(1, Msg::add(a)), epoch_inc(1, 1)};
  const auto r = map_forward(kSys, trace);
  ASSERT_TRUE(r.ok) << r.reason;
  EXPECT_EQ(r.mapped, trace);
}

TEST(ModelMapping, ByzantineEventsMoveToTheSingleAdversary) {
  std::vector<Event> trace{add(0, a), deliver(3, Msg::add(a))};
  const auto r = map_forward(kSys, trace);
  ASSERT_TRUE(r.ok) << r.reason;
  EXPECT_EQ(r.mapped[1].server, kSys.b());
}

TEST(ModelMapping, RandomTracesMapBothWays) {
  for (auto [n, f] : {std::pair<std::size_t, std::size_t>{4, 1}, {7, 2}}) {
    const System g{Model::gamma, n, f};
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto fwd = map_forward(g, generate_trace(g, seed, 120));
      EXPECT_TRUE(fwd.ok) << fwd.reason;
      const auto trace_prime = generate_trace(g.prime(), seed, 120);
      const auto bwd = map_backward(g, trace_prime);
      ASSERT_TRUE(bwd.ok) << bwd.reason;
      EXPECT_EQ(bwd.mapped.size(), (f - 1) + f * trace_prime.size());
    }
  }
}

TEST(ModelMapping, DisabledInputIsReportedAtItsStep) {
  std::vector<Event> trace{add(0, a), deliver(1, Msg::add(b))};
  const auto r = map_forward(kSys, trace);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.step, 1u);
  EXPECT_NE(r.reason.find("not enabled"), std::string::npos);
  EXPECT_THROW(map_forward(System{Model::gamma, 3, 1}, {}), std::invalid_argument);
}

TEST(ModelJson, EventAndCounterexampleRoundTrip) {
  const auto trace = generate_trace(kSys, 3, 60);
  for (const Event& ev : trace) EXPECT_EQ(event_from_json(to_json(ev)), ev);
  Counterexample cx;
  cx.direction = "forward";
  cx.n = 4;
  cx.f = 1;
  cx.seed = 3;
  cx.trace = trace;
  cx.result = map_forward(kSys, trace);
  const auto back = Counterexample::from_json(nlohmann::json::parse(cx.to_json().dump()));
  EXPECT_EQ(back.trace, trace);
  EXPECT_EQ(back.direction, "forward");
  EXPECT_TRUE(replay(back).ok);
}

TEST(Havoc, CorrectServersAgreeAndEmittedElementsAreKnownOrBroken) {
  using namespace setchain::sim;
  Network net{NetConfig{}};
  auto keys = std::make_shared<Keyring>(scheme_by_name("hmac"), 2);
  const ProcessId sbc_id = make_pid(1000), author = make_pid(100);
  std::vector<ProcessId> members;
  for (std::uint32_t i = 0; i < 4; ++i) members.push_back(make_pid(i));
  for (ProcessId p : members) keys->register_process(p);
  keys->register_process(author);
  net.spawn<sbc::Service>(sbc_id, ProcessKind::service, sbc::ServiceConfig{members});
  std::vector<server::Server*> servers;
  for (std::size_t i = 0; i < 3; ++i) {
    server::ServerConfig cfg;
    cfg.members = members;
    cfg.f = 1;
    cfg.sbc = sbc_id;
    cfg.keys = keys;
    servers.push_back(&net.spawn<server::Server>(members[i], ProcessKind::correct_server, cfg));
  }
  auto shared = std::make_shared<HavocShared>();
  ElementSet emitted;
  HavocConfig hc{members, sbc_id, keys, shared, 5, 20, [&](const Element& e) { emitted.insert(e); }};
  auto& havoc = net.spawn<HavocServer>(members[3], ProcessKind::byzantine_server, hc);
  havoc.start(net);
  for (int i = 0; i < 20; ++i) {
    servers[i % 3]->add(net, Element::sign(*keys, author, Bytes{static_cast<std::uint8_t>(i)}));
    net.run_until(net.now() + 50);
    if (i % 5 == 4) servers[0]->epoch_inc(net, servers[0]->epoch() + 1);
  }
  havoc.stop();
  ASSERT_TRUE(net.run_until_quiescent(net.now() + 1'000'000));
  EXPECT_GT(havoc.actions(), 0u);
  for (const auto* s : servers) {
    EXPECT_EQ(s->history(), servers[0]->history());
    EXPECT_EQ(s->theset(), servers[0]->theset());
  }
  for (const Element& e : emitted) EXPECT_TRUE(!valid(e, *keys) || shared->knowledge.contains(e));
  EXPECT_FALSE(emitted.empty());
}
