// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "setchain/sbc/sbc.hpp"

using namespace setchain;
using namespace setchain::sim;

namespace {

const ProcessId kService = make_pid(1000);

class Probe : public Process {
 public:
  void on_message(Network& net, const Envelope& env) override {
    if (sbc::tag_of(env) == sbc::kSetDeliverTag) {
      delivered.push_back(*env.body);
      delivered_at.push_back(net.now());
    } else if (sbc::tag_of(env) == sbc::kInformTag) {
      informs.push_back(sbc::decode_inform(*env.body));
    }
  }
  std::vector<Bytes> delivered;
  std::vector<SimTime> delivered_at;
  std::vector<sbc::Inform> informs;
};

Element el(std::string_view s, std::uint32_t author = 0) {
  return Element(Bytes(s.begin(), s.end()), make_pid(author), Bytes{});
}

struct Rig {
  Network net;
  sbc::Service* service;
  std::map<ProcessId, Probe*> probes;

  explicit Rig(std::size_t n, sbc::ServiceConfig cfg = {}, NetConfig nc = [] {
    NetConfig c;
    c.latency_min = c.latency_max = 1;
    return c;
  }())
      : net(nc) {
    for (std::uint32_t i = 0; i < n; ++i) cfg.members.push_back(make_pid(i));
    service = &net.spawn<sbc::Service>(kService, ProcessKind::service, cfg);
    for (ProcessId p : cfg.members) probes[p] = &net.spawn<Probe>(p, ProcessKind::correct_server);
  }

  void propose(ProcessId p, EpochNumber h, const ElementSet& s) {
    net.send(p, kService, sbc::encode_propose(h, s), "sbc-propose");
  }

  sbc::SetDeliver decision(ProcessId p, std::size_t k = 0) {
    return sbc::decode_set_deliver(probes.at(p)->delivered.at(k));
  }
};

}  // namespace

TEST(Sbc, IdenticalProposalsAreTheDecision) {
  Rig s(4);
  const ElementSet P{el("a"), el("b")};
  for (auto& [p, probe] : s.probes) s.propose(p, 1, P);
  ASSERT_TRUE(s.net.run_until_quiescent(10'000));
  const auto d = s.decision(make_pid(0));
  EXPECT_EQ(d.h, 1u);
  EXPECT_EQ(sbc::decision_union(d.decision), P);
  EXPECT_EQ(d.decision.size(), 4u);
}

TEST(Sbc, EmptyProposalsDecideEmpty) {
  Rig s(4);
  for (auto& [p, probe] : s.probes) s.propose(p, 1, {});
  ASSERT_TRUE(s.net.run_until_quiescent(10'000));
  EXPECT_TRUE(sbc::decision_union(s.decision(make_pid(2)).decision).empty());
}

TEST(Sbc, ByzantineProposalBeforeDeadlineIsIncludedButBounded) {
  Rig s(4);
  for (std::uint32_t i = 0; i < 3; ++i) s.propose(make_pid(i), 1, {el("a")});
  s.propose(make_pid(3), 1, {el("z", 3)});
  ASSERT_TRUE(s.net.run_until_quiescent(10'000));
  const auto all = sbc::decision_union(s.decision(make_pid(0)).decision);
  EXPECT_TRUE(all.contains(el("a")));
  EXPECT_TRUE(std::includes(ElementSet{el("a"), el("z", 3)}.begin(), ElementSet{el("a"), el("z", 3)}.end(),
                            all.begin(), all.end()));
}

TEST(Sbc, DecisionKeysAreTheProposers) {
  Rig s(4);
  for (std::uint32_t i = 0; i < 3; ++i) s.propose(make_pid(i), 1, {el("a")});
  ASSERT_TRUE(s.net.run_until_quiescent(10'000));
  std::set<ProcessId> keys;
  for (const auto& [p, set] : s.decision(make_pid(1)).decision) keys.insert(p);
  EXPECT_EQ(keys, (std::set<ProcessId>{make_pid(0), make_pid(1), make_pid(2)}));
}

TEST(Sbc, EveryMemberSeesByteIdenticalDeliveries) {
  NetConfig nc;
  nc.latency_max = 40;
  nc.rng_seed = 8;
  Rig s(7, {}, nc);
  for (EpochNumber h = 1; h <= 3; ++h)
    for (auto& [p, probe] : s.probes)
      if (raw(p) % 2 || h == 2) s.propose(p, h, {el("x" + std::to_string(h) + std::to_string(raw(p)))});
  ASSERT_TRUE(s.net.run_until_quiescent(100'000));
  // Arrival order depends on the link delays; the bytes per instance do not.
  auto sorted = [](std::vector<Bytes> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto ref = sorted(s.probes.at(make_pid(0))->delivered);
  ASSERT_EQ(ref.size(), 3u);
  for (auto& [p, probe] : s.probes) EXPECT_EQ(sorted(probe->delivered), ref);
}

TEST(Sbc, CensorshipResistanceAfterGst) {
  sbc::ServiceConfig cfg;
  cfg.gst = 300;
  NetConfig nc;
  nc.latency_max = 200;
  nc.gst = 300;
  nc.post_gst_bound = 10;
  nc.rng_seed = 3;
  Rig s(4, cfg, nc);
  // Before gst the delays are wild; after it everyone's proposal makes the
  // window.
  s.net.run_until(400);
  for (std::uint32_t i = 0; i < 3; ++i) s.propose(make_pid(i), 1, {el("e"), el("own" + std::to_string(i))});
  ASSERT_TRUE(s.net.run_until_quiescent(100'000));
  const auto all = sbc::decision_union(s.decision(make_pid(0)).decision);
  EXPECT_TRUE(all.contains(el("e")));
  EXPECT_EQ(s.decision(make_pid(0)).decision.size(), 3u);
}

TEST(Sbc, DeadlineIsNeverBeforeGst) {
  sbc::ServiceConfig cfg;
  cfg.gst = 1000;
  cfg.window = 50;
  Rig s(4, cfg);
  s.propose(make_pid(0), 1, {el("a")});
  ASSERT_TRUE(s.net.run_until_quiescent(100'000));
  ASSERT_EQ(s.service->records().size(), 1u);
  EXPECT_EQ(s.service->records()[0].decided_at, 1000);
}

TEST(Sbc, InformPerProposeCallToEveryOtherMember) {
  Rig s(4);
  s.propose(make_pid(0), 1, {el("a")});
  s.propose(make_pid(0), 1, {el("b")});
  s.propose(make_pid(1), 1, {el("c")});
  ASSERT_TRUE(s.net.run_until_quiescent(10'000));
  EXPECT_EQ(s.service->instances().at(1).propose_calls, 3u);
  EXPECT_EQ(s.probes[make_pid(0)]->informs.size(), 1u);
  EXPECT_EQ(s.probes[make_pid(1)]->informs.size(), 2u);
  EXPECT_EQ(s.probes[make_pid(2)]->informs.size(), 3u);
  // Only the first proposal of a proposer counts.
  EXPECT_EQ(s.decision(make_pid(2)).decision.at(make_pid(0)), ElementSet{el("a")});
  const auto& inf = s.probes[make_pid(3)]->informs[1];
  EXPECT_EQ(inf.proposer, make_pid(0));
  EXPECT_EQ(inf.prop, ElementSet{el("b")});
}

TEST(Sbc, NoProposalsNoTraffic) {
  Rig s(4);
  ASSERT_TRUE(s.net.run_until_quiescent(10'000));
  for (auto& [p, probe] : s.probes) {
    EXPECT_TRUE(probe->informs.empty());
    EXPECT_TRUE(probe->delivered.empty());
  }
  EXPECT_EQ(s.service->last_decided(), 0u);
}

TEST(Sbc, InstancesDecideInOrder) {
  Rig s(4);
  s.propose(make_pid(0), 2, {el("late")});
  s.net.run_until(500);
  EXPECT_TRUE(s.probes[make_pid(1)]->delivered.empty());
  s.propose(make_pid(0), 1, {el("early")});
  ASSERT_TRUE(s.net.run_until_quiescent(10'000));
  ASSERT_EQ(s.probes[make_pid(1)]->delivered.size(), 2u);
  EXPECT_EQ(s.decision(make_pid(1), 0).h, 1u);
  EXPECT_EQ(s.decision(make_pid(1), 1).h, 2u);
}

TEST(Sbc, DecisionCostDelaysDelivery) {
  sbc::ServiceConfig cfg;
  cfg.window = 50;
  cfg.decision_cost = 100;
  Rig s(4, cfg);
  s.propose(make_pid(0), 1, {el("a")});
  ASSERT_TRUE(s.net.run_until_quiescent(10'000));
  // propose arrives at 1, decides at 51, emits at 151, lands at 152.
  EXPECT_EQ(s.probes[make_pid(2)]->delivered_at.at(0), 152);
}

TEST(Sbc, ReleasesProposalsWhenNotRetained) {
  sbc::ServiceConfig cfg;
  cfg.retain = false;
  Rig s(4, cfg);
  s.propose(make_pid(0), 1, {el("a")});
  ASSERT_TRUE(s.net.run_until_quiescent(10'000));
  EXPECT_TRUE(s.service->instances().at(1).proposals.empty());
  EXPECT_EQ(sbc::decision_union(s.decision(make_pid(0)).decision), ElementSet{el("a")});
}

TEST(Sbc, NonMembersAndMalformedProposalsIgnored) {
  Rig s(4);
  s.net.spawn<Probe>(make_pid(50), ProcessKind::client);
  s.net.send(make_pid(50), kService, sbc::encode_propose(1, {el("x")}), "sbc-propose");
  s.net.send(make_pid(0), kService, Bytes{sbc::kProposeTag, 1}, "sbc-propose");
  ASSERT_TRUE(s.net.run_until_quiescent(10'000));
  EXPECT_TRUE(s.service->instances().empty());
}

TEST(Sbc, RecordJsonLine) {
  sbc::DecisionRecord r;
  r.h = 2;
  r.proposers = {make_pid(0), make_pid(3)};
  r.union_size = 5;
  EXPECT_EQ(r.to_json_line(), R"({"h":2,"proposers":[0,3],"union_size":5})");
}

TEST(SbcWire, DecodersRejectGarbage) {
  EXPECT_THROW(sbc::decode_set_deliver(Bytes{sbc::kSetDeliverTag, 0, 0}), SetchainError);
  EXPECT_THROW(sbc::decode_inform(Bytes{sbc::kProposeTag}), SetchainError);
  sbc::Decision d{{make_pid(1), {el("a")}}, {make_pid(2), {}}};
  const auto sd = sbc::decode_set_deliver(sbc::encode_set_deliver(4, d));
  EXPECT_EQ(sd.h, 4u);
  EXPECT_EQ(sd.decision, d);
}
