// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <functional>

#include "setchain/simnet/network.hpp"

using namespace setchain;
using namespace setchain::sim;

namespace {

class Recorder : public Process {
 public:
  struct Seen {
    SimTime at;
    ProcessId from;
    Bytes body;
    SimTime sent_at;
  };
  std::function<void(Network&, const Envelope&)> react;
  std::vector<Seen> seen;
  std::vector<std::pair<SimTime, std::uint64_t>> timers;

  void on_message(Network& net, const Envelope& env) override {
    seen.push_back({net.now(), env.from, *env.body, env.sent_at});
    if (react) react(net, env);
  }
  void on_timer(Network& net, std::uint64_t tag) override { timers.emplace_back(net.now(), tag); }
};

NetConfig fixed(SimTime latency) {
  NetConfig c;
  c.latency_min = c.latency_max = latency;
  return c;
}

const ProcessId A = make_pid(1), B = make_pid(2), C = make_pid(3);

}  // namespace

TEST(Network, UnitLatencyDeliversExactlyOneTickLater) {
  Network net(fixed(1));
  net.spawn<Recorder>(A, ProcessKind::client);
  auto& b = net.spawn<Recorder>(B, ProcessKind::client);
  net.send(A, B, Bytes{7}, "m");
  const auto log = net.run_until(1);
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0].t, 1);
  ASSERT_EQ(b.seen.size(), 1u);
  EXPECT_EQ(b.seen[0].at, 1);
  EXPECT_EQ(b.seen[0].body, Bytes{7});
}

TEST(Network, RunUntilBoundaryIsInclusive) {
  Network net(fixed(5));
  net.spawn<Recorder>(A, ProcessKind::client);
  net.spawn<Recorder>(B, ProcessKind::client);
  EXPECT_TRUE(net.run_until(0).empty());
  net.send(A, B, Bytes{1}, "m");
  EXPECT_TRUE(net.run_until(4).empty());
  EXPECT_EQ(net.now(), 4);
  EXPECT_EQ(net.run_until(5).size(), 1u);
}

TEST(Network, EqualTimesProcessInSendOrder) {
  auto run = [] {
    Network net(fixed(3));
    net.spawn<Recorder>(A, ProcessKind::client);
    auto& b = net.spawn<Recorder>(B, ProcessKind::client);
    for (std::uint8_t i = 0; i < 3; ++i) net.send(A, B, Bytes{i}, "m");
    std::string lines;
    for (const auto& e : net.run_until(10)) lines += e.to_json_line() + "\n";
    std::vector<Bytes> order;
    for (const auto& s : b.seen) order.push_back(s.body);
    EXPECT_EQ(order, (std::vector<Bytes>{{0}, {1}, {2}}));
    return lines;
  };
  EXPECT_EQ(run(), run());
}

TEST(Network, SameSeedSameSchedule) {
  auto run = [](std::uint64_t seed) {
    NetConfig c;
    c.latency_min = 1;
    c.latency_max = 50;
    c.rng_seed = seed;
    Network net(c);
    net.spawn<Recorder>(A, ProcessKind::client);
    net.spawn<Recorder>(B, ProcessKind::client);
    net.spawn<Recorder>(C, ProcessKind::client);
    for (std::uint8_t i = 0; i < 50; ++i) net.send(A, i % 2 ? B : C, Bytes{i}, "m");
    std::string lines;
    for (const auto& e : net.run_until(1000)) lines += e.to_json_line() + "\n";
    return lines;
  };
  EXPECT_EQ(run(3), run(3));
  EXPECT_NE(run(3), run(4));
}

TEST(Network, PostGstDelaysAreBounded) {
  NetConfig c;
  c.latency_min = 1;
  c.latency_max = 1000;
  c.gst = 0;
  c.post_gst_bound = 10;
  c.rng_seed = 11;
  Network net(c);
  net.spawn<Recorder>(A, ProcessKind::client);
  auto& b = net.spawn<Recorder>(B, ProcessKind::client);
  for (int i = 0; i < 10'000; ++i) net.send(A, B, Bytes{1}, "m");
  net.run_until_quiescent(1'000'000);
  ASSERT_EQ(b.seen.size(), 10'000u);
  for (const auto& s : b.seen) EXPECT_LE(s.at - s.sent_at, 10);
}

TEST(Network, PreGstMessagesArriveByGstPlusBound) {
  NetConfig c;
  c.latency_min = 1;
  c.latency_max = 100'000;
  c.gst = 500;
  c.post_gst_bound = 10;
  Network net(c);
  net.spawn<Recorder>(A, ProcessKind::client);
  auto& b = net.spawn<Recorder>(B, ProcessKind::client);
  for (int i = 0; i < 1000; ++i) net.send(A, B, Bytes{1}, "m");
  net.run_until_quiescent(1'000'000);
  for (const auto& s : b.seen) EXPECT_LE(s.at, 510);
}

TEST(Network, HandlerCannotSendAsAnotherProcess) {
  Network net(fixed(1));
  auto& a = net.spawn<Recorder>(A, ProcessKind::client);
  net.spawn<Recorder>(B, ProcessKind::client);
  net.spawn<Recorder>(C, ProcessKind::client);
  a.react = [](Network& n, const Envelope&) { n.send(C, B, Bytes{0}, "spoof"); };
  net.send(B, A, Bytes{0}, "m");
  try {
    net.run_until(5);
    FAIL() << "spoofed send accepted";
  } catch (const SetchainError& e) {
    EXPECT_EQ(e.code(), Errc::harness);
  }
}

TEST(Network, UnknownProcessesAreErrors) {
  Network net(fixed(1));
  net.spawn<Recorder>(A, ProcessKind::client);
  EXPECT_THROW(net.send(A, B, Bytes{}, "m"), SetchainError);
  EXPECT_THROW(net.send(B, A, Bytes{}, "m"), SetchainError);
  EXPECT_THROW(net.set_timer(B, 1, 0), SetchainError);
  EXPECT_THROW(net.spawn<Recorder>(A, ProcessKind::client), SetchainError);
  EXPECT_THROW(net.kind_of(B), SetchainError);
}

TEST(Network, InvalidConfigRejected) {
  NetConfig c;
  c.latency_min = 5;
  c.latency_max = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Network, ChargedHandlerDelaysItsOutputAndQueue) {
  Network net(fixed(1));
  auto& a = net.spawn<Recorder>(A, ProcessKind::client);
  auto& b = net.spawn<Recorder>(B, ProcessKind::client);
  // 10 microseconds of work per message.
  a.react = [](Network& n, const Envelope& env) {
    n.charge(10'000);
    n.send(A, env.from, Bytes{9}, "reply");
  };
  net.send(B, A, Bytes{1}, "m");
  net.send(B, A, Bytes{2}, "m");
  net.run_until_quiescent(1000);
  ASSERT_EQ(a.seen.size(), 2u);
  EXPECT_EQ(a.seen[0].at, 1);
  // The second message waits for the first handler to finish.
  EXPECT_EQ(a.seen[1].at, 11);
  ASSERT_EQ(b.seen.size(), 2u);
  EXPECT_EQ(b.seen[0].at, 12);
  EXPECT_EQ(b.seen[1].at, 22);
  EXPECT_EQ(net.busy_until(A), 21);
}

TEST(Network, TimersFireAtTheirTick) {
  Network net(fixed(1));
  auto& a = net.spawn<Recorder>(A, ProcessKind::client);
  net.set_timer(A, 7, 3);
  net.set_timer(A, 2, 4);
  net.run_until(10);
  EXPECT_EQ(a.timers, (std::vector<std::pair<SimTime, std::uint64_t>>{{2, 4}, {7, 3}}));
}

TEST(Network, CountsMessagesByType) {
  Network net(fixed(1));
  net.spawn<Recorder>(A, ProcessKind::client);
  net.spawn<Recorder>(B, ProcessKind::client);
  net.multicast(A, {B, B}, std::make_shared<const Bytes>(Bytes{1, 2}), "x");
  net.send(A, B, Bytes{}, "y");
  EXPECT_EQ(net.messages_sent(), 3u);
  EXPECT_EQ(net.message_counts().at("x"), 2u);
  EXPECT_EQ(net.message_counts().at("y"), 1u);
  EXPECT_TRUE(net.run_until_quiescent(100));
  EXPECT_TRUE(net.idle());
}

TEST(Network, LogLineFormat) {
  LogEntry e{3, A, B, "m", std::make_shared<const Bytes>(Bytes{1, 2, 3})};
  EXPECT_EQ(e.to_json_line(), R"({"t":3,"from":1,"to":2,"type":"m","size":3})");
}
