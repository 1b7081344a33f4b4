// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "setchain/core/types.hpp"

namespace setchain::sim {

struct NetConfig {
  SimTime latency_min = 1;
  SimTime latency_max = 5;
  // Global stabilization time. From here on every message is delivered within
  // post_gst_bound ticks of max(send time, gst).
  SimTime gst = 0;
  SimTime post_gst_bound = 10;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct Envelope {
  ProcessId from{};
  ProcessId to{};
  SharedBytes body;
  // Static label used for logging and message accounting only.
  std::string_view type;
  SimTime sent_at = 0;
  SimTime deliver_at = 0;
  std::uint64_t seq = 0;
};

struct LogEntry {
  SimTime t = 0;
  ProcessId from{};
  ProcessId to{};
  std::string_view type;
  SharedBytes body;

  std::size_t size() const { return body ? body->size() : 0; }
  /// {"t":..,"from":..,"to":..,"type":"..","size":..}
  std::string to_json_line() const;
};

class Network;

class Process {
 public:
  virtual ~Process() = default;

  virtual void on_message(Network& net, const Envelope& env) = 0;
  virtual void on_timer(Network& net, std::uint64_t tag) {
    (void)net;
    (void)tag;
  }

  ProcessId id() const { return id_; }
  ProcessKind kind() const { return kind_; }

 private:
  friend class Network;
  ProcessId id_{};
  ProcessKind kind_ = ProcessKind::client;
};

/// Deterministic discrete-event network.
///
/// Events are processed in (time, sequence number) order; sequence numbers
/// are assigned when an event is scheduled. A process may be charged CPU time
/// by its handler; while busy, arriving events queue in FIFO order and the
/// handler's outgoing messages leave at completion time. With zero charges the
/// network is a pure latency model.
class Network {
 public:
  explicit Network(NetConfig cfg);
  ~Network();

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  template <class P, class... Args>
  P& spawn(ProcessId id, ProcessKind kind, Args&&... args) {
    auto p = std::make_unique<P>(std::forward<Args>(args)...);
    P& ref = *p;
    attach(id, kind, std::move(p));
    return ref;
  }
  void attach(ProcessId id, ProcessKind kind, std::unique_ptr<Process> p);

  bool registered(ProcessId id) const { return slots_.contains(id); }
  ProcessKind kind_of(ProcessId id) const;
  Process& process(ProcessId id);
  std::vector<ProcessId> processes() const;

  /// Inside a handler `from` must be the running process; the harness may
  /// inject on behalf of any registered process.
  void send(ProcessId from, ProcessId to, SharedBytes body, std::string_view type);
  void send(ProcessId from, ProcessId to, Bytes body, std::string_view type) {
    send(from, to, std::make_shared<const Bytes>(std::move(body)), type);
  }
  void multicast(ProcessId from, const std::vector<ProcessId>& to, SharedBytes body,
                 std::string_view type);

  void set_timer(ProcessId owner, SimTime delay, std::uint64_t tag);

  /// Adds CPU time (nanoseconds) to the handler currently running.
  void charge(std::uint64_t nanos) { handler_cost_ns_ += nanos; }

  /// Processes every event due at or before t, then advances the clock to t.
  std::vector<LogEntry> run_until(SimTime t);
  /// Runs until no event is left or `limit` is passed. True when drained.
  bool run_until_quiescent(SimTime limit);
  bool step();

  SimTime now() const { return now_; }
  bool idle() const { return queue_.empty(); }
  std::optional<SimTime> next_event_time() const;
  std::optional<ProcessId> current() const { return current_; }
  SimTime busy_until(ProcessId id) const;

  void set_log_enabled(bool on) { log_enabled_ = on; }
  void set_after_handler(std::function<void(ProcessId)> fn) { after_handler_ = std::move(fn); }

  const std::map<std::string, std::uint64_t, std::less<>>& message_counts() const { return counts_; }
  std::uint64_t messages_sent() const { return messages_sent_; }
  std::uint64_t bytes_sent() const { return bytes_sent_; }
  std::uint64_t events_processed() const { return events_processed_; }
  const NetConfig& config() const { return cfg_; }

 private:
  enum class EventKind : std::uint8_t { deliver, timer, wakeup };

  struct Event {
    SimTime at = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::deliver;
    ProcessId to{};
    Envelope env;
    std::uint64_t tag = 0;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  struct Slot {
    std::unique_ptr<Process> proc;
    ProcessKind kind{};
    SimTime busy_until = 0;
    std::uint64_t carry_ns = 0;
    std::deque<Event> inbox;
    bool wakeup_pending = false;
  };
  struct Staged {
    bool timer = false;
    ProcessId to{};
    SharedBytes body;
    std::string_view type;
    SimTime delay = 0;
    std::uint64_t tag = 0;
  };

  Slot& slot(ProcessId id);
  void schedule_delivery(ProcessId from, ProcessId to, SharedBytes body, std::string_view type,
                         SimTime base);
  void push(Event ev);
  void dispatch(Event ev);
  void handle(Slot& s, Event& ev);
  SimTime draw_deliver_at(SimTime base);

  NetConfig cfg_;
  std::mt19937_64 rng_;
  std::unordered_map<ProcessId, Slot> slots_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_seq_ = 0;
  SimTime now_ = 0;

  std::optional<ProcessId> current_;
  std::uint64_t handler_cost_ns_ = 0;
  std::vector<Staged> staged_;

  bool log_enabled_ = true;
  std::vector<LogEntry>* log_sink_ = nullptr;
  std::function<void(ProcessId)> after_handler_;

  std::map<std::string, std::uint64_t, std::less<>> counts_;
  std::uint64_t messages_sent_ = 0;
  std::uint64_t bytes_sent_ = 0;
  std::uint64_t events_processed_ = 0;
};

}  // namespace setchain::sim
