// SPDX-License-Identifier: Apache-2.0
#include "setchain/simnet/network.hpp"

#include <algorithm>
#include <sstream>

namespace setchain::sim {

void NetConfig::validate() const {
  if (latency_min < 0 || latency_max < latency_min)
    throw std::invalid_argument("latency_min must satisfy 0 <= latency_min <= latency_max");
  if (gst < 0 || post_gst_bound < 0) throw std::invalid_argument("negative gst or post_gst_bound");
}

std::string LogEntry::to_json_line() const {
  std::ostringstream os;
  os << "{\"t\":" << t << ",\"from\":" << raw(from) << ",\"to\":" << raw(to) << ",\"type\":\""
     << type << "\",\"size\":" << size() << "}";
  return os.str();
}

Network::Network(NetConfig cfg) : cfg_(cfg), rng_(cfg.rng_seed) { cfg_.validate(); }

Network::~Network() = default;

void Network::attach(ProcessId id, ProcessKind kind, std::unique_ptr<Process> p) {
  if (slots_.contains(id))
    throw SetchainError(Errc::harness, "process " + std::to_string(raw(id)) + " registered twice");
  p->id_ = id;
  p->kind_ = kind;
  Slot s;
  s.proc = std::move(p);
  s.kind = kind;
  slots_.emplace(id, std::move(s));
}

Network::Slot& Network::slot(ProcessId id) {
  auto it = slots_.find(id);
  if (it == slots_.end())
    throw SetchainError(Errc::harness, "unknown process " + std::to_string(raw(id)));
  return it->second;
}

ProcessKind Network::kind_of(ProcessId id) const {
  auto it = slots_.find(id);
  if (it == slots_.end())
    throw SetchainError(Errc::harness, "unknown process " + std::to_string(raw(id)));
  return it->second.kind;
}

Process& Network::process(ProcessId id) { return *slot(id).proc; }

std::vector<ProcessId> Network::processes() const {
  std::vector<ProcessId> out;
  out.reserve(slots_.size());
  for (const auto& [id, s] : slots_) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

SimTime Network::busy_until(ProcessId id) const {
  auto it = slots_.find(id);
  return it == slots_.end() ? 0 : it->second.busy_until;
}

SimTime Network::draw_deliver_at(SimTime base) {
  std::uniform_int_distribution<SimTime> dist(cfg_.latency_min, cfg_.latency_max);
  SimTime d = dist(rng_);
  if (base >= cfg_.gst) return base + std::min(d, cfg_.post_gst_bound);
  return std::min(base + d, cfg_.gst + cfg_.post_gst_bound);
}

void Network::send(ProcessId from, ProcessId to, SharedBytes body, std::string_view type) {
  if (!registered(from))
    throw SetchainError(Errc::harness, "send from unknown process " + std::to_string(raw(from)));
  if (!registered(to))
    throw SetchainError(Errc::harness, "send to unknown process " + std::to_string(raw(to)));
  if (current_ && *current_ != from)
    throw SetchainError(Errc::harness, "process " + std::to_string(raw(*current_)) +
                                           " tried to send as " + std::to_string(raw(from)));
  if (current_) {
    staged_.push_back(Staged{false, to, std::move(body), type, 0, 0});
    return;
  }
  schedule_delivery(from, to, std::move(body), type, now_);
}

void Network::multicast(ProcessId from, const std::vector<ProcessId>& to, SharedBytes body,
                        std::string_view type) {
  for (ProcessId t : to) send(from, t, body, type);
}

void Network::set_timer(ProcessId owner, SimTime delay, std::uint64_t tag) {
  if (!registered(owner))
    throw SetchainError(Errc::harness, "timer for unknown process " + std::to_string(raw(owner)));
  if (delay < 0) throw SetchainError(Errc::harness, "negative timer delay");
  if (current_ && *current_ == owner) {
    staged_.push_back(Staged{true, owner, nullptr, {}, delay, tag});
    return;
  }
  Event ev;
  ev.at = now_ + delay;
  ev.kind = EventKind::timer;
  ev.to = owner;
  ev.tag = tag;
  push(std::move(ev));
}

void Network::schedule_delivery(ProcessId from, ProcessId to, SharedBytes body,
                                std::string_view type, SimTime base) {
  const std::size_t size = body ? body->size() : 0;
  auto it = counts_.find(type);
  if (it == counts_.end()) it = counts_.emplace(std::string(type), 0).first;
  ++it->second;
  ++messages_sent_;
  bytes_sent_ += size;

  Event ev;
  ev.at = draw_deliver_at(base);
  ev.kind = EventKind::deliver;
  ev.to = to;
  ev.env.from = from;
  ev.env.to = to;
  ev.env.body = std::move(body);
  ev.env.type = type;
  ev.env.sent_at = base;
  ev.env.deliver_at = ev.at;
  push(std::move(ev));
}

void Network::push(Event ev) {
  ev.seq = next_seq_++;
  if (ev.kind == EventKind::deliver) ev.env.seq = ev.seq;
  queue_.push(std::move(ev));
}

std::optional<SimTime> Network::next_event_time() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().at;
}

bool Network::step() {
  if (queue_.empty()) return false;
  Event ev = queue_.top();
  queue_.pop();
  now_ = std::max(now_, ev.at);
  dispatch(std::move(ev));
  return true;
}

void Network::dispatch(Event ev) {
  const ProcessId who = ev.to;
  Slot& s = slot(who);
  if (ev.kind == EventKind::wakeup) {
    s.wakeup_pending = false;
    if (s.inbox.empty()) return;
    Event next = std::move(s.inbox.front());
    s.inbox.pop_front();
    handle(s, next);
  } else if (s.busy_until > now_ || !s.inbox.empty()) {
    s.inbox.push_back(std::move(ev));
  } else {
    handle(s, ev);
  }
  if (!s.inbox.empty() && !s.wakeup_pending) {
    Event w;
    w.at = std::max(s.busy_until, now_);
    w.kind = EventKind::wakeup;
    w.to = who;
    s.wakeup_pending = true;
    push(std::move(w));
  }
}

void Network::handle(Slot& s, Event& ev) {
  ++events_processed_;
  const ProcessId who = ev.to;
  current_ = who;
  handler_cost_ns_ = 0;
  staged_.clear();
  try {
    if (ev.kind == EventKind::deliver) {
      if (log_enabled_ && log_sink_ != nullptr)
        log_sink_->push_back(LogEntry{now_, ev.env.from, ev.env.to, ev.env.type, ev.env.body});
      s.proc->on_message(*this, ev.env);
    } else {
      s.proc->on_timer(*this, ev.tag);
    }
  } catch (const std::exception& ex) {
    current_.reset();
    std::ostringstream os;
    os << "handler failure at t=" << now_ << " in process " << raw(who);
    if (ev.kind == EventKind::deliver)
      os << " (from " << raw(ev.env.from) << ", type " << ev.env.type << ")";
    else
      os << " (timer " << ev.tag << ")";
    os << ": " << ex.what();
    throw SetchainError(Errc::harness, os.str());
  }
  current_.reset();

  const std::uint64_t total = s.carry_ns + handler_cost_ns_;
  const SimTime completion = now_ + static_cast<SimTime>(total / 1000);
  s.carry_ns = total % 1000;
  s.busy_until = completion;

  std::vector<Staged> staged = std::move(staged_);
  staged_.clear();
  for (auto& st : staged) {
    if (st.timer) {
      Event t;
      t.at = completion + st.delay;
      t.kind = EventKind::timer;
      t.to = st.to;
      t.tag = st.tag;
      push(std::move(t));
    } else {
      schedule_delivery(who, st.to, std::move(st.body), st.type, completion);
    }
  }
  if (after_handler_) after_handler_(who);
}

std::vector<LogEntry> Network::run_until(SimTime t) {
  std::vector<LogEntry> log;
  log_sink_ = &log;
  try {
    while (!queue_.empty() && queue_.top().at <= t) step();
  } catch (...) {
    log_sink_ = nullptr;
    throw;
  }
  log_sink_ = nullptr;
  now_ = std::max(now_, t);
  return log;
}

bool Network::run_until_quiescent(SimTime limit) {
  while (!queue_.empty() && queue_.top().at <= limit) step();
  return queue_.empty();
}

}  // namespace setchain::sim
