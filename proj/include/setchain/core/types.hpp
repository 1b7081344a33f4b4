// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace setchain {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using SharedBytes = std::shared_ptr<const Bytes>;

/// Identity of a simulated process. Unique within one run.
enum class ProcessId : std::uint32_t {};

constexpr ProcessId make_pid(std::uint32_t v) { return ProcessId{v}; }
constexpr std::uint32_t raw(ProcessId p) { return static_cast<std::uint32_t>(p); }

enum class ProcessKind : std::uint8_t {
  correct_server,
  byzantine_server,
  client,
  model_b,
  service,
};

std::string_view to_string(ProcessKind k);

inline bool is_server(ProcessKind k) {
  return k == ProcessKind::correct_server || k == ProcessKind::byzantine_server;
}

using EpochNumber = std::uint64_t;

/// Logical time in ticks (one tick = one simulated microsecond).
using SimTime = std::int64_t;

constexpr SimTime kTicksPerSecond = 1'000'000;

/// Outcome of a server-side request that can be refused.
enum class Status : std::uint8_t {
  ok,
  invalid_element,
  already_present,
  stale_or_future_epoch,
};

std::string_view to_string(Status s);

enum class Errc : std::uint8_t {
  insufficient_responses,
  unconfirmed,
  invalid_signer_count,
  no_signers,
  degenerate_metric,
  decode_error,
  invalid_scenario,
  harness,
};

std::string_view to_string(Errc e);

class SetchainError : public std::runtime_error {
 public:
  SetchainError(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace setchain

template <>
struct std::hash<setchain::ProcessId> {
  std::size_t operator()(setchain::ProcessId p) const noexcept {
    return std::hash<std::uint32_t>{}(setchain::raw(p));
  }
};
