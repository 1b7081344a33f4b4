// SPDX-License-Identifier: Apache-2.0
#include "setchain/core/types.hpp"

namespace setchain {

std::string_view to_string(ProcessKind k) {
  switch (k) {
    case ProcessKind::correct_server: return "correct-server";
    case ProcessKind::byzantine_server: return "byzantine-server";
    case ProcessKind::client: return "client";
    case ProcessKind::model_b: return "model-b";
    case ProcessKind::service: return "service";
  }
  return "unknown";
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::invalid_element: return "invalid-element";
    case Status::already_present: return "already-present";
    case Status::stale_or_future_epoch: return "stale-or-future-epoch";
  }
  return "unknown";
}

std::string_view to_string(Errc e) {
  switch (e) {
    case Errc::insufficient_responses: return "insufficient-responses";
    case Errc::unconfirmed: return "unconfirmed";
    case Errc::invalid_signer_count: return "invalid-signer-count";
    case Errc::no_signers: return "no-signers";
    case Errc::degenerate_metric: return "degenerate-metric";
    case Errc::decode_error: return "decode-error";
    case Errc::invalid_scenario: return "invalid-scenario";
    case Errc::harness: return "harness-error";
  }
  return "unknown";
}

}  // namespace setchain
