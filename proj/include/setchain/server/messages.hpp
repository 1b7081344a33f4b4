// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <variant>

#include "setchain/core/history.hpp"

namespace setchain::server {

/// Payloads carried inside reliable broadcast.
///
///   madd        0x01 | element
///   madd-batch  0x02 | set
///   mepochinc   0x03 | u64 h
struct AddOne {
  Element e;
};
struct AddBatch {
  ElementSet s;
};
struct EpochInc {
  EpochNumber h = 0;
};
using AppMessage = std::variant<EpochInc, AddOne, AddBatch>;

Bytes encode_app(const AppMessage& m);
/// Throws SetchainError(decode_error).
AppMessage decode_app(ByteView body);

/// Client to server requests and the get response.
///
///   add-request      0x30 | element
///   epochinc-request 0x31 | u64 h
///   get-request      0x32 | u64 request id
///   get-response     0x33 | u64 request id | GetResult
inline constexpr std::uint8_t kAddRequest = 0x30;
inline constexpr std::uint8_t kEpochIncRequest = 0x31;
inline constexpr std::uint8_t kGetRequest = 0x32;
inline constexpr std::uint8_t kGetResponse = 0x33;

Bytes encode_add_request(const Element& e);
Bytes encode_epochinc_request(EpochNumber h);
Bytes encode_get_request(std::uint64_t req_id);
Bytes encode_get_response(std::uint64_t req_id, const GetResult& r);

Element decode_add_request(ByteView body);
EpochNumber decode_epochinc_request(ByteView body);
std::uint64_t decode_get_request(ByteView body);
std::pair<std::uint64_t, GetResult> decode_get_response(ByteView body);

}  // namespace setchain::server
