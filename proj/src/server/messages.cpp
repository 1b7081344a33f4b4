// SPDX-License-Identifier: Apache-2.0
#include "setchain/server/messages.hpp"

#include "setchain/core/codec.hpp"

namespace setchain::server {

namespace {

ByteReader open(ByteView body, std::uint8_t tag) {
  ByteReader r(body);
  if (r.u8() != tag) throw SetchainError(Errc::decode_error, "unexpected message tag");
  return r;
}

}  // namespace

Bytes encode_app(const AppMessage& m) {
  ByteWriter w;
  if (const auto* a = std::get_if<AddOne>(&m)) {
    w.u8(0x01);
    a->e.encode(w);
  } else if (const auto* b = std::get_if<AddBatch>(&m)) {
    w.u8(0x02);
    encode_set(w, b->s);
  } else {
    w.u8(0x03);
    w.u64(std::get<EpochInc>(m).h);
  }
  return std::move(w).take();
}

AppMessage decode_app(ByteView body) {
  ByteReader r(body);
  AppMessage out;
  switch (r.u8()) {
    case 0x01: out = AddOne{Element::decode(r)}; break;
    case 0x02: out = AddBatch{decode_set(r)}; break;
    case 0x03: out = EpochInc{r.u64()}; break;
    default: throw SetchainError(Errc::decode_error, "unknown broadcast payload");
  }
  r.expect_done();
  return out;
}

Bytes encode_add_request(const Element& e) {
  ByteWriter w;
  w.u8(kAddRequest);
  e.encode(w);
  return std::move(w).take();
}

Bytes encode_epochinc_request(EpochNumber h) {
  ByteWriter w(9);
  w.u8(kEpochIncRequest);
  w.u64(h);
  return std::move(w).take();
}

Bytes encode_get_request(std::uint64_t req_id) {
  ByteWriter w(9);
  w.u8(kGetRequest);
  w.u64(req_id);
  return std::move(w).take();
}

Bytes encode_get_response(std::uint64_t req_id, const GetResult& res) {
  ByteWriter w;
  w.u8(kGetResponse);
  w.u64(req_id);
  res.encode(w);
  return std::move(w).take();
}

Element decode_add_request(ByteView body) {
  ByteReader r = open(body, kAddRequest);
  Element e = Element::decode(r);
  r.expect_done();
  return e;
}

EpochNumber decode_epochinc_request(ByteView body) {
  ByteReader r = open(body, kEpochIncRequest);
  EpochNumber h = r.u64();
  r.expect_done();
  return h;
}

std::uint64_t decode_get_request(ByteView body) {
  ByteReader r = open(body, kGetRequest);
  std::uint64_t id = r.u64();
  r.expect_done();
  return id;
}

std::pair<std::uint64_t, GetResult> decode_get_response(ByteView body) {
  ByteReader r = open(body, kGetResponse);
  std::uint64_t id = r.u64();
  GetResult res = GetResult::decode(r);
  r.expect_done();
  return {id, std::move(res)};
}

}  // namespace setchain::server
