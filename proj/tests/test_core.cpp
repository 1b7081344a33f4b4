// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <unordered_set>

#include "setchain/core/codec.hpp"
#include "setchain/core/crypto.hpp"
#include "setchain/core/digest.hpp"
#include "setchain/core/element.hpp"
#include "setchain/core/history.hpp"
#include "setchain/core/signed_hash.hpp"

using namespace setchain;

namespace {

Bytes bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

class Signed : public ::testing::TestWithParam<const char*> {
 protected:
  void SetUp() override {
    keys = std::make_unique<Keyring>(scheme_by_name(GetParam()), 42);
    for (std::uint32_t i = 0; i < 3; ++i) keys->register_process(make_pid(i));
  }
  std::unique_ptr<Keyring> keys;
};

}  // namespace

TEST_P(Signed, ElementSignedByItsAuthorIsValid) {
  const Element e = Element::sign(*keys, make_pid(1), bytes("hello"));
  EXPECT_TRUE(valid(e, *keys));
}

TEST_P(Signed, FlippedPayloadByteBreaksSignature) {
  const Element e = Element::sign(*keys, make_pid(1), bytes("hello"));
  Bytes p = e.payload();
  p[0] ^= 1;
  EXPECT_FALSE(valid(Element(p, e.author(), e.signature()), *keys));
}

TEST_P(Signed, SubstitutedAuthorIsInvalid) {
  const Element e = Element::sign(*keys, make_pid(1), bytes("hello"));
  const Element forged(e.payload(), make_pid(2), e.signature());
  // The scheme itself rejects the signature under the other key.
  EXPECT_FALSE(keys->verify(make_pid(2), e.payload(), e.signature()));
  EXPECT_FALSE(valid(forged, *keys));
}

TEST_P(Signed, UnknownAuthorIsInvalid) {
  const Element e = Element::sign(*keys, make_pid(1), bytes("x"));
  EXPECT_FALSE(valid(Element(e.payload(), make_pid(99), e.signature()), *keys));
}

TEST_P(Signed, VerdictIsNotReusedAcrossKeyrings) {
  const Element e = Element::sign(*keys, make_pid(1), bytes("x"));
  ASSERT_TRUE(valid(e, *keys));
  Keyring other(scheme_by_name(GetParam()), 7);
  other.register_process(make_pid(1));
  EXPECT_FALSE(valid(e, other));
  EXPECT_TRUE(valid(e, *keys));
}

TEST_P(Signed, SignedEpochHashRoundTrip) {
  SignedEpochHash s;
  s.h = 9;
  s.digest = sha256(bytes("epoch"));
  s.signer = make_pid(2);
  const Element e = s.sign(*keys);
  EXPECT_TRUE(valid(e, *keys));
  EXPECT_EQ(e.author(), make_pid(2));
  const auto parsed = SignedEpochHash::parse(e);
  ASSERT_TRUE(parsed);
  EXPECT_EQ(parsed->h, 9u);
  EXPECT_EQ(parsed->digest, s.digest);
  EXPECT_EQ(parsed->signer, make_pid(2));
  EXPECT_FALSE(SignedEpochHash::parse(Element::sign(*keys, make_pid(1), bytes("SEH1 but short"))));
}

INSTANTIATE_TEST_SUITE_P(Schemes, Signed, ::testing::Values("hmac", "ed25519"));

TEST(Keyring, RejectsUnknownScheme) { EXPECT_THROW(scheme_by_name("rsa"), std::invalid_argument); }

// Digests below were computed outside this code base (Python hashlib) from
// the documented layout: set = (u32 len | element)*, element = u32 len |
// payload | u32 author | u32 len | signature.
namespace {
const Element kA(bytes("a"), make_pid(1), Bytes{0x01, 0x02});
const Element kB(bytes("b"), make_pid(2), Bytes{0x03});
}  // namespace

TEST(HashEpoch, EmptySetDigestIsFixed) {
  EXPECT_EQ(to_hex(hash_epoch({})), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(hash_epoch({}), hash_epoch({}));
}

TEST(HashEpoch, MatchesReferenceDigests) {
  EXPECT_EQ(to_hex(hash_epoch({kA})), "8efcde337e1570096d6a0a89f27f157dd728b31c4124e2594702d93b52ec38da");
  EXPECT_EQ(to_hex(hash_epoch({kA, kB})), "4ba0af4d9c749728db592170898d748607d8f99d87fa87fc5d2d724eeb062f7f");
  EXPECT_EQ(to_hex(element_digest(kA)), "46143c73ae386e16fdcbde205305983a10ef66719804312001243d39e7d9ddc2");
}

TEST(HashEpoch, OrderIndependentAndDistinguishesSubsets) {
  ElementSet ab, ba;
  ab.insert(kA);
  ab.insert(kB);
  ba.insert(kB);
  ba.insert(kA);
  EXPECT_EQ(hash_epoch(ab), hash_epoch(ba));
  EXPECT_NE(hash_epoch({kA}), hash_epoch(ab));
}

TEST(HashEpoch, DistinctSetsGiveDistinctDigests) {
  std::mt19937_64 rng(5);
  std::unordered_set<std::string> seen;
  std::set<ElementSet> sets;
  while (sets.size() < 1000) {
    ElementSet s;
    for (int k = static_cast<int>(rng() % 4); k >= 0; --k)
      s.insert(Element(Bytes{static_cast<std::uint8_t>(rng() % 16)}, make_pid(rng() % 3), Bytes{}));
    sets.insert(s);
  }
  for (const auto& s : sets) EXPECT_TRUE(seen.insert(to_hex(hash_epoch(s))).second);
}

TEST(Element, OrderFollowsCanonicalBytes) {
  EXPECT_LT(kA, kB);
  const Element shorter(bytes("a"), make_pid(0), Bytes{});
  EXPECT_EQ(shorter.canonical_bytes().size(), 4u + 1 + 4 + 4);
  const Bytes cb(kA.canonical_bytes().begin(), kA.canonical_bytes().end());
  EXPECT_EQ(cb, (Bytes{0, 0, 0, 1, 'a', 0, 0, 0, 1, 0, 0, 0, 2, 1, 2}));
}

TEST(Element, EncodeDecodeAndTruncation) {
  ByteWriter w;
  encode_set(w, {kA, kB});
  const Bytes buf = w.bytes();
  ByteReader r(buf);
  EXPECT_EQ(decode_set(r), (ElementSet{kA, kB}));
  EXPECT_TRUE(r.done());
  ByteReader cut(ByteView(buf).first(buf.size() - 1));
  try {
    decode_set(cut);
    FAIL() << "truncated set decoded";
  } catch (const SetchainError& e) {
    EXPECT_EQ(e.code(), Errc::decode_error);
  }
}

TEST(History, AppendContainsAndEpochOf) {
  History h;
  EXPECT_TRUE(h.empty());
  h.append(1, {kA});
  h.append(2, {});
  EXPECT_EQ(h.size(), 2u);
  EXPECT_TRUE(h.contains(kA));
  EXPECT_FALSE(h.contains(kB));
  EXPECT_EQ(h.epoch_of(kA), 1u);
  EXPECT_TRUE(h.at(2).empty());
  EXPECT_TRUE(h.pairwise_disjoint());
  h.append(3, {kA});
  EXPECT_FALSE(h.pairwise_disjoint());
}

TEST(History, RejectsOutOfOrderAppend) {
  History h;
  EXPECT_THROW(h.append(2, {}), std::logic_error);
}

TEST(GetResult, EncodeDecodeRoundTrip) {
  GetResult g;
  g.theset = {kA, kB};
  g.history.append(1, {kA});
  g.epoch = 1;
  ByteWriter w;
  g.encode(w);
  ByteReader r(w.bytes());
  EXPECT_EQ(GetResult::decode(r), g);
}

TEST(Codec, BigEndianIntegers) {
  ByteWriter w;
  w.u32(0x01020304);
  w.u64(5);
  EXPECT_EQ(w.bytes(), (Bytes{1, 2, 3, 4, 0, 0, 0, 0, 0, 0, 0, 5}));
  ByteReader r(w.bytes());
  EXPECT_EQ(r.u32(), 0x01020304u);
  EXPECT_EQ(r.u64(), 5u);
  EXPECT_THROW(r.u8(), SetchainError);
}
