// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string_view>
#include <unordered_map>

#include "setchain/core/types.hpp"

namespace setchain {

struct KeyPair {
  Bytes public_key;
  Bytes secret_key;
};

/// Pluggable signature scheme. Key derivation is deterministic in the seed so
/// whole simulations replay bit-for-bit.
class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;

  virtual std::string_view name() const = 0;
  virtual KeyPair derive(const std::array<std::uint8_t, 32>& seed) const = 0;
  virtual Bytes sign(const KeyPair& keys, ByteView message) const = 0;
  virtual bool verify(ByteView public_key, ByteView message, ByteView signature) const = 0;
};

/// Keyed HMAC-SHA256 test double. The "public" key equals the secret, so it
/// only models non-forgeability against processes that never see the key.
std::shared_ptr<const SignatureScheme> make_hmac_scheme();

/// Ed25519 (libsodium).
std::shared_ptr<const SignatureScheme> make_ed25519_scheme();

/// "hmac" or "ed25519"; throws std::invalid_argument otherwise.
std::shared_ptr<const SignatureScheme> scheme_by_name(std::string_view name);

/// Public-key directory shared by every process of a run, plus the private
/// halves the harness hands to each process owner.
class Keyring {
 public:
  Keyring(std::shared_ptr<const SignatureScheme> scheme, std::uint64_t seed);

  Keyring(const Keyring&) = delete;
  Keyring& operator=(const Keyring&) = delete;

  void register_process(ProcessId id);
  bool has(ProcessId id) const { return keys_.contains(id); }

  Bytes sign(ProcessId signer, ByteView message) const;
  bool verify(ProcessId author, ByteView message, ByteView signature) const;

  const SignatureScheme& scheme() const { return *scheme_; }
  std::uint64_t seed() const { return seed_; }
  // Distinct per Keyring object; keys element-validity memoization.
  std::uint64_t instance_id() const { return instance_id_; }

 private:
  std::shared_ptr<const SignatureScheme> scheme_;
  std::uint64_t seed_;
  std::uint64_t instance_id_;
  std::unordered_map<ProcessId, KeyPair> keys_;
};

}  // namespace setchain
