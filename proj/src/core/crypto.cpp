// SPDX-License-Identifier: Apache-2.0
#include "setchain/core/crypto.hpp"

#include <sodium.h>

#include <atomic>

#include "setchain/core/codec.hpp"
#include "setchain/core/digest.hpp"

namespace setchain {
namespace {

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium initialisation failed");
}

class HmacScheme final : public SignatureScheme {
 public:
  std::string_view name() const override { return "hmac"; }

  KeyPair derive(const std::array<std::uint8_t, 32>& seed) const override {
    Bytes key(seed.begin(), seed.end());
    return KeyPair{key, key};
  }

  Bytes sign(const KeyPair& keys, ByteView message) const override {
    Bytes tag(crypto_auth_hmacsha256_BYTES);
    crypto_auth_hmacsha256(tag.data(), message.data(), message.size(), keys.secret_key.data());
    return tag;
  }

  bool verify(ByteView public_key, ByteView message, ByteView signature) const override {
    if (public_key.size() != crypto_auth_hmacsha256_KEYBYTES) return false;
    if (signature.size() != crypto_auth_hmacsha256_BYTES) return false;
    return crypto_auth_hmacsha256_verify(signature.data(), message.data(), message.size(),
                                         public_key.data()) == 0;
  }
};

class Ed25519Scheme final : public SignatureScheme {
 public:
  Ed25519Scheme() { ensure_sodium(); }

  std::string_view name() const override { return "ed25519"; }

  KeyPair derive(const std::array<std::uint8_t, 32>& seed) const override {
    KeyPair kp{Bytes(crypto_sign_PUBLICKEYBYTES), Bytes(crypto_sign_SECRETKEYBYTES)};
    crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed.data());
    return kp;
  }

  Bytes sign(const KeyPair& keys, ByteView message) const override {
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                         keys.secret_key.data());
    return sig;
  }

  bool verify(ByteView public_key, ByteView message, ByteView signature) const override {
    if (public_key.size() != crypto_sign_PUBLICKEYBYTES) return false;
    if (signature.size() != crypto_sign_BYTES) return false;
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                       public_key.data()) == 0;
  }
};

std::atomic<std::uint64_t> g_next_keyring_id{1};

}  // namespace

std::shared_ptr<const SignatureScheme> make_hmac_scheme() {
  ensure_sodium();
  return std::make_shared<HmacScheme>();
}

std::shared_ptr<const SignatureScheme> make_ed25519_scheme() {
  return std::make_shared<Ed25519Scheme>();
}

std::shared_ptr<const SignatureScheme> scheme_by_name(std::string_view name) {
  if (name == "hmac") return make_hmac_scheme();
  if (name == "ed25519") return make_ed25519_scheme();
  throw std::invalid_argument("unknown signature scheme: " + std::string(name));
}

Keyring::Keyring(std::shared_ptr<const SignatureScheme> scheme, std::uint64_t seed)
    : scheme_(std::move(scheme)), seed_(seed), instance_id_(g_next_keyring_id.fetch_add(1)) {}

void Keyring::register_process(ProcessId id) {
  if (keys_.contains(id)) return;
  ByteWriter w;
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>("setchain-key"), 12));
  w.u64(seed_);
  w.u32(raw(id));
  keys_.emplace(id, scheme_->derive(sha256(w.bytes())));
}

Bytes Keyring::sign(ProcessId signer, ByteView message) const {
  auto it = keys_.find(signer);
  if (it == keys_.end()) throw SetchainError(Errc::harness, "signing with unregistered process");
  return scheme_->sign(it->second, message);
}

bool Keyring::verify(ProcessId author, ByteView message, ByteView signature) const {
  auto it = keys_.find(author);
  if (it == keys_.end()) return false;
  return scheme_->verify(it->second.public_key, message, signature);
}

}  // namespace setchain
