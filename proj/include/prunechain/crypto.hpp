//------------------------------------------------------------------------------
//
//   Copyright 2026 The Prunechain Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------
#pragma once

#include <sodium.h>

#include <array>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>

#include "prunechain/bytes.hpp"

namespace prunechain {

using digest = std::array<std::uint8_t, 32>;
using public_key = std::array<std::uint8_t, 32>;
using secret_key = std::array<std::uint8_t, 64>;
using signature = std::array<std::uint8_t, 64>;

inline void crypto_init() {
  static std::once_flag flag;
  std::call_once(flag, [] {
    if (sodium_init() < 0) {
      throw std::runtime_error("libsodium initialization failed");
    }
  });
}

inline digest sha256(const std::uint8_t *data, std::size_t n) {
  crypto_init();
  digest out;
  crypto_hash_sha256(out.data(), data, n);
  return out;
}

inline digest sha256(const bytes &b) {
  return sha256(b.data(), b.size());
}

inline digest sha256(std::string_view s) {
  return sha256(reinterpret_cast<const std::uint8_t *>(s.data()), s.size());
}

struct keypair {
  public_key pk{};
  secret_key sk{};
};

inline keypair generate_keypair() {
  crypto_init();
  keypair kp;
  crypto_sign_keypair(kp.pk.data(), kp.sk.data());
  return kp;
}

// Deterministic keypair from a 32-byte seed; identical seeds yield identical
// keys on every platform, which the simulator and the tests rely on.
inline keypair keypair_from_seed(const digest &seed) {
  crypto_init();
  keypair kp;
  crypto_sign_seed_keypair(kp.pk.data(), kp.sk.data(), seed.data());
  return kp;
}

inline keypair derive_keypair(std::uint64_t seed, std::string_view name) {
  bytes material = to_bytes("prunechain-key");
  append_u64_be(material, seed);
  material.insert(material.end(), name.begin(), name.end());
  return keypair_from_seed(sha256(material));
}

inline signature sign(const secret_key &sk, const bytes &message) {
  crypto_init();
  signature sig;
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                       sk.data());
  return sig;
}

inline bool verify(const public_key &pk, const bytes &message,
                   const signature &sig) {
  crypto_init();
  return crypto_sign_verify_detached(sig.data(), message.data(),
                                     message.size(), pk.data()) == 0;
}

}  // namespace prunechain
