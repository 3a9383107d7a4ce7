// Copyright 2026 The cessmpc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <sodium.h>

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string_view>

#include "cessmpc/common/bytes.hpp"

namespace cessmpc {

inline void ensure_sodium() {
  static const bool ok = [] { return sodium_init() >= 0; }();
  if (!ok) throw std::runtime_error("libsodium initialization failed");
}

using Digest = std::array<std::uint8_t, 32>;
using Seed = std::array<std::uint8_t, 32>;

/// Incremental SHA-256.
class Sha256 {
 public:
  Sha256() {
    ensure_sodium();
    crypto_hash_sha256_init(&st_);
  }
  Sha256& update(ByteSpan data) {
    crypto_hash_sha256_update(&st_, data.data(), data.size());
    return *this;
  }
  Sha256& update(std::string_view s) {
    crypto_hash_sha256_update(&st_, reinterpret_cast<const unsigned char*>(s.data()), s.size());
    return *this;
  }
  Digest finish() {
    Digest out{};
    crypto_hash_sha256_final(&st_, out.data());
    return out;
  }

 private:
  crypto_hash_sha256_state st_{};
};

inline Digest sha256(ByteSpan data) { return Sha256().update(data).finish(); }

/// Domain-separated child seed: SHA-256(seed || label).
inline Seed derive_seed(const Seed& parent, std::string_view label) {
  return Sha256().update(ByteSpan(parent)).update(label).finish();
}

inline Seed derive_seed(const Seed& parent, std::string_view label, std::uint64_t index) {
  ByteWriter w;
  w.u64(index);
  return Sha256().update(ByteSpan(parent)).update(label).update(w.bytes()).finish();
}

inline Seed seed_from_u64(std::uint64_t v) {
  ByteWriter w;
  w.u64(v);
  return Sha256().update("cessmpc-seed").update(w.bytes()).finish();
}

/// Deterministic ChaCha20 keystream; the only randomness source in the library.
class SeedStream {
 public:
  explicit SeedStream(const Seed& seed) : key_(seed) { ensure_sodium(); }

  void fill(std::uint8_t* out, std::size_t n) {
    while (n > 0) {
      if (pos_ == kBuf) refill();
      std::size_t take = std::min(n, kBuf - pos_);
      std::memcpy(out, buf_.data() + pos_, take);
      pos_ += take;
      out += take;
      n -= take;
    }
  }

  std::uint64_t next_u64() {
    std::uint8_t b[8];
    fill(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }

  std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64()); }

  // Uniform in [0, bound) by masked rejection.
  std::uint64_t uniform(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t mask = ~0ULL >> std::countl_zero(bound - 1);
    for (;;) {
      std::uint64_t v = next_u64() & mask;
      if (v < bound) return v;
    }
  }

  // Uniform in [0, bound) for 128-bit bounds.
  unsigned __int128 uniform128(unsigned __int128 bound) {
    if (bound <= 1) return 0;
    int bits = 0;
    for (auto t = bound - 1; t != 0; t >>= 1) ++bits;
    const unsigned __int128 mask =
        bits >= 128 ? ~static_cast<unsigned __int128>(0)
                    : ((static_cast<unsigned __int128>(1) << bits) - 1);
    for (;;) {
      unsigned __int128 v = (static_cast<unsigned __int128>(next_u64()) << 64) | next_u64();
      v &= mask;
      if (v < bound) return v;
    }
  }

  bool bit() { return (next_u64() & 1) != 0; }

  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::size_t kBuf = 4096;

  void refill() {
    std::array<std::uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> nonce{};
    for (int i = 0; i < 8; ++i) nonce[4 + i] = static_cast<std::uint8_t>(epoch_ >> (8 * i));
    buf_.fill(0);
    crypto_stream_chacha20_ietf_xor_ic(buf_.data(), buf_.data(), kBuf, nonce.data(), counter_,
                                       key_.data());
    counter_ += kBuf / 64;
    if (counter_ == 0) ++epoch_;
    pos_ = 0;
  }

  Seed key_;
  std::array<std::uint8_t, kBuf> buf_{};
  std::size_t pos_ = kBuf;
  std::uint32_t counter_ = 0;
  std::uint64_t epoch_ = 0;
};

using PublicKeyBytes = std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES>;
using SignatureBytes = std::array<std::uint8_t, crypto_sign_BYTES>;

/// Ed25519 signing key derived from a seed (signatures are deterministic).
class SigningKey {
 public:
  explicit SigningKey(const Seed& seed) {
    ensure_sodium();
    crypto_sign_seed_keypair(pk_.data(), sk_.data(), seed.data());
  }

  SignatureBytes sign(ByteSpan msg) const {
    SignatureBytes sig{};
    crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), sk_.data());
    return sig;
  }

  const PublicKeyBytes& public_key() const { return pk_; }

 private:
  PublicKeyBytes pk_{};
  std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk_{};
};

inline bool verify_signature(const PublicKeyBytes& pk, ByteSpan msg, ByteSpan sig) {
  ensure_sodium();
  if (sig.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pk.data()) == 0;
}

}  // namespace cessmpc
