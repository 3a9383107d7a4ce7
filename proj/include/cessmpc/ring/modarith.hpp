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

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cessmpc {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

/// A word-sized modulus below 2^63 with the handful of operations the ring code needs.
struct Modulus {
  u64 value = 0;

  Modulus() = default;
  explicit Modulus(u64 q) : value(q) {
    if (q < 2 || q >= (1ULL << 63)) throw std::invalid_argument("modulus out of range");
  }

  u64 add(u64 a, u64 b) const {
    u64 s = a + b;
    return s >= value ? s - value : s;
  }
  u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + value - b; }
  u64 neg(u64 a) const { return a == 0 ? 0 : value - a; }

  u64 mul(u64 a, u64 b) const {
    if (value < (1ULL << 32)) return (a * b) % value;
    return static_cast<u64>((static_cast<u128>(a) * b) % value);
  }

  u64 pow(u64 base, u64 exp) const {
    u64 r = 1 % value;
    base %= value;
    while (exp > 0) {
      if (exp & 1) r = mul(r, base);
      base = mul(base, base);
      exp >>= 1;
    }
    return r;
  }

  // Modulus is prime throughout the library, so Fermat inversion suffices.
  u64 inv(u64 a) const {
    if (a % value == 0) throw std::domain_error("inverse of zero");
    return pow(a, value - 2);
  }

  u64 reduce_signed(i64 v) const {
    i64 r = v % static_cast<i64>(value);
    return static_cast<u64>(r < 0 ? r + static_cast<i64>(value) : r);
  }

  u64 reduce_signed128(i128 v) const {
    i128 r = v % static_cast<i128>(value);
    return static_cast<u64>(r < 0 ? r + static_cast<i128>(value) : r);
  }

  // Representative in (-q/2, q/2].
  i64 centered(u64 a) const {
    return a > value / 2 ? static_cast<i64>(a) - static_cast<i64>(value) : static_cast<i64>(a);
  }

  // Precomputed quotient for Shoup multiplication by a fixed operand w.
  u64 shoup(u64 w) const { return static_cast<u64>((static_cast<u128>(w) << 64) / value); }

  u64 mul_shoup(u64 a, u64 w, u64 w_shoup) const {
    u64 qhat = static_cast<u64>((static_cast<u128>(a) * w_shoup) >> 64);
    u64 r = a * w - qhat * value;
    return r >= value ? r - value : r;
  }

  bool operator==(const Modulus&) const = default;
};

inline bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  auto mulmod = [n](u64 a, u64 b) { return static_cast<u64>((static_cast<u128>(a) * b) % n); };
  auto powmod = [&](u64 b, u64 e) {
    u64 r = 1;
    while (e) {
      if (e & 1) r = mulmod(r, b);
      b = mulmod(b, b);
      e >>= 1;
    }
    return r;
  };
  // These bases are deterministic for all 64-bit inputs.
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = powmod(a, d);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// Largest primes below 2^bits that are 1 mod `step`, in descending order.
inline std::vector<u64> find_ntt_primes(int bits, std::size_t count, u64 step) {
  std::vector<u64> out;
  u64 top = 1ULL << bits;
  u64 cand = top - (top % step) + 1;
  if (cand >= top) cand -= step;
  while (out.size() < count && cand > step) {
    if (is_prime_u64(cand)) out.push_back(cand);
    cand -= step;
  }
  if (out.size() < count) throw std::runtime_error("not enough NTT-friendly primes");
  return out;
}

}  // namespace cessmpc
