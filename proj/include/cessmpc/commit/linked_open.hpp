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

// Opening by re-commitment: the opener commits afresh to the same message
// and proves, with a Fiat-Shamir Sigma protocol, knowledge of d such that
// c_old - c_new = (A1 d, A2 d), i.e. the difference commits to zero.

#pragma once

#include "cessmpc/commit/commit.hpp"

namespace cessmpc {

struct LinkedOpening {
  Commitment fresh_commitment;
  std::vector<RingElement> w;  // A1 y || A2 y
  std::vector<RingElement> z;  // y + challenge * d
  RingElement message;
  Randomness fresh_randomness;
};

class InvalidOpening : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::size_t challenge_weight(std::size_t degree) { return std::min<std::size_t>(32, degree / 2); }

struct ResponseBounds {
  u64 mask_bound = 0;      // y drawn from [-mask_bound, mask_bound]
  u64 response_bound = 0;  // accept iff |z|_inf <= response_bound
  bool uniform_mask = false;
};

// Derived only from public data, so prover and verifier agree.
inline ResponseBounds response_bounds(const CommitKey& key, u64 old_budget) {
  const u64 half = key.half_modulus();
  const u64 n = key.ring()->degree();
  const u64 d_bound = std::min<u64>(half, static_cast<u64>(old_budget) + key.params().eta);
  const u128 beta = static_cast<u128>(challenge_weight(n)) * d_bound;
  const u128 mask = beta * key.width() * n;
  ResponseBounds b;
  if (mask >= half) {
    b.uniform_mask = true;
    b.mask_bound = half;
    b.response_bound = half;
  } else {
    b.mask_bound = static_cast<u64>(mask);
    b.response_bound = static_cast<u64>(mask - beta);
  }
  return b;
}

// Ternary challenge polynomial of fixed Hamming weight, expanded from a digest.
inline RingElement challenge_from_digest(const RingPtr& ring, const Digest& d) {
  Seed s;
  std::copy(d.begin(), d.end(), s.begin());
  SeedStream rng(s);
  const std::size_t n = ring->degree();
  RingElement c(ring);
  auto& coeffs = c.mutable_coeffs();
  std::size_t placed = 0;
  const std::size_t h = challenge_weight(n);
  while (placed < h) {
    auto pos = static_cast<std::size_t>(rng.uniform(n));
    if (coeffs[pos] != 0) continue;
    coeffs[pos] = rng.bit() ? 1 : ring->q() - 1;
    ++placed;
  }
  return c;
}

inline Digest linked_challenge_digest(const CommitKey& key, const Commitment& c_old, const Commitment& c_new,
                                      std::span<const RingElement> w) {
  ByteWriter bw;
  bw.raw(ByteSpan(key.crs_seed()));
  write_commitment(bw, key, c_old);
  write_commitment(bw, key, c_new);
  for (const auto& e : w) write_ring(bw, e);
  return Sha256().update("linked-open").update(bw.bytes()).finish();
}

inline std::vector<RingElement> commitment_difference(const Commitment& a, const Commitment& b) {
  std::vector<RingElement> out;
  for (std::size_t i = 0; i < a.c1.size(); ++i) out.push_back(a.c1[i] - b.c1[i]);
  out.push_back(a.c2 - b.c2);
  return out;
}

}  // namespace detail

inline LinkedOpening linked_open_prove(const CommitKey& key, const Commitment& c_old, const RingElement& m,
                                       const Randomness& r_old, const Seed& seed) {
  if (!verify_open(key, c_old, m, r_old)) throw InvalidOpening("input is not a valid opening of the commitment");
  SeedStream rng(seed);
  LinkedOpening lo;
  lo.message = m;
  lo.fresh_randomness = sample_randomness(key, rng);
  lo.fresh_commitment = commit(key, m, lo.fresh_randomness);
  const Randomness d = r_old - lo.fresh_randomness;
  const auto bounds = detail::response_bounds(key, c_old.norm_budget);
  const auto& mod = key.ring()->modulus();

  for (int attempt = 0; attempt < 10000; ++attempt) {
    Randomness y;
    for (std::size_t i = 0; i < key.width(); ++i) {
      if (bounds.uniform_mask) {
        y.r.push_back(sample_uniform(key.ring(), rng));
      } else {
        RingElement e(key.ring());
        for (auto& v : e.mutable_coeffs()) {
          auto u = static_cast<i64>(rng.uniform(2 * bounds.mask_bound + 1)) - static_cast<i64>(bounds.mask_bound);
          v = mod.reduce_signed(u);
        }
        y.r.push_back(std::move(e));
      }
    }
    auto w = key.apply(y.r);
    const auto chal =
        detail::challenge_from_digest(key.ring(), detail::linked_challenge_digest(key, c_old, lo.fresh_commitment, w));
    Randomness z = y + d.times(chal);
    if (z.inf_norm() <= bounds.response_bound) {
      lo.w = std::move(w);
      lo.z = std::move(z.r);
      return lo;
    }
  }
  throw std::runtime_error("linked opening rejection sampling did not terminate");
}

inline bool linked_open_verify(const CommitKey& key, const Commitment& c_old, const LinkedOpening& lo) {
  try {
    if (lo.w.size() != key.params().k + 1 || lo.z.size() != key.width()) return false;
    // The fresh commitment must be a direct opening with base-size randomness.
    if (lo.fresh_commitment.norm_budget != key.base_bound()) return false;
    if (!verify_open(key, lo.fresh_commitment, lo.message, lo.fresh_randomness)) return false;
    if (c_old.key_tag != key.tag()) return false;

    const auto bounds = detail::response_bounds(key, c_old.norm_budget);
    Randomness z{lo.z};
    if (z.inf_norm() > bounds.response_bound) return false;

    const auto chal = detail::challenge_from_digest(
        key.ring(), detail::linked_challenge_digest(key, c_old, lo.fresh_commitment, lo.w));
    const auto lhs = key.apply(lo.z);
    const auto delta = detail::commitment_difference(c_old, lo.fresh_commitment);
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      if (!(lhs[i] == lo.w[i] + chal * delta[i])) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

inline void write_linked_opening(ByteWriter& w, const CommitKey& key, const LinkedOpening& lo) {
  write_commitment(w, key, lo.fresh_commitment);
  w.u32(static_cast<std::uint32_t>(lo.w.size()));
  for (const auto& e : lo.w) write_ring(w, e);
  w.u32(static_cast<std::uint32_t>(lo.z.size()));
  for (const auto& e : lo.z) write_ring(w, e);
  write_ring(w, lo.message);
  write_randomness(w, lo.fresh_randomness);
}

inline LinkedOpening read_linked_opening(ByteReader& r, const CommitKey& key) {
  LinkedOpening lo;
  lo.fresh_commitment = read_commitment(r, key);
  auto nw = r.u32();
  if (nw != key.params().k + 1) throw DecodeError("linked opening: bad w length");
  for (std::uint32_t i = 0; i < nw; ++i) lo.w.push_back(read_ring(r, key.ring()));
  auto nz = r.u32();
  if (nz != key.width()) throw DecodeError("linked opening: bad z length");
  for (std::uint32_t i = 0; i < nz; ++i) lo.z.push_back(read_ring(r, key.ring()));
  lo.message = read_ring(r, key.ring());
  lo.fresh_randomness = read_randomness(r, key);
  return lo;
}

inline Bytes serialize(const CommitKey& key, const LinkedOpening& lo) {
  ByteWriter w;
  write_linked_opening(w, key, lo);
  return std::move(w).take();
}

}  // namespace cessmpc
