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

// Additively homomorphic lattice commitments over R_p.
//
//   c1 = A1 * r            (k elements)
//   c2 = A2 * r + m        (1 element)
//
// with r a vector of k + lambda + 1 short ring elements. Each commitment
// carries a norm budget: an upper bound on the infinity norm of any honest
// opening randomness after the homomorphic updates applied so far.

#pragma once

#include <algorithm>
#include <memory>
#include <vector>

#include "cessmpc/ring/ring.hpp"

namespace cessmpc {

struct CommitParams {
  std::size_t k = 2;
  std::size_t lambda = 2;
  unsigned eta = 1;

  std::size_t width() const { return k + lambda + 1; }
  bool operator==(const CommitParams&) const = default;
};

/// Public matrices A1 (k x width) and A2 (1 x width), regenerated from the CRS seed.
class CommitKey {
 public:
  CommitKey(RingPtr ring, CommitParams params, const Seed& crs_seed)
      : ring_(std::move(ring)), params_(params), crs_seed_(crs_seed) {
    if (params_.k == 0 || params_.eta == 0) throw std::invalid_argument("commitment dimensions must be positive");
    SeedStream rng(derive_seed(crs_seed_, "commit-key"));
    const std::size_t rows = params_.k + 1;
    rows_.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < params_.width(); ++j) {
        rows_[i].push_back(NttElement::of(sample_uniform(ring_, rng)));
      }
    }
    auto d = Sha256().update(ByteSpan(crs_seed_)).update("commit-key-tag").finish();
    for (int i = 0; i < 8; ++i) tag_ |= static_cast<u64>(d[i]) << (8 * i);
  }

  const RingPtr& ring() const { return ring_; }
  const CommitParams& params() const { return params_; }
  const Seed& crs_seed() const { return crs_seed_; }
  u64 tag() const { return tag_; }
  std::size_t width() const { return params_.width(); }
  u64 base_bound() const { return params_.eta; }
  u64 half_modulus() const { return ring_->q() / 2; }

  // Returns (A1 v, A2 v) as k + 1 elements.
  std::vector<RingElement> apply(std::span<const RingElement> v) const {
    if (v.size() != width()) throw ParamMismatch("randomness width mismatch");
    std::vector<NttElement> vt;
    vt.reserve(v.size());
    for (const auto& e : v) {
      if (!e.valid() || !e.ctx().same_ring(*ring_)) throw ParamMismatch("randomness ring mismatch");
      vt.push_back(NttElement::of(e));
    }
    std::vector<RingElement> out;
    out.reserve(rows_.size());
    for (const auto& row : rows_) {
      std::vector<u64> acc;
      for (std::size_t j = 0; j < vt.size(); ++j) ntt_mul_acc(acc, row[j], vt[j]);
      out.push_back(NttElement{ring_, std::move(acc)}.to_coeffs());
    }
    return out;
  }

 private:
  RingPtr ring_;
  CommitParams params_;
  Seed crs_seed_;
  std::vector<std::vector<NttElement>> rows_;
  u64 tag_ = 0;
};

using CommitKeyPtr = std::shared_ptr<const CommitKey>;

inline CommitKeyPtr make_commit_key(RingPtr ring, CommitParams params, const Seed& crs_seed) {
  return std::make_shared<const CommitKey>(std::move(ring), params, crs_seed);
}

struct Randomness {
  std::vector<RingElement> r;

  u64 inf_norm() const {
    u64 m = 0;
    for (const auto& e : r) m = std::max(m, e.inf_norm());
    return m;
  }

  Randomness& operator+=(const Randomness& o) {
    check(o);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += o.r[i];
    return *this;
  }
  Randomness& operator-=(const Randomness& o) {
    check(o);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= o.r[i];
    return *this;
  }
  friend Randomness operator+(Randomness a, const Randomness& b) { return a += b; }
  friend Randomness operator-(Randomness a, const Randomness& b) { return a -= b; }

  Randomness scaled(u64 c) const {
    Randomness out = *this;
    for (auto& e : out.r) e.scale(c);
    return out;
  }

  Randomness times(const RingElement& c) const {
    Randomness out;
    out.r.reserve(r.size());
    const auto ct = NttElement::of(c);
    for (const auto& e : r) {
      auto et = NttElement::of(e);
      std::vector<u64> acc;
      ntt_mul_acc(acc, et, ct);
      out.r.push_back(NttElement{c.context(), std::move(acc)}.to_coeffs());
    }
    return out;
  }

  static Randomness zero(const CommitKey& key) {
    Randomness out;
    out.r.assign(key.width(), RingElement(key.ring()));
    return out;
  }

  bool operator==(const Randomness&) const = default;

  void check(const Randomness& o) const {
    if (r.size() != o.r.size()) throw ParamMismatch("randomness width mismatch");
  }
};

inline Randomness sample_randomness(const CommitKey& key, SeedStream& rng) {
  Randomness out;
  out.r.reserve(key.width());
  for (std::size_t i = 0; i < key.width(); ++i) out.r.push_back(sample_small(key.ring(), rng, key.params().eta));
  return out;
}

struct Commitment {
  std::vector<RingElement> c1;
  RingElement c2;
  u64 norm_budget = 0;
  u64 key_tag = 0;

  bool operator==(const Commitment&) const = default;
};

namespace detail {

inline u64 saturating_add(u64 a, u64 b, u64 cap) {
  u128 s = static_cast<u128>(a) + b;
  return s > cap ? cap : static_cast<u64>(s);
}

inline u64 saturating_mul(u64 a, u64 b, u64 cap) {
  u128 s = static_cast<u128>(a) * b;
  return s > cap ? cap : static_cast<u64>(s);
}

inline void check_same_key(const Commitment& a, const Commitment& b) {
  if (a.key_tag != b.key_tag || a.c1.size() != b.c1.size()) throw ParamMismatch("commitment key mismatch");
}

}  // namespace detail

class OversizedRandomness : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline Commitment commit(const CommitKey& key, const RingElement& m, const Randomness& r) {
  if (r.r.size() != key.width()) throw ParamMismatch("randomness width mismatch");
  if (r.inf_norm() > key.params().eta) throw OversizedRandomness("commitment randomness exceeds eta");
  m.check(RingElement(key.ring()));
  auto ar = key.apply(r.r);
  Commitment c;
  c.c2 = ar.back() + m;
  ar.pop_back();
  c.c1 = std::move(ar);
  c.norm_budget = key.base_bound();
  c.key_tag = key.tag();
  return c;
}

/// Accepts iff A1 r = c1, A2 r + m = c2 and |r|_inf <= c.norm_budget. Never throws on bad input.
inline bool verify_open(const CommitKey& key, const Commitment& c, const RingElement& m, const Randomness& r) {
  try {
    if (c.key_tag != key.tag() || c.c1.size() != key.params().k) return false;
    if (r.r.size() != key.width()) return false;
    if (!m.valid() || !m.ctx().same_ring(*key.ring())) return false;
    if (r.inf_norm() > c.norm_budget) return false;
    auto ar = key.apply(r.r);
    for (std::size_t i = 0; i < c.c1.size(); ++i) {
      if (!(ar[i] == c.c1[i])) return false;
    }
    return ar.back() + m == c.c2;
  } catch (const std::exception&) {
    return false;
  }
}

inline Commitment comm_add(const Commitment& a, const Commitment& b) {
  detail::check_same_key(a, b);
  Commitment out = a;
  for (std::size_t i = 0; i < out.c1.size(); ++i) out.c1[i] += b.c1[i];
  out.c2 += b.c2;
  const u64 cap = a.c2.ctx().q() / 2;
  out.norm_budget = detail::saturating_add(a.norm_budget, b.norm_budget, cap);
  return out;
}

inline Commitment comm_sub(const Commitment& a, const Commitment& b) {
  detail::check_same_key(a, b);
  Commitment out = a;
  for (std::size_t i = 0; i < out.c1.size(); ++i) out.c1[i] -= b.c1[i];
  out.c2 -= b.c2;
  const u64 cap = a.c2.ctx().q() / 2;
  out.norm_budget = detail::saturating_add(a.norm_budget, b.norm_budget, cap);
  return out;
}

inline Commitment comm_add_const(const Commitment& a, const RingElement& c) {
  Commitment out = a;
  out.c2 += c;
  return out;
}

inline Commitment comm_sub_const(const Commitment& a, const RingElement& c) {
  Commitment out = a;
  out.c2 -= c;
  return out;
}

// Scalar action; the budget grows by the centered magnitude of c but never drops below eta.
inline Commitment comm_scalar_mul(const CommitKey& key, const Commitment& a, u64 c) {
  const u64 base_bound = key.base_bound();
  Commitment out = a;
  for (auto& e : out.c1) e.scale(c);
  out.c2.scale(c);
  const auto& m = a.c2.ctx().modulus();
  const i64 cc = m.centered(c % m.value);
  const u64 mag = static_cast<u64>(cc < 0 ? -cc : cc);
  out.norm_budget = std::max(base_bound, detail::saturating_mul(a.norm_budget, mag, m.value / 2));
  return out;
}

// Multiplication by a public ring element; bound grows by its centered l1 norm.
inline Commitment comm_mul_public(const CommitKey& key, const Commitment& a, const RingElement& c) {
  const u64 base_bound = key.base_bound();
  Commitment out;
  const auto ct = NttElement::of(c);
  auto mul = [&](const RingElement& e) {
    std::vector<u64> acc;
    ntt_mul_acc(acc, NttElement::of(e), ct);
    return NttElement{c.context(), std::move(acc)}.to_coeffs();
  };
  for (const auto& e : a.c1) out.c1.push_back(mul(e));
  out.c2 = mul(a.c2);
  out.key_tag = a.key_tag;
  const u64 half = c.ctx().q() / 2;
  out.norm_budget = std::max(base_bound, detail::saturating_mul(a.norm_budget, c.l1_norm(), half));
  return out;
}

// ---- serialization --------------------------------------------------------

inline void write_commitment(ByteWriter& w, const CommitKey& key, const Commitment& c) {
  w.u64(key.params().k);
  w.u64(key.params().lambda);
  w.u64(key.ring()->degree());
  w.u64(key.ring()->q());
  for (const auto& e : c.c1) write_ring(w, e);
  write_ring(w, c.c2);
  w.u64(c.norm_budget);
}

inline Commitment read_commitment(ByteReader& r, const CommitKey& key) {
  if (r.u64() != key.params().k || r.u64() != key.params().lambda || r.u64() != key.ring()->degree() ||
      r.u64() != key.ring()->q()) {
    throw DecodeError("commitment header does not match key");
  }
  Commitment c;
  for (std::size_t i = 0; i < key.params().k; ++i) c.c1.push_back(read_ring(r, key.ring()));
  c.c2 = read_ring(r, key.ring());
  c.norm_budget = r.u64();
  c.key_tag = key.tag();
  return c;
}

inline Bytes serialize(const CommitKey& key, const Commitment& c) {
  ByteWriter w;
  write_commitment(w, key, c);
  return std::move(w).take();
}

inline std::size_t commitment_wire_size(const CommitKey& key) {
  return 32 + (key.params().k + 1) * ring_wire_size(key.ring()->degree()) + 8;
}

inline void write_randomness(ByteWriter& w, const Randomness& r) {
  w.u32(static_cast<std::uint32_t>(r.r.size()));
  for (const auto& e : r.r) write_ring(w, e);
}

inline Randomness read_randomness(ByteReader& r, const CommitKey& key) {
  auto n = r.u32();
  if (n != key.width()) throw DecodeError("randomness width does not match key");
  Randomness out;
  for (std::uint32_t i = 0; i < n; ++i) out.r.push_back(read_ring(r, key.ring()));
  return out;
}

}  // namespace cessmpc
