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

// Arithmetic in R = Z_m[X]/(X^N + 1) for a word-sized prime m.
//
// The same machinery backs the plaintext/commitment ring R_p and each RNS
// limb of the ciphertext ring R_q. Multiplication goes through a negacyclic
// NTT; the slot view evaluates at the odd powers psi^(2j+1), j ascending.

#pragma once

#include <algorithm>
#include <bit>
#include <memory>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "cessmpc/common/bytes.hpp"
#include "cessmpc/common/crypto.hpp"
#include "cessmpc/ring/modarith.hpp"

namespace cessmpc {

struct RingParams {
  std::size_t degree = 1024;
  u64 modulus = 2013265921;  // 15 * 2^27 + 1
  u64 psi = 0;               // 0 selects the smallest primitive 2N-th root

  static RingParams toy() { return {4, 17, 2}; }
  static RingParams standard() { return {1024, 2013265921, 0}; }
  static RingParams with_degree(std::size_t n) { return {n, 2013265921, 0}; }
};

class RingContext;
using RingPtr = std::shared_ptr<const RingContext>;

/// Immutable per-(N, modulus) tables: twiddles for the negacyclic NTT and
/// the slot permutation. Shared by every element of the ring.
class RingContext {
 public:
  static RingPtr create(const RingParams& params) {
    return RingPtr(new RingContext(params));
  }

  std::size_t degree() const { return n_; }
  const Modulus& modulus() const { return mod_; }
  u64 q() const { return mod_.value; }
  u64 psi() const { return psi_; }
  int log_degree() const { return log_n_; }

  bool same_ring(const RingContext& o) const { return n_ == o.n_ && mod_ == o.mod_ && psi_ == o.psi_; }

  // In-place forward transform; output index i holds a(psi^(2*brv(i)+1)).
  void forward(std::span<u64> a) const {
    const auto& m = mod_;
    std::size_t t = n_;
    for (std::size_t len = 1; len < n_; len <<= 1) {
      t >>= 1;
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t j1 = 2 * i * t;
        const u64 w = psi_rev_[len + i];
        const u64 ws = psi_rev_shoup_[len + i];
        for (std::size_t j = j1; j < j1 + t; ++j) {
          u64 u = a[j];
          u64 v = m.mul_shoup(a[j + t], w, ws);
          a[j] = m.add(u, v);
          a[j + t] = m.sub(u, v);
        }
      }
    }
  }

  void inverse(std::span<u64> a) const {
    const auto& m = mod_;
    std::size_t t = 1;
    for (std::size_t len = n_; len > 1; len >>= 1) {
      const std::size_t h = len >> 1;
      std::size_t j1 = 0;
      for (std::size_t i = 0; i < h; ++i) {
        const u64 w = psi_inv_rev_[h + i];
        const u64 ws = psi_inv_rev_shoup_[h + i];
        for (std::size_t j = j1; j < j1 + t; ++j) {
          u64 u = a[j];
          u64 v = a[j + t];
          a[j] = m.add(u, v);
          a[j + t] = m.mul_shoup(m.sub(u, v), w, ws);
        }
        j1 += 2 * t;
      }
      t <<= 1;
    }
    for (auto& x : a) x = m.mul_shoup(x, n_inv_, n_inv_shoup_);
  }

  // slot j lives at NTT index slot_to_ntt()[j]
  const std::vector<std::size_t>& slot_to_ntt() const { return slot_to_ntt_; }

 private:
  explicit RingContext(const RingParams& params) : n_(params.degree) {
    if (n_ < 2 || !std::has_single_bit(n_)) throw std::invalid_argument("ring degree must be a power of two >= 2");
    if (!is_prime_u64(params.modulus)) throw std::invalid_argument("ring modulus must be prime");
    mod_ = Modulus(params.modulus);
    if ((mod_.value - 1) % (2 * n_) != 0) throw std::invalid_argument("modulus must be 1 mod 2N");
    log_n_ = std::countr_zero(n_);
    psi_ = params.psi != 0 ? params.psi : smallest_root();
    if (mod_.pow(psi_, n_) != mod_.value - 1) throw std::invalid_argument("psi is not a primitive 2N-th root of unity");

    psi_rev_.resize(n_);
    psi_inv_rev_.resize(n_);
    psi_rev_shoup_.resize(n_);
    psi_inv_rev_shoup_.resize(n_);
    const u64 psi_inv = mod_.inv(psi_);
    for (std::size_t i = 0; i < n_; ++i) {
      std::size_t r = bitrev(i);
      psi_rev_[i] = mod_.pow(psi_, r);
      psi_inv_rev_[i] = mod_.pow(psi_inv, r);
      psi_rev_shoup_[i] = mod_.shoup(psi_rev_[i]);
      psi_inv_rev_shoup_[i] = mod_.shoup(psi_inv_rev_[i]);
    }
    n_inv_ = mod_.inv(n_ % mod_.value);
    n_inv_shoup_ = mod_.shoup(n_inv_);

    // Locate each odd power in the transform of X.
    std::vector<u64> x(n_, 0);
    x[1 % n_] = 1;
    forward(x);
    std::unordered_map<u64, std::size_t> where;
    for (std::size_t i = 0; i < n_; ++i) where.emplace(x[i], i);
    slot_to_ntt_.resize(n_);
    const u64 psi2 = mod_.mul(psi_, psi_);
    u64 point = psi_;
    for (std::size_t j = 0; j < n_; ++j) {
      auto it = where.find(point);
      if (it == where.end()) throw std::logic_error("slot permutation construction failed");
      slot_to_ntt_[j] = it->second;
      point = mod_.mul(point, psi2);
    }
  }

  u64 smallest_root() const {
    const u64 exp = (mod_.value - 1) / (2 * n_);
    u64 root = 0;
    for (u64 x = 2; x < mod_.value; ++x) {
      u64 c = mod_.pow(x, exp);
      if (mod_.pow(c, n_) == mod_.value - 1) {
        root = c;
        break;
      }
    }
    if (root == 0) throw std::invalid_argument("no primitive 2N-th root of unity");
    // Canonical choice: smallest of the N primitive roots root^(odd).
    u64 best = root;
    const u64 sq = mod_.mul(root, root);
    u64 cur = root;
    for (std::size_t k = 0; k < n_; ++k) {
      best = std::min(best, cur);
      cur = mod_.mul(cur, sq);
    }
    return best;
  }

  std::size_t bitrev(std::size_t i) const {
    std::size_t r = 0;
    for (int b = 0; b < log_n_; ++b) r |= ((i >> b) & 1) << (log_n_ - 1 - b);
    return r;
  }

  std::size_t n_;
  int log_n_ = 0;
  Modulus mod_;
  u64 psi_ = 0;
  std::vector<u64> psi_rev_, psi_inv_rev_, psi_rev_shoup_, psi_inv_rev_shoup_;
  u64 n_inv_ = 0, n_inv_shoup_ = 0;
  std::vector<std::size_t> slot_to_ntt_;
};

inline RingPtr make_ring(const RingParams& params) { return RingContext::create(params); }

/// Element of R_m in coefficient form, coefficients in [0, m).
class RingElement {
 public:
  RingElement() = default;

  explicit RingElement(RingPtr ctx) : ctx_(std::move(ctx)), c_(ctx_->degree(), 0) {}

  RingElement(RingPtr ctx, std::vector<u64> coeffs) : ctx_(std::move(ctx)), c_(std::move(coeffs)) {
    if (c_.size() != ctx_->degree()) throw std::invalid_argument("coefficient count must equal ring degree");
    for (auto v : c_) {
      if (v >= ctx_->q()) throw std::invalid_argument("coefficient out of range");
    }
  }

  static RingElement constant(RingPtr ctx, u64 c) {
    RingElement r(std::move(ctx));
    r.c_[0] = c % r.ctx_->q();
    return r;
  }

  static RingElement from_signed(RingPtr ctx, std::span<const i64> coeffs) {
    RingElement r(ctx);
    if (coeffs.size() != ctx->degree()) throw std::invalid_argument("coefficient count must equal ring degree");
    for (std::size_t i = 0; i < coeffs.size(); ++i) r.c_[i] = ctx->modulus().reduce_signed(coeffs[i]);
    return r;
  }

  bool valid() const { return ctx_ != nullptr; }
  const RingContext& ctx() const { return *ctx_; }
  const RingPtr& context() const { return ctx_; }
  std::size_t degree() const { return c_.size(); }
  std::span<const u64> coeffs() const { return c_; }
  std::vector<u64>& mutable_coeffs() { return c_; }
  u64 operator[](std::size_t i) const { return c_[i]; }

  bool is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](u64 v) { return v == 0; });
  }

  // Largest centered coefficient magnitude.
  u64 inf_norm() const {
    u64 best = 0;
    for (auto v : c_) {
      i64 c = ctx_->modulus().centered(v);
      best = std::max(best, static_cast<u64>(c < 0 ? -c : c));
    }
    return best;
  }

  // Sum of centered coefficient magnitudes.
  u64 l1_norm() const {
    u64 s = 0;
    for (auto v : c_) {
      i64 c = ctx_->modulus().centered(v);
      s += static_cast<u64>(c < 0 ? -c : c);
    }
    return s;
  }

  RingElement& operator+=(const RingElement& o) {
    check(o);
    const auto& m = ctx_->modulus();
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] = m.add(c_[i], o.c_[i]);
    return *this;
  }

  RingElement& operator-=(const RingElement& o) {
    check(o);
    const auto& m = ctx_->modulus();
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] = m.sub(c_[i], o.c_[i]);
    return *this;
  }

  RingElement& operator*=(const RingElement& o) {
    check(o);
    std::vector<u64> b = o.c_;
    ctx_->forward(c_);
    ctx_->forward(b);
    const auto& m = ctx_->modulus();
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] = m.mul(c_[i], b[i]);
    ctx_->inverse(c_);
    return *this;
  }

  RingElement& scale(u64 s) {
    const auto& m = ctx_->modulus();
    s %= m.value;
    const u64 ss = m.shoup(s);
    for (auto& v : c_) v = m.mul_shoup(v, s, ss);
    return *this;
  }

  RingElement operator-() const {
    RingElement r = *this;
    const auto& m = ctx_->modulus();
    for (auto& v : r.c_) v = m.neg(v);
    return r;
  }

  friend RingElement operator+(RingElement a, const RingElement& b) { return a += b; }
  friend RingElement operator-(RingElement a, const RingElement& b) { return a -= b; }
  friend RingElement operator*(RingElement a, const RingElement& b) { return a *= b; }

  bool operator==(const RingElement& o) const {
    return c_ == o.c_ && (ctx_ == o.ctx_ || (ctx_ && o.ctx_ && ctx_->same_ring(*o.ctx_)));
  }

  void check(const RingElement& o) const {
    if (!ctx_ || !o.ctx_) throw ParamMismatch("uninitialized ring element");
    if (ctx_ != o.ctx_ && !ctx_->same_ring(*o.ctx_)) throw ParamMismatch("ring parameter mismatch");
  }

 private:
  RingPtr ctx_;
  std::vector<u64> c_;
};

inline RingElement ring_add(const RingElement& a, const RingElement& b) { return a + b; }
inline RingElement ring_sub(const RingElement& a, const RingElement& b) { return a - b; }
inline RingElement ring_mul(const RingElement& a, const RingElement& b) { return a * b; }
inline RingElement ring_scalar_mul(const RingElement& a, u64 c) {
  RingElement r = a;
  r.scale(c);
  return r;
}

/// An element held in the NTT domain, for repeated products against one operand.
struct NttElement {
  RingPtr ctx;
  std::vector<u64> v;

  static NttElement of(const RingElement& a) {
    NttElement e{a.context(), std::vector<u64>(a.coeffs().begin(), a.coeffs().end())};
    e.ctx->forward(e.v);
    return e;
  }

  RingElement to_coeffs() const {
    std::vector<u64> c = v;
    ctx->inverse(c);
    return RingElement(ctx, std::move(c));
  }
};

// acc += a * b, all in the NTT domain.
inline void ntt_mul_acc(std::vector<u64>& acc, const NttElement& a, const NttElement& b) {
  const auto& m = a.ctx->modulus();
  if (acc.empty()) acc.assign(a.v.size(), 0);
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = m.add(acc[i], m.mul(a.v[i], b.v[i]));
}

// ---- SIMD slots -----------------------------------------------------------

using SlotVector = std::vector<u64>;

inline RingElement slot_encode(const RingPtr& ctx, std::span<const u64> values) {
  const std::size_t n = ctx->degree();
  if (values.size() != n) throw std::invalid_argument("slot vector length must equal ring degree");
  std::vector<u64> evals(n);
  const auto& perm = ctx->slot_to_ntt();
  for (std::size_t j = 0; j < n; ++j) {
    if (values[j] >= ctx->q()) throw std::invalid_argument("slot value out of range");
    evals[perm[j]] = values[j];
  }
  ctx->inverse(evals);
  return RingElement(ctx, std::move(evals));
}

inline SlotVector slot_decode(const RingElement& a) {
  std::vector<u64> evals(a.coeffs().begin(), a.coeffs().end());
  a.ctx().forward(evals);
  const auto& perm = a.ctx().slot_to_ntt();
  SlotVector out(a.degree());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = evals[perm[j]];
  return out;
}

// ---- sampling -------------------------------------------------------------

inline RingElement sample_uniform(const RingPtr& ctx, SeedStream& rng) {
  RingElement r(ctx);
  for (auto& v : r.mutable_coeffs()) v = rng.uniform(ctx->q());
  return r;
}

inline i64 centered_binomial(SeedStream& rng, unsigned eta) {
  i64 s = 0;
  for (unsigned i = 0; i < eta; ++i) s += static_cast<i64>(rng.bit()) - static_cast<i64>(rng.bit());
  return s;
}

/// Centered-binomial(eta) coefficients, represented mod the ring modulus.
inline RingElement sample_small(const RingPtr& ctx, SeedStream& rng, unsigned eta) {
  RingElement r(ctx);
  const auto& m = ctx->modulus();
  for (auto& v : r.mutable_coeffs()) v = m.reduce_signed(centered_binomial(rng, eta));
  return r;
}

// ---- canonical serialization ---------------------------------------------

inline void write_ring(ByteWriter& w, const RingElement& a) {
  w.u64(a.degree());
  w.u64(a.ctx().q());
  for (auto v : a.coeffs()) w.u64(v);
}

inline RingElement read_ring(ByteReader& r, const RingPtr& ctx) {
  const u64 n = r.u64();
  const u64 q = r.u64();
  if (n != ctx->degree() || q != ctx->q()) throw DecodeError("ring header does not match context");
  std::vector<u64> c(n);
  for (auto& v : c) {
    v = r.u64();
    if (v >= q) throw DecodeError("ring coefficient out of range");
  }
  return RingElement(ctx, std::move(c));
}

inline Bytes serialize(const RingElement& a) {
  ByteWriter w;
  write_ring(w, a);
  return std::move(w).take();
}

inline std::size_t ring_wire_size(std::size_t degree) { return 16 + 8 * degree; }

}  // namespace cessmpc
