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

// BGV-style encryption over R_q = Z_q[X]/(X^N + 1), q a product of two
// NTT primes, plaintexts in R_p. Polynomials are kept in RNS form in the NTT
// domain; the coefficient form is only materialized for decryption and
// serialization.

#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "cessmpc/ring/ring.hpp"

namespace cessmpc {

struct HeParams {
  std::size_t degree = 1024;
  u64 plain_modulus = 2013265921;
  std::vector<u64> primes;
  unsigned eta = 1;
  unsigned smudge_bits = 40;

  static constexpr std::size_t kMaxLimbs = 4;

  // Primes below 2^63, congruent to 1 mod 2^17 so any N <= 2^16 works.
  // Shorter lists are prefixes of longer ones.
  static const std::vector<u64>& ntt_primes(std::size_t count) {
    static const std::vector<u64> all = find_ntt_primes(63, kMaxLimbs, 1ULL << 17);
    static const std::array<std::vector<u64>, kMaxLimbs + 1> prefixes = [] {
      std::array<std::vector<u64>, kMaxLimbs + 1> out;
      for (std::size_t c = 0; c <= kMaxLimbs; ++c) out[c].assign(all.begin(), all.begin() + static_cast<long>(c));
      return out;
    }();
    if (count < 1 || count > kMaxLimbs) throw std::invalid_argument("unsupported limb count");
    return prefixes[count];
  }

  static const std::vector<u64>& default_primes() { return ntt_primes(2); }

  // log2 q needed to distributedly decrypt Enc(a)*Enc(b) where each factor
  // sums parties^2 fresh ciphertexts (the offline triple product).
  double required_log2_q(std::size_t parties) const {
    const double p = static_cast<double>(plain_modulus);
    const double v = eta / 2.0;
    const double n = static_cast<double>(degree);
    const double fresh = 0.5 * std::log2(p * p / 12.0 + p * p * (2.0 * n * v * v + v));
    const double summed = fresh + 2.0 * std::log2(static_cast<double>(parties));
    const double product = 0.5 * std::log2(n) + 2.0 * summed;
    return product + 3.0 + smudge_bits + std::log2(static_cast<double>(parties) + 1.0) + 2.0;
  }

  /// Smallest prime chain that supports triple generation among `parties`.
  static HeParams for_ring(const RingContext& plain, std::size_t parties = 1) {
    HeParams p;
    p.degree = plain.degree();
    p.plain_modulus = plain.q();
    const double need = p.required_log2_q(std::max<std::size_t>(parties, 1));
    for (std::size_t limbs = 2; limbs <= kMaxLimbs; ++limbs) {
      double have = 0;
      for (u64 q : ntt_primes(limbs)) have += std::log2(static_cast<double>(q));
      if (have >= need || limbs == kMaxLimbs) {
        p.primes = ntt_primes(limbs);
        break;
      }
    }
    return p;
  }
};

class NoiseOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HeContext;
using HeContextPtr = std::shared_ptr<const HeContext>;

/// Element of R_q in RNS/NTT representation.
struct RnsPoly {
  std::vector<std::vector<u64>> limbs;

  bool operator==(const RnsPoly&) const = default;
};

class HeContext {
 public:
  static HeContextPtr create(RingPtr plain, HeParams params) {
    return HeContextPtr(new HeContext(std::move(plain), std::move(params)));
  }

  const HeParams& params() const { return params_; }
  const RingPtr& plain() const { return plain_; }
  std::size_t degree() const { return params_.degree; }
  std::size_t limb_count() const { return rings_.size(); }
  const RingContext& limb_ring(std::size_t i) const { return *rings_[i]; }
  u64 p() const { return params_.plain_modulus; }
  double log2_q() const { return log2_q_; }

  bool compatible(const HeContext& o) const {
    return this == &o || (params_.degree == o.params_.degree && params_.primes == o.params_.primes &&
                          params_.plain_modulus == o.params_.plain_modulus);
  }

  RnsPoly zero() const {
    RnsPoly r;
    r.limbs.assign(rings_.size(), std::vector<u64>(degree(), 0));
    return r;
  }

  RnsPoly from_signed(std::span<const i64> coeffs) const {
    RnsPoly r = zero();
    for (std::size_t l = 0; l < rings_.size(); ++l) {
      const auto& m = rings_[l]->modulus();
      for (std::size_t i = 0; i < coeffs.size(); ++i) r.limbs[l][i] = m.reduce_signed(coeffs[i]);
      rings_[l]->forward(r.limbs[l]);
    }
    return r;
  }

  RnsPoly from_signed128(std::span<const i128> coeffs) const {
    RnsPoly r = zero();
    for (std::size_t l = 0; l < rings_.size(); ++l) {
      const auto& m = rings_[l]->modulus();
      for (std::size_t i = 0; i < coeffs.size(); ++i) r.limbs[l][i] = m.reduce_signed128(coeffs[i]);
      rings_[l]->forward(r.limbs[l]);
    }
    return r;
  }

  // Plaintext embedded with centered coefficients.
  RnsPoly lift_plain(const RingElement& m) const {
    if (!m.valid() || !m.ctx().same_ring(*plain_)) throw ParamMismatch("plaintext ring mismatch");
    std::vector<i64> c(degree());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = plain_->modulus().centered(m[i]);
    return from_signed(c);
  }

  RnsPoly from_coeff_limbs(std::vector<std::vector<u64>> limbs) const {
    if (limbs.size() != rings_.size()) throw DecodeError("limb count mismatch");
    RnsPoly r{std::move(limbs)};
    for (std::size_t l = 0; l < rings_.size(); ++l) {
      if (r.limbs[l].size() != degree()) throw DecodeError("limb length mismatch");
      rings_[l]->forward(r.limbs[l]);
    }
    return r;
  }

  std::vector<std::vector<u64>> to_coeff_limbs(const RnsPoly& a) const {
    auto out = a.limbs;
    for (std::size_t l = 0; l < rings_.size(); ++l) rings_[l]->inverse(out[l]);
    return out;
  }

  // CRT to (-q/2, q/2]. Magnitudes beyond 2^126 saturate; reduce_to_plain
  // on the result is only exact when nothing saturated, so decryption uses
  // centered_mod_plain instead.
  std::vector<i128> to_centered(const RnsPoly& a) const {
    auto limbs = to_coeff_limbs(a);
    std::vector<i128> out(degree());
    std::vector<u64> digits(limbs.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t l = 0; l < limbs.size(); ++l) digits[l] = limbs[l][i];
      out[i] = crt_centered(digits).saturated();
    }
    return out;
  }

  /// Centered CRT lift of every coefficient, reduced mod p.
  RingElement centered_mod_plain(const RnsPoly& a) const {
    auto limbs = to_coeff_limbs(a);
    std::vector<u64> c(degree());
    std::vector<u64> digits(limbs.size());
    const auto& pm = plain_->modulus();
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t l = 0; l < limbs.size(); ++l) digits[l] = limbs[l][i];
      const auto v = crt_centered(digits);
      const u64 r = v.magnitude.mod(pm.value);
      c[i] = v.negative ? pm.neg(r) : r;
    }
    return RingElement(plain_, std::move(c));
  }

  RingElement reduce_to_plain(std::span<const i128> centered) const {
    std::vector<u64> c(centered.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = plain_->modulus().reduce_signed128(centered[i]);
    return RingElement(plain_, std::move(c));
  }

  /// u * factor for signed u, in RNS/NTT form; avoids forming the product.
  RnsPoly from_scaled_signed128(std::span<const i128> u, u64 factor) const {
    RnsPoly r = zero();
    for (std::size_t l = 0; l < rings_.size(); ++l) {
      const auto& m = rings_[l]->modulus();
      const u64 f = factor % m.value;
      for (std::size_t i = 0; i < u.size(); ++i) r.limbs[l][i] = m.mul(m.reduce_signed128(u[i]), f);
      rings_[l]->forward(r.limbs[l]);
    }
    return r;
  }

  // ---- arithmetic ----
  void add_to(RnsPoly& a, const RnsPoly& b) const {
    for (std::size_t l = 0; l < rings_.size(); ++l) {
      const auto& m = rings_[l]->modulus();
      for (std::size_t i = 0; i < degree(); ++i) a.limbs[l][i] = m.add(a.limbs[l][i], b.limbs[l][i]);
    }
  }
  void sub_from(RnsPoly& a, const RnsPoly& b) const {
    for (std::size_t l = 0; l < rings_.size(); ++l) {
      const auto& m = rings_[l]->modulus();
      for (std::size_t i = 0; i < degree(); ++i) a.limbs[l][i] = m.sub(a.limbs[l][i], b.limbs[l][i]);
    }
  }
  RnsPoly add(RnsPoly a, const RnsPoly& b) const {
    add_to(a, b);
    return a;
  }
  RnsPoly sub(RnsPoly a, const RnsPoly& b) const {
    sub_from(a, b);
    return a;
  }
  RnsPoly neg(RnsPoly a) const {
    for (std::size_t l = 0; l < rings_.size(); ++l) {
      const auto& m = rings_[l]->modulus();
      for (auto& v : a.limbs[l]) v = m.neg(v);
    }
    return a;
  }
  RnsPoly mul(const RnsPoly& a, const RnsPoly& b) const {
    RnsPoly r = zero();
    for (std::size_t l = 0; l < rings_.size(); ++l) {
      const auto& m = rings_[l]->modulus();
      for (std::size_t i = 0; i < degree(); ++i) r.limbs[l][i] = m.mul(a.limbs[l][i], b.limbs[l][i]);
    }
    return r;
  }
  RnsPoly scale(RnsPoly a, i64 c) const {
    for (std::size_t l = 0; l < rings_.size(); ++l) {
      const auto& m = rings_[l]->modulus();
      const u64 cc = m.reduce_signed(c);
      for (auto& v : a.limbs[l]) v = m.mul(v, cc);
    }
    return a;
  }

  RnsPoly sample_uniform(SeedStream& rng) const {
    RnsPoly r = zero();
    for (std::size_t l = 0; l < rings_.size(); ++l) {
      for (auto& v : r.limbs[l]) v = rng.uniform(params_.primes[l]);
    }
    return r;
  }

  std::vector<i64> sample_small_coeffs(SeedStream& rng) const {
    std::vector<i64> c(degree());
    for (auto& v : c) v = centered_binomial(rng, params_.eta);
    return c;
  }

  RnsPoly sample_small(SeedStream& rng) const { return from_signed(sample_small_coeffs(rng)); }

 private:
  // Unsigned integer below 2^256, enough for q with up to four limbs.
  struct Wide {
    std::array<u64, 4> w{};

    static Wide from(u64 v) {
      Wide r;
      r.w[0] = v;
      return r;
    }
    Wide times(u64 m) const {
      Wide r;
      u128 carry = 0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const u128 t = static_cast<u128>(w[i]) * m + carry;
        r.w[i] = static_cast<u64>(t);
        carry = t >> 64;
      }
      return r;
    }
    Wide plus(const Wide& o) const {
      Wide r;
      u128 carry = 0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const u128 t = static_cast<u128>(w[i]) + o.w[i] + carry;
        r.w[i] = static_cast<u64>(t);
        carry = t >> 64;
      }
      return r;
    }
    Wide minus(const Wide& o) const {
      Wide r;
      u64 borrow = 0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const u128 t = static_cast<u128>(w[i]) - o.w[i] - borrow;
        r.w[i] = static_cast<u64>(t);
        borrow = static_cast<u64>(t >> 64) & 1;
      }
      return r;
    }
    Wide half() const {
      Wide r;
      for (std::size_t i = 0; i < w.size(); ++i) {
        r.w[i] = w[i] >> 1;
        if (i + 1 < w.size()) r.w[i] |= w[i + 1] << 63;
      }
      return r;
    }
    bool greater(const Wide& o) const {
      for (std::size_t i = w.size(); i-- > 0;) {
        if (w[i] != o.w[i]) return w[i] > o.w[i];
      }
      return false;
    }
    u64 mod(u64 m) const {
      u128 r = 0;
      for (std::size_t i = w.size(); i-- > 0;) r = ((r << 64) | w[i]) % m;
      return static_cast<u64>(r);
    }
  };

  struct SignedWide {
    bool negative = false;
    Wide magnitude;

    i128 saturated() const {
      constexpr i128 cap = static_cast<i128>(1) << 126;
      const auto& w = magnitude.w;
      i128 v = cap;
      if (w[2] == 0 && w[3] == 0 && (w[1] >> 62) == 0) v = (static_cast<i128>(w[1]) << 64) | w[0];
      return negative ? -v : v;
    }
  };

  // Garner mixed-radix reconstruction, then centering around q/2.
  SignedWide crt_centered(std::span<const u64> residues) const {
    const std::size_t L = rings_.size();
    std::array<u64, HeParams::kMaxLimbs> t{};
    for (std::size_t i = 0; i < L; ++i) {
      const auto& m = rings_[i]->modulus();
      // value of the prefix sum_{j<i} t_j P_j modulo q_i
      u64 acc = 0;
      for (std::size_t j = 0; j < i; ++j) acc = m.add(acc, m.mul(t[j] % m.value, prefix_mod_[i][j]));
      t[i] = m.mul(m.sub(residues[i] % m.value, acc), prefix_inv_[i]);
    }
    Wide x;
    for (std::size_t i = 0; i < L; ++i) x = x.plus(prefix_[i].times(t[i]));
    if (x.greater(half_q_)) return {true, q_wide_.minus(x)};
    return {false, x};
  }

  HeContext(RingPtr plain, HeParams params) : params_(std::move(params)), plain_(std::move(plain)) {
    const std::size_t L = params_.primes.size();
    if (L < 1 || L > HeParams::kMaxLimbs) throw std::invalid_argument("between one and four ciphertext primes");
    if (params_.degree != plain_->degree() || params_.plain_modulus != plain_->q()) {
      throw ParamMismatch("encryption parameters do not match plaintext ring");
    }
    for (u64 prime : params_.primes) {
      if (prime <= params_.plain_modulus) throw std::invalid_argument("ciphertext prime must exceed p");
      if (prime >= (1ULL << 63)) throw std::invalid_argument("ciphertext prime must be below 2^63");
      rings_.push_back(make_ring({params_.degree, prime, 0}));
      log2_q_ += std::log2(static_cast<double>(prime));
    }
    prefix_.assign(L, Wide::from(1));
    for (std::size_t i = 1; i < L; ++i) prefix_[i] = prefix_[i - 1].times(params_.primes[i - 1]);
    q_wide_ = prefix_[L - 1].times(params_.primes[L - 1]);
    half_q_ = q_wide_.half();
    prefix_mod_.assign(L, {});
    prefix_inv_.assign(L, 1);
    for (std::size_t i = 0; i < L; ++i) {
      const auto& m = rings_[i]->modulus();
      for (std::size_t j = 0; j < i; ++j) prefix_mod_[i].push_back(prefix_[j].mod(m.value));
      prefix_inv_[i] = m.inv(prefix_[i].mod(m.value));
    }
  }

  HeParams params_;
  RingPtr plain_;
  std::vector<RingPtr> rings_;
  double log2_q_ = 0;
  std::vector<Wide> prefix_;  // P_i = q_0 ... q_{i-1}
  Wide q_wide_;
  Wide half_q_;
  std::vector<std::vector<u64>> prefix_mod_;  // P_j mod q_i for j < i
  std::vector<u64> prefix_inv_;               // P_i^{-1} mod q_i
};

struct SecretKey {
  RnsPoly s;
};

struct PublicKey {
  RnsPoly a;
  RnsPoly b;
  bool operator==(const PublicKey&) const = default;
};

struct KeyPair {
  PublicKey pk;
  SecretKey sk;
};

/// Ciphertext of degree 1 (c0, c1) or 2 (c0, c1, c2). Decrypts as
/// c0 + c1 s + c2 s^2. log_sigma estimates log2 of the standard deviation
/// of the decryption polynomial's coefficients (plaintext plus p * noise).
struct Ciphertext {
  std::vector<RnsPoly> c;
  double log_sigma = 0;

  std::size_t degree() const { return c.empty() ? 0 : c.size() - 1; }
  bool operator==(const Ciphertext& o) const { return c == o.c; }
};

// Decryption stays exact while the coefficients remain below q/2; we budget
// against eight standard deviations.
constexpr double kNoiseTailFactorLog2 = 3.0;

inline double noise_bound_log2(const Ciphertext& ct) { return ct.log_sigma + kNoiseTailFactorLog2; }

inline double noise_budget(const HeContext& ctx, const Ciphertext& ct) {
  return ctx.log2_q() - 1.0 - noise_bound_log2(ct);
}

namespace detail {

inline double log2_add(double a, double b) {
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log2(1.0 + std::exp2(lo - hi));
}

inline double fresh_log_sigma(const HeContext& ctx) {
  const double p = static_cast<double>(ctx.p());
  const double v = ctx.params().eta / 2.0;
  const double n = static_cast<double>(ctx.degree());
  return 0.5 * std::log2(p * p / 12.0 + p * p * (2.0 * n * v * v + v));
}

}  // namespace detail

inline KeyPair keygen(const HeContext& ctx, const Seed& seed) {
  SeedStream rng(derive_seed(seed, "he-keygen"));
  KeyPair kp;
  kp.sk.s = ctx.sample_small(rng);
  kp.pk.a = ctx.sample_uniform(rng);
  auto e = ctx.sample_small(rng);
  kp.pk.b = ctx.add(ctx.mul(kp.pk.a, kp.sk.s), ctx.scale(e, static_cast<i64>(ctx.p())));
  return kp;
}

inline Ciphertext encrypt(const HeContext& ctx, const PublicKey& pk, const RingElement& m, SeedStream& rng) {
  auto u = ctx.sample_small(rng);
  auto e1 = ctx.sample_small(rng);
  auto e2 = ctx.sample_small(rng);
  const i64 p = static_cast<i64>(ctx.p());
  Ciphertext ct;
  ct.c.push_back(ctx.add(ctx.add(ctx.mul(pk.b, u), ctx.scale(e1, p)), ctx.lift_plain(m)));
  ct.c.push_back(ctx.add(ctx.neg(ctx.mul(pk.a, u)), ctx.scale(e2, p)));
  ct.log_sigma = detail::fresh_log_sigma(ctx);
  return ct;
}

inline Ciphertext encrypt(const HeContext& ctx, const PublicKey& pk, const RingElement& m, const Seed& seed) {
  SeedStream rng(seed);
  return encrypt(ctx, pk, m, rng);
}

inline std::vector<i128> decryption_polynomial(const HeContext& ctx, const SecretKey& sk, const Ciphertext& ct) {
  if (ct.c.size() < 2 || ct.c.size() > 3) throw ParamMismatch("unsupported ciphertext degree");
  RnsPoly acc = ct.c[0];
  ctx.add_to(acc, ctx.mul(ct.c[1], sk.s));
  if (ct.c.size() == 3) ctx.add_to(acc, ctx.mul(ct.c[2], ctx.mul(sk.s, sk.s)));
  return ctx.to_centered(acc);
}

struct Decryption {
  RingElement value;
  bool reliable = true;
};

/// Never throws on noise exhaustion; the result is flagged instead.
inline Decryption decrypt_flagged(const HeContext& ctx, const SecretKey& sk, const Ciphertext& ct) {
  if (ct.c.size() < 2 || ct.c.size() > 3) throw ParamMismatch("unsupported ciphertext degree");
  RnsPoly acc = ct.c[0];
  ctx.add_to(acc, ctx.mul(ct.c[1], sk.s));
  if (ct.c.size() == 3) ctx.add_to(acc, ctx.mul(ct.c[2], ctx.mul(sk.s, sk.s)));
  return {ctx.centered_mod_plain(acc), noise_budget(ctx, ct) > 0};
}

inline RingElement decrypt(const HeContext& ctx, const SecretKey& sk, const Ciphertext& ct) {
  return decrypt_flagged(ctx, sk, ct).value;
}

// ---- homomorphic operations ------------------------------------------------

inline Ciphertext ct_add(const HeContext& ctx, const Ciphertext& a, const Ciphertext& b) {
  if (a.c.empty() || b.c.empty()) throw ParamMismatch("empty ciphertext");
  const auto& longer = a.c.size() >= b.c.size() ? a : b;
  const auto& shorter = a.c.size() >= b.c.size() ? b : a;
  Ciphertext out = longer;
  for (std::size_t i = 0; i < shorter.c.size(); ++i) ctx.add_to(out.c[i], shorter.c[i]);
  out.log_sigma = detail::log2_add(a.log_sigma, b.log_sigma);
  return out;
}

inline Ciphertext ct_neg(const HeContext& ctx, const Ciphertext& a) {
  Ciphertext out = a;
  for (auto& comp : out.c) comp = ctx.neg(std::move(comp));
  return out;
}

inline Ciphertext ct_sub(const HeContext& ctx, const Ciphertext& a, const Ciphertext& b) {
  return ct_add(ctx, a, ct_neg(ctx, b));
}

inline Ciphertext ct_add_plain(const HeContext& ctx, const Ciphertext& a, const RingElement& m) {
  Ciphertext out = a;
  ctx.add_to(out.c[0], ctx.lift_plain(m));
  const double mag = static_cast<double>(std::max<u64>(1, m.inf_norm()));
  out.log_sigma = detail::log2_add(a.log_sigma, std::log2(mag));
  return out;
}

inline Ciphertext ct_sub_plain(const HeContext& ctx, const Ciphertext& a, const RingElement& m) {
  return ct_add_plain(ctx, a, -m);
}

inline Ciphertext ct_mul_plain(const HeContext& ctx, const Ciphertext& a, const RingElement& m) {
  const auto lifted = ctx.lift_plain(m);
  Ciphertext out;
  for (const auto& comp : a.c) out.c.push_back(ctx.mul(comp, lifted));
  out.log_sigma = a.log_sigma + std::log2(static_cast<double>(std::max<u64>(1, m.l1_norm())));
  return out;
}

/// A plaintext lifted once for repeated multiplication against many ciphertexts.
struct LiftedPlain {
  RnsPoly poly;
  u64 l1 = 0;
  u64 inf = 0;
};

inline LiftedPlain lift_plain(const HeContext& ctx, const RingElement& m) {
  return {ctx.lift_plain(m), m.l1_norm(), m.inf_norm()};
}

inline Ciphertext ct_mul_plain(const HeContext& ctx, const Ciphertext& a, const LiftedPlain& m) {
  Ciphertext out;
  for (const auto& comp : a.c) out.c.push_back(ctx.mul(comp, m.poly));
  out.log_sigma = a.log_sigma + std::log2(static_cast<double>(std::max<u64>(1, m.l1)));
  return out;
}

inline Ciphertext ct_add_plain(const HeContext& ctx, const Ciphertext& a, const LiftedPlain& m) {
  Ciphertext out = a;
  ctx.add_to(out.c[0], m.poly);
  out.log_sigma = detail::log2_add(a.log_sigma, std::log2(static_cast<double>(std::max<u64>(1, m.inf))));
  return out;
}

inline Ciphertext ct_mul_scalar(const HeContext& ctx, const Ciphertext& a, u64 c) {
  const i64 cc = ctx.plain()->modulus().centered(c % ctx.p());
  Ciphertext out;
  for (const auto& comp : a.c) out.c.push_back(ctx.scale(comp, cc));
  out.log_sigma = a.log_sigma + std::log2(static_cast<double>(std::max<i64>(1, cc < 0 ? -cc : cc)));
  return out;
}

inline Ciphertext ct_mul(const HeContext& ctx, const Ciphertext& a, const Ciphertext& b) {
  if (a.degree() != 1 || b.degree() != 1) throw ParamMismatch("ct_mul needs two degree-1 ciphertexts");
  Ciphertext out;
  out.c.push_back(ctx.mul(a.c[0], b.c[0]));
  out.c.push_back(ctx.add(ctx.mul(a.c[0], b.c[1]), ctx.mul(a.c[1], b.c[0])));
  out.c.push_back(ctx.mul(a.c[1], b.c[1]));
  out.log_sigma = 0.5 * std::log2(static_cast<double>(ctx.degree())) + a.log_sigma + b.log_sigma;
  if (noise_budget(ctx, out) <= 0) throw NoiseOverflow("insufficient noise budget for multiplication");
  return out;
}

// ---- shared key and distributed decryption ---------------------------------

struct KeyShare {
  std::size_t index = 0;
  RnsPoly s;  // additive share of s
  RnsPoly t;  // additive share of s^2
};

struct SharedKeyMaterial {
  PublicKey pk;
  std::vector<KeyShare> shares;
  SecretKey dealer_secret;  // retained by the dealer; test harnesses decrypt with it
  std::size_t parties() const { return shares.size(); }
};

inline SharedKeyMaterial shared_keygen(const HeContext& ctx, std::size_t n, const Seed& seed) {
  if (n < 1) throw std::invalid_argument("need at least one party");
  auto kp = keygen(ctx, seed);
  SharedKeyMaterial out;
  out.pk = kp.pk;
  out.dealer_secret = kp.sk;
  SeedStream rng(derive_seed(seed, "he-shared-split"));
  RnsPoly s_rest = kp.sk.s;
  RnsPoly t_rest = ctx.mul(kp.sk.s, kp.sk.s);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    KeyShare ks{i, ctx.sample_uniform(rng), ctx.sample_uniform(rng)};
    ctx.sub_from(s_rest, ks.s);
    ctx.sub_from(t_rest, ks.t);
    out.shares.push_back(std::move(ks));
  }
  out.shares.push_back(KeyShare{n - 1, std::move(s_rest), std::move(t_rest)});
  return out;
}

struct PartialDecryption {
  std::size_t index = 0;
  RnsPoly mu;
};

// Smudging magnitude per party, in units of p.
inline u128 smudge_bound(const HeContext& ctx, const Ciphertext& ct, std::size_t parties) {
  const double bound_log2 = noise_bound_log2(ct) + ctx.params().smudge_bits;
  const double total = bound_log2 + std::log2(static_cast<double>(parties) + 1.0);
  if (total >= ctx.log2_q() - 1.0) throw NoiseOverflow("smudging noise would exceed q/2");
  const double units = std::ceil(std::exp2(bound_log2) / static_cast<double>(ctx.p()));
  if (units >= std::exp2(125.0)) throw NoiseOverflow("smudging range too wide");
  return static_cast<u128>(units);
}

inline PartialDecryption dist_decrypt_share(const HeContext& ctx, const KeyShare& ks, std::size_t parties,
                                            const Ciphertext& ct, SeedStream& rng) {
  if (ct.degree() < 1 || ct.degree() > 2) throw ParamMismatch("unsupported ciphertext degree");
  const u128 bound = smudge_bound(ctx, ct, parties);
  PartialDecryption pd{ks.index, ctx.mul(ct.c[1], ks.s)};
  if (ct.degree() == 2) ctx.add_to(pd.mu, ctx.mul(ct.c[2], ks.t));
  if (ks.index == 0) ctx.add_to(pd.mu, ct.c[0]);
  std::vector<i128> smudge(ctx.degree());
  for (auto& v : smudge) v = static_cast<i128>(rng.uniform128(2 * bound + 1)) - static_cast<i128>(bound);
  ctx.add_to(pd.mu, ctx.from_scaled_signed128(smudge, ctx.p()));
  return pd;
}

inline RingElement dist_decrypt_combine(const HeContext& ctx, std::span<const PartialDecryption> partials,
                                        std::size_t parties) {
  if (partials.size() != parties) throw std::invalid_argument("wrong number of partial decryptions");
  std::vector<bool> seen(parties, false);
  for (const auto& pd : partials) {
    if (pd.index >= parties || seen[pd.index]) throw std::invalid_argument("partial decryptions do not match key shares");
    seen[pd.index] = true;
  }
  RnsPoly acc = ctx.zero();
  for (const auto& pd : partials) ctx.add_to(acc, pd.mu);
  return ctx.centered_mod_plain(acc);
}

// ---- serialization ---------------------------------------------------------

inline void write_he_header(ByteWriter& w, const HeContext& ctx) {
  w.u64(ctx.degree());
  w.u32(static_cast<std::uint32_t>(ctx.limb_count()));
  for (u64 q : ctx.params().primes) w.u64(q);
}

inline void read_he_header(ByteReader& r, const HeContext& ctx) {
  if (r.u64() != ctx.degree()) throw DecodeError("ciphertext degree N mismatch");
  if (r.u32() != ctx.limb_count()) throw DecodeError("ciphertext prime count mismatch");
  for (u64 q : ctx.params().primes) {
    if (r.u64() != q) throw DecodeError("ciphertext prime mismatch");
  }
}

inline void write_rns(ByteWriter& w, const HeContext& ctx, const RnsPoly& a) {
  for (const auto& limb : ctx.to_coeff_limbs(a)) {
    for (u64 v : limb) w.u64(v);
  }
}

inline RnsPoly read_rns(ByteReader& r, const HeContext& ctx) {
  std::vector<std::vector<u64>> limbs(ctx.limb_count(), std::vector<u64>(ctx.degree()));
  for (std::size_t l = 0; l < limbs.size(); ++l) {
    for (auto& v : limbs[l]) {
      v = r.u64();
      if (v >= ctx.params().primes[l]) throw DecodeError("ciphertext coefficient out of range");
    }
  }
  return ctx.from_coeff_limbs(std::move(limbs));
}

// Layout: degree, N, prime list, components, then the sender's noise estimate.
inline void write_ciphertext(ByteWriter& w, const HeContext& ctx, const Ciphertext& ct) {
  w.u8(static_cast<std::uint8_t>(ct.degree()));
  write_he_header(w, ctx);
  for (const auto& comp : ct.c) write_rns(w, ctx, comp);
  w.u64(std::bit_cast<u64>(ct.log_sigma));
}

inline Ciphertext read_ciphertext(ByteReader& r, const HeContext& ctx) {
  auto degree = r.u8();
  if (degree < 1 || degree > 2) throw DecodeError("bad ciphertext degree");
  read_he_header(r, ctx);
  Ciphertext ct;
  for (int i = 0; i <= degree; ++i) ct.c.push_back(read_rns(r, ctx));
  ct.log_sigma = std::bit_cast<double>(r.u64());
  if (!std::isfinite(ct.log_sigma)) throw DecodeError("bad noise estimate");
  return ct;
}

inline Bytes serialize(const HeContext& ctx, const Ciphertext& ct) {
  ByteWriter w;
  write_ciphertext(w, ctx, ct);
  return std::move(w).take();
}

inline void write_partial(ByteWriter& w, const HeContext& ctx, const PartialDecryption& pd) {
  w.u32(static_cast<std::uint32_t>(pd.index));
  write_rns(w, ctx, pd.mu);
}

inline PartialDecryption read_partial(ByteReader& r, const HeContext& ctx) {
  PartialDecryption pd;
  pd.index = r.u32();
  pd.mu = read_rns(r, ctx);
  return pd;
}

inline void write_public_key(ByteWriter& w, const HeContext& ctx, const PublicKey& pk) {
  write_he_header(w, ctx);
  write_rns(w, ctx, pk.a);
  write_rns(w, ctx, pk.b);
}

inline PublicKey read_public_key(ByteReader& r, const HeContext& ctx) {
  read_he_header(r, ctx);
  PublicKey pk;
  pk.a = read_rns(r, ctx);
  pk.b = read_rns(r, ctx);
  return pk;
}

inline void write_secret_key(ByteWriter& w, const HeContext& ctx, const SecretKey& sk) {
  write_he_header(w, ctx);
  write_rns(w, ctx, sk.s);
}

inline SecretKey read_secret_key(ByteReader& r, const HeContext& ctx) {
  read_he_header(r, ctx);
  return SecretKey{read_rns(r, ctx)};
}

}  // namespace cessmpc
