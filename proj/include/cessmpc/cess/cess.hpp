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

// Commitment-enhanced secret sharing. A shared value is held as
//
//   private, per server j:  share x_j, commitment randomness r_j
//   public, identical everywhere:  Comm(x_j, r_j), Enc_pk_j(x_j), Enc_pk_j(r_j)
//
// for every server j. Linear updates act on both halves with the matching
// homomorphic law. Retired (flagged) servers have their public slots cleared
// and are skipped by every update.

#pragma once

#include <bit>
#include <memory>
#include <optional>
#include <vector>

#include "cessmpc/commit/commit.hpp"
#include "cessmpc/he/he.hpp"

namespace cessmpc {

/// Public parameters every participant agrees on.
struct CessContext {
  RingPtr ring;
  CommitKeyPtr ck;
  HeContextPtr he;
  std::vector<PublicKey> server_pks;

  std::size_t parties() const { return server_pks.size(); }
};

using CessContextPtr = std::shared_ptr<const CessContext>;

struct ShareState {
  RingElement value;
  Randomness rand;

  bool operator==(const ShareState&) const = default;
};

/// Public half of a shared value. Ciphertext arrays are empty for holders
/// that only track commitments (STTP, auditor).
struct WirePublic {
  std::vector<Commitment> comms;
  std::vector<Ciphertext> cts_value;
  std::vector<std::vector<Ciphertext>> cts_rand;

  bool has_ciphertexts() const { return !cts_value.empty(); }
  bool retired(std::size_t j) const { return comms[j].c1.empty(); }

  void retire(std::size_t j) {
    comms[j] = Commitment{};
    if (has_ciphertexts()) {
      cts_value[j] = Ciphertext{};
      cts_rand[j].clear();
    }
  }

  WirePublic commitments_only() const { return WirePublic{comms, {}, {}}; }
};

/// One server's bundle for one shared value.
struct CessShare {
  std::size_t owner = 0;
  ShareState state;
  std::shared_ptr<const WirePublic> pub;
};

// ---- plain additive sharing -------------------------------------------------

inline std::vector<RingElement> share_additive(const RingPtr& ring, const RingElement& x, std::size_t n,
                                               SeedStream& rng) {
  if (n < 2) throw std::invalid_argument("additive sharing needs at least two parties");
  std::vector<RingElement> out;
  RingElement last = x;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    out.push_back(sample_uniform(ring, rng));
    last -= out.back();
  }
  out.push_back(std::move(last));
  return out;
}

inline RingElement reconstruct(std::span<const RingElement> shares) {
  if (shares.empty()) throw std::invalid_argument("reconstruct: missing shares");
  RingElement acc = shares[0];
  for (std::size_t i = 1; i < shares.size(); ++i) acc += shares[i];
  return acc;
}

// ---- private-half updates ---------------------------------------------------

inline ShareState share_add(const ShareState& a, const ShareState& b) { return {a.value + b.value, a.rand + b.rand}; }
inline ShareState share_sub(const ShareState& a, const ShareState& b) { return {a.value - b.value, a.rand - b.rand}; }

inline ShareState share_add_const(const ShareState& a, const RingElement& c, bool designated) {
  if (!designated) return a;
  return {a.value + c, a.rand};
}

inline ShareState share_scalar_mul(const ShareState& a, u64 c) { return {ring_scalar_mul(a.value, c), a.rand.scaled(c)}; }

inline ShareState share_mul_public(const ShareState& a, const RingElement& e) { return {a.value * e, a.rand.times(e)}; }

// ---- public-half updates ----------------------------------------------------

namespace detail {

inline void check_shape(const WirePublic& a, const WirePublic& b) {
  if (a.comms.size() != b.comms.size() || a.has_ciphertexts() != b.has_ciphertexts()) {
    throw ParamMismatch("wire operands have different shapes");
  }
}

}  // namespace detail

inline WirePublic pub_add(const CessContext& ctx, const WirePublic& a, const WirePublic& b, bool subtract = false) {
  detail::check_shape(a, b);
  WirePublic out = a;
  const auto& he = *ctx.he;
  for (std::size_t j = 0; j < a.comms.size(); ++j) {
    if (a.retired(j) || b.retired(j)) continue;
    out.comms[j] = subtract ? comm_sub(a.comms[j], b.comms[j]) : comm_add(a.comms[j], b.comms[j]);
    if (!a.has_ciphertexts()) continue;
    out.cts_value[j] = subtract ? ct_sub(he, a.cts_value[j], b.cts_value[j]) : ct_add(he, a.cts_value[j], b.cts_value[j]);
    for (std::size_t l = 0; l < a.cts_rand[j].size(); ++l) {
      out.cts_rand[j][l] =
          subtract ? ct_sub(he, a.cts_rand[j][l], b.cts_rand[j][l]) : ct_add(he, a.cts_rand[j][l], b.cts_rand[j][l]);
    }
  }
  return out;
}

inline WirePublic pub_sub(const CessContext& ctx, const WirePublic& a, const WirePublic& b) {
  return pub_add(ctx, a, b, true);
}

// Only the designated server's share absorbs c, so only its commitment and
// value ciphertext change.
inline WirePublic pub_add_const(const CessContext& ctx, const WirePublic& a, const RingElement& c,
                                std::size_t designated) {
  if (designated >= a.comms.size() || a.retired(designated)) throw ParamMismatch("designated server is retired");
  WirePublic out = a;
  out.comms[designated] = comm_add_const(a.comms[designated], c);
  if (a.has_ciphertexts()) out.cts_value[designated] = ct_add_plain(*ctx.he, a.cts_value[designated], c);
  return out;
}

inline WirePublic pub_scalar_mul(const CessContext& ctx, const WirePublic& a, u64 c) {
  WirePublic out = a;
  const auto& he = *ctx.he;
  for (std::size_t j = 0; j < a.comms.size(); ++j) {
    if (a.retired(j)) continue;
    out.comms[j] = comm_scalar_mul(*ctx.ck, a.comms[j], c);
    if (!a.has_ciphertexts()) continue;
    out.cts_value[j] = ct_mul_scalar(he, a.cts_value[j], c);
    for (auto& ct : out.cts_rand[j]) ct = ct_mul_scalar(he, ct, c);
  }
  return out;
}

inline WirePublic pub_mul_public(const CessContext& ctx, const WirePublic& a, const RingElement& e) {
  WirePublic out = a;
  const auto& he = *ctx.he;
  std::optional<LiftedPlain> lifted;
  if (a.has_ciphertexts()) lifted = lift_plain(he, e);
  for (std::size_t j = 0; j < a.comms.size(); ++j) {
    if (a.retired(j)) continue;
    out.comms[j] = comm_mul_public(*ctx.ck, a.comms[j], e);
    if (!a.has_ciphertexts()) continue;
    out.cts_value[j] = ct_mul_plain(he, a.cts_value[j], *lifted);
    for (auto& ct : out.cts_rand[j]) ct = ct_mul_plain(he, ct, *lifted);
  }
  return out;
}

// ---- whole-bundle updates ---------------------------------------------------

enum class LinearOp { Add, Sub, AddConst, ScalarMul, MulPublic };

struct LinearOperand {
  const CessShare* other = nullptr;  // Add / Sub
  RingElement element;               // AddConst / MulPublic
  u64 scalar = 0;                    // ScalarMul
};

inline CessShare cess_linear_update(const CessContext& ctx, const CessShare& a, LinearOp op,
                                    const LinearOperand& operand, std::size_t designated = 0) {
  CessShare out;
  out.owner = a.owner;
  switch (op) {
    case LinearOp::Add:
    case LinearOp::Sub: {
      if (operand.other == nullptr || operand.other->owner != a.owner) throw ParamMismatch("operand mismatch");
      const bool sub = op == LinearOp::Sub;
      out.state = sub ? share_sub(a.state, operand.other->state) : share_add(a.state, operand.other->state);
      out.pub = std::make_shared<const WirePublic>(pub_add(ctx, *a.pub, *operand.other->pub, sub));
      break;
    }
    case LinearOp::AddConst:
      out.state = share_add_const(a.state, operand.element, a.owner == designated);
      out.pub = std::make_shared<const WirePublic>(pub_add_const(ctx, *a.pub, operand.element, designated));
      break;
    case LinearOp::ScalarMul:
      out.state = share_scalar_mul(a.state, operand.scalar);
      out.pub = std::make_shared<const WirePublic>(pub_scalar_mul(ctx, *a.pub, operand.scalar));
      break;
    case LinearOp::MulPublic:
      out.state = share_mul_public(a.state, operand.element);
      out.pub = std::make_shared<const WirePublic>(pub_mul_public(ctx, *a.pub, operand.element));
      break;
  }
  return out;
}

// ---- per-server encryption of a share ---------------------------------------

inline void encrypt_share_into(const CessContext& ctx, WirePublic& pub, std::size_t j, const ShareState& s,
                               SeedStream& rng) {
  const auto& he = *ctx.he;
  pub.cts_value[j] = encrypt(he, ctx.server_pks[j], s.value, rng);
  pub.cts_rand[j].clear();
  for (const auto& r : s.rand.r) pub.cts_rand[j].push_back(encrypt(he, ctx.server_pks[j], r, rng));
}

/// Builds the public half for freshly committed shares.
inline WirePublic make_wire_public(const CessContext& ctx, std::span<const ShareState> shares, SeedStream& rng,
                                   bool with_ciphertexts = true) {
  WirePublic pub;
  const std::size_t n = shares.size();
  for (const auto& s : shares) pub.comms.push_back(commit(*ctx.ck, s.value, s.rand));
  if (with_ciphertexts) {
    pub.cts_value.resize(n);
    pub.cts_rand.resize(n);
    for (std::size_t j = 0; j < n; ++j) encrypt_share_into(ctx, pub, j, shares[j], rng);
  }
  return pub;
}

// ---- client input sharing ---------------------------------------------------

struct InputSharing {
  std::vector<ShareState> shares;
  std::shared_ptr<const WirePublic> pub;

  CessShare for_server(std::size_t j) const { return {j, shares[j], pub}; }
};

/// x_0 = x - r + r_0 and x_k = r_k for k >= 1, with r = sum of the mask shares.
/// The client commits to and encrypts every share itself.
inline InputSharing client_input_share(const CessContext& ctx, const RingElement& x,
                                       std::span<const RingElement> mask_shares, SeedStream& rng) {
  const std::size_t n = ctx.parties();
  if (mask_shares.size() != n) throw std::invalid_argument("missing offline mask shares");
  const RingElement r = reconstruct(mask_shares);
  InputSharing out;
  for (std::size_t j = 0; j < n; ++j) {
    RingElement value = j == 0 ? x - r + mask_shares[0] : mask_shares[j];
    out.shares.push_back({std::move(value), sample_randomness(*ctx.ck, rng)});
  }
  out.pub = std::make_shared<const WirePublic>(make_wire_public(ctx, out.shares, rng));
  return out;
}

// ---- serialization ----------------------------------------------------------

inline void write_wire_public(ByteWriter& w, const CessContext& ctx, const WirePublic& pub) {
  w.u32(static_cast<std::uint32_t>(pub.comms.size()));
  w.u8(pub.has_ciphertexts() ? 1 : 0);
  for (std::size_t j = 0; j < pub.comms.size(); ++j) {
    w.u8(pub.retired(j) ? 1 : 0);
    if (!pub.retired(j)) write_commitment(w, *ctx.ck, pub.comms[j]);
  }
  if (!pub.has_ciphertexts()) return;
  for (std::size_t j = 0; j < pub.comms.size(); ++j) {
    if (pub.retired(j)) continue;
    write_ciphertext(w, *ctx.he, pub.cts_value[j]);
    w.u32(static_cast<std::uint32_t>(pub.cts_rand[j].size()));
    for (const auto& ct : pub.cts_rand[j]) write_ciphertext(w, *ctx.he, ct);
  }
}

inline WirePublic read_wire_public(ByteReader& r, const CessContext& ctx) {
  WirePublic pub;
  const auto n = r.u32();
  if (n != ctx.parties()) throw DecodeError("wire public part: party count mismatch");
  const bool with_cts = r.u8() != 0;
  pub.comms.resize(n);
  std::vector<bool> retired(n);
  for (std::size_t j = 0; j < n; ++j) {
    retired[j] = r.u8() != 0;
    if (!retired[j]) pub.comms[j] = read_commitment(r, *ctx.ck);
  }
  if (!with_cts) return pub;
  pub.cts_value.resize(n);
  pub.cts_rand.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (retired[j]) continue;
    pub.cts_value[j] = read_ciphertext(r, *ctx.he);
    const auto width = r.u32();
    if (width != ctx.ck->width()) throw DecodeError("wire public part: randomness width mismatch");
    for (std::uint32_t l = 0; l < width; ++l) pub.cts_rand[j].push_back(read_ciphertext(r, *ctx.he));
  }
  return pub;
}

inline void write_share_state(ByteWriter& w, const ShareState& s) {
  write_ring(w, s.value);
  write_randomness(w, s.rand);
}

inline ShareState read_share_state(ByteReader& r, const CessContext& ctx) {
  ShareState s;
  s.value = read_ring(r, ctx.ring);
  s.rand = read_randomness(r, *ctx.ck);
  return s;
}

inline void write_cess_share(ByteWriter& w, const CessContext& ctx, const CessShare& s) {
  w.u32(static_cast<std::uint32_t>(s.owner));
  write_share_state(w, s.state);
  write_wire_public(w, ctx, *s.pub);
}

inline CessShare read_cess_share(ByteReader& r, const CessContext& ctx) {
  CessShare s;
  s.owner = r.u32();
  if (s.owner >= ctx.parties()) throw DecodeError("share owner out of range");
  s.state = read_share_state(r, ctx);
  s.pub = std::make_shared<const WirePublic>(read_wire_public(r, ctx));
  return s;
}

/// Hashes the evaluation-form limbs as stored; the transform is a bijection,
/// so this binds the same ciphertexts as the coefficient-form wire encoding.
inline Digest digest_ciphertexts(const CessContext& ctx, const WirePublic& pub) {
  ByteWriter w;
  write_he_header(w, *ctx.he);
  auto put = [&w](const Ciphertext& ct) {
    w.u8(static_cast<std::uint8_t>(ct.degree()));
    for (const auto& comp : ct.c) {
      for (const auto& limb : comp.limbs) {
        for (auto x : limb) w.u64(x);
      }
    }
    w.u64(std::bit_cast<u64>(ct.log_sigma));
  };
  for (std::size_t j = 0; j < pub.cts_value.size(); ++j) {
    if (pub.retired(j)) continue;
    w.u32(static_cast<std::uint32_t>(j));
    put(pub.cts_value[j]);
    for (const auto& ct : pub.cts_rand[j]) put(ct);
  }
  return sha256(w.bytes());
}

}  // namespace cessmpc
