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

#include <gtest/gtest.h>

#include "cessmpc/cess/cess.hpp"

namespace cessmpc {
namespace {

struct World {
  CessContextPtr ctx;
  std::vector<KeyPair> keys;
};

World make_world(std::size_t n, std::size_t degree = 64) {
  auto ring = make_ring(RingParams::with_degree(degree));
  auto ctx = std::make_shared<CessContext>();
  ctx->ring = ring;
  ctx->ck = make_commit_key(ring, CommitParams{}, seed_from_u64(7));
  ctx->he = HeContext::create(ring, HeParams::for_ring(*ring, n));
  World w;
  for (std::size_t j = 0; j < n; ++j) {
    w.keys.push_back(keygen(*ctx->he, derive_seed(seed_from_u64(9), "server", j)));
    ctx->server_pks.push_back(w.keys.back().pk);
  }
  w.ctx = ctx;
  return w;
}

// Every live slot opens to the owner's state and decrypts under the owner's key.
void expect_consistent(const World& w, std::span<const CessShare> shares) {
  const auto& ctx = *w.ctx;
  for (const auto& s : shares) {
    const auto& pub = *s.pub;
    ASSERT_FALSE(pub.retired(s.owner));
    EXPECT_TRUE(verify_open(*ctx.ck, pub.comms[s.owner], s.state.value, s.state.rand)) << "owner " << s.owner;
    ASSERT_TRUE(pub.has_ciphertexts());
    const auto& sk = w.keys[s.owner].sk;
    EXPECT_EQ(decrypt(*ctx.he, sk, pub.cts_value[s.owner]), s.state.value);
    ASSERT_EQ(pub.cts_rand[s.owner].size(), s.state.rand.r.size());
    for (std::size_t l = 0; l < s.state.rand.r.size(); ++l) {
      EXPECT_EQ(decrypt(*ctx.he, sk, pub.cts_rand[s.owner][l]), s.state.rand.r[l]);
    }
  }
}

RingElement value_of(std::span<const CessShare> shares) {
  std::vector<RingElement> parts;
  for (const auto& s : shares) parts.push_back(s.state.value);
  return reconstruct(parts);
}

std::vector<CessShare> input(const World& w, const RingElement& x, SeedStream& rng) {
  std::vector<RingElement> mask;
  for (std::size_t j = 0; j < w.ctx->parties(); ++j) mask.push_back(sample_uniform(w.ctx->ring, rng));
  auto sharing = client_input_share(*w.ctx, x, mask, rng);
  std::vector<CessShare> out;
  for (std::size_t j = 0; j < w.ctx->parties(); ++j) out.push_back(sharing.for_server(j));
  return out;
}

TEST(AdditiveSharing, ToyExample) {
  auto ring = make_ring(RingParams::toy());
  std::vector<RingElement> shares = {RingElement::constant(ring, 3), RingElement::constant(ring, 7),
                                     RingElement::constant(ring, 12)};
  EXPECT_EQ(reconstruct(shares), RingElement::constant(ring, 5));
}

TEST(AdditiveSharing, RoundTrip) {
  auto ring = make_ring(RingParams::with_degree(64));
  SeedStream rng(seed_from_u64(3));
  for (std::size_t n = 2; n <= 6; ++n) {
    for (int t = 0; t < 100; ++t) {
      auto x = sample_uniform(ring, rng);
      auto shares = share_additive(ring, x, n, rng);
      ASSERT_EQ(shares.size(), n);
      EXPECT_EQ(reconstruct(shares), x);
    }
  }
  EXPECT_THROW(share_additive(ring, RingElement(ring), 1, rng), std::invalid_argument);
}

TEST(AdditiveSharing, AnyStrictSubsetLooksUniform) {
  // Coefficient 0 of share 0 over many sharings of the same secret.
  auto ring = make_ring(RingParams::toy());
  SeedStream rng(seed_from_u64(4));
  const auto x = RingElement::constant(ring, 11);
  std::vector<double> counts(17, 0.0);
  const int trials = 17000;
  for (int t = 0; t < trials; ++t) counts[share_additive(ring, x, 3, rng)[1][0]] += 1;
  double chi = 0;
  for (double c : counts) chi += (c - 1000.0) * (c - 1000.0) / 1000.0;
  EXPECT_LT(chi, 39.25);  // df = 16, alpha = 0.001
}

TEST(CessInput, SharesReconstructAndOpen) {
  auto w = make_world(3);
  SeedStream rng(seed_from_u64(5));
  for (int t = 0; t < 10; ++t) {
    auto x = sample_uniform(w.ctx->ring, rng);
    auto shares = input(w, x, rng);
    EXPECT_EQ(value_of(shares), x);
    expect_consistent(w, shares);
  }
}

TEST(CessInput, MaskFixesLaterShares) {
  auto w = make_world(4);
  SeedStream rng(seed_from_u64(6));
  std::vector<RingElement> mask;
  for (int j = 0; j < 4; ++j) mask.push_back(sample_uniform(w.ctx->ring, rng));
  auto x = sample_uniform(w.ctx->ring, rng);
  auto sharing = client_input_share(*w.ctx, x, mask, rng);
  for (std::size_t j = 1; j < 4; ++j) EXPECT_EQ(sharing.shares[j].value, mask[j]);
  EXPECT_EQ(sharing.shares[0].value, x - reconstruct(mask) + mask[0]);
  EXPECT_THROW(client_input_share(*w.ctx, x, std::span(mask).first(2), rng), std::invalid_argument);
}

TEST(CessInput, PublicPartIdenticalAcrossServers) {
  auto w = make_world(3);
  SeedStream rng(seed_from_u64(8));
  auto shares = input(w, sample_uniform(w.ctx->ring, rng), rng);
  ByteWriter first;
  write_wire_public(first, *w.ctx, *shares[0].pub);
  for (const auto& s : shares) {
    ByteWriter other;
    write_wire_public(other, *w.ctx, *s.pub);
    EXPECT_EQ(first.bytes(), other.bytes());
  }
}

TEST(CessLinear, OpsPreserveConsistency) {
  auto w = make_world(3);
  const auto& ctx = *w.ctx;
  SeedStream rng(seed_from_u64(10));
  for (int t = 0; t < 5; ++t) {
    auto x = sample_uniform(ctx.ring, rng);
    auto y = sample_uniform(ctx.ring, rng);
    auto c = sample_uniform(ctx.ring, rng);
    auto e = sample_uniform(ctx.ring, rng);
    const u64 k = rng.uniform(ctx.ring->q());
    auto xs = input(w, x, rng);
    auto ys = input(w, y, rng);

    auto apply = [&](LinearOp op, const LinearOperand& operand, const std::vector<CessShare>& a) {
      std::vector<CessShare> out;
      for (const auto& s : a) out.push_back(cess_linear_update(ctx, s, op, operand, 0));
      return out;
    };
    auto with_other = [&](LinearOp op) {
      std::vector<CessShare> out;
      for (std::size_t j = 0; j < xs.size(); ++j) {
        LinearOperand operand;
        operand.other = &ys[j];
        out.push_back(cess_linear_update(ctx, xs[j], op, operand));
      }
      return out;
    };

    auto sum = with_other(LinearOp::Add);
    EXPECT_EQ(value_of(sum), x + y);
    expect_consistent(w, sum);

    auto diff = with_other(LinearOp::Sub);
    EXPECT_EQ(value_of(diff), x - y);
    expect_consistent(w, diff);

    LinearOperand cop;
    cop.element = c;
    auto shifted = apply(LinearOp::AddConst, cop, xs);
    EXPECT_EQ(value_of(shifted), x + c);
    expect_consistent(w, shifted);
    for (std::size_t j = 1; j < 3; ++j) EXPECT_EQ(shifted[j].state, xs[j].state);

    LinearOperand kop;
    kop.scalar = k;
    auto scaled = apply(LinearOp::ScalarMul, kop, xs);
    EXPECT_EQ(value_of(scaled), ring_scalar_mul(x, k));
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_TRUE(verify_open(*ctx.ck, scaled[j].pub->comms[j], scaled[j].state.value, scaled[j].state.rand));
      EXPECT_EQ(decrypt(*ctx.he, w.keys[j].sk, scaled[j].pub->cts_value[j]), scaled[j].state.value);
    }

    LinearOperand eop;
    eop.element = e;
    auto prod = apply(LinearOp::MulPublic, eop, xs);
    EXPECT_EQ(value_of(prod), x * e);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_TRUE(verify_open(*ctx.ck, prod[j].pub->comms[j], prod[j].state.value, prod[j].state.rand));
      EXPECT_EQ(decrypt(*ctx.he, w.keys[j].sk, prod[j].pub->cts_value[j]), prod[j].state.value);
    }
  }
}

TEST(CessLinear, SmallConstantsKeepTightBudgets) {
  auto w = make_world(3);
  const auto& ctx = *w.ctx;
  SeedStream rng(seed_from_u64(11));
  auto xs = input(w, sample_uniform(ctx.ring, rng), rng);
  LinearOperand kop;
  kop.scalar = 3;
  std::vector<CessShare> out;
  for (const auto& s : xs) out.push_back(cess_linear_update(ctx, s, LinearOp::ScalarMul, kop));
  expect_consistent(w, out);
  EXPECT_EQ(out[0].pub->comms[0].norm_budget, 3 * ctx.ck->base_bound());
}

TEST(CessLinear, RetiredSlotsAreSkipped) {
  auto w = make_world(3);
  const auto& ctx = *w.ctx;
  SeedStream rng(seed_from_u64(12));
  auto xs = input(w, sample_uniform(ctx.ring, rng), rng);
  auto ys = input(w, sample_uniform(ctx.ring, rng), rng);
  WirePublic a = *xs[0].pub;
  WirePublic b = *ys[0].pub;
  a.retire(2);
  b.retire(2);
  auto sum = pub_add(ctx, a, b);
  EXPECT_TRUE(sum.retired(2));
  EXPECT_FALSE(sum.retired(0));
  EXPECT_EQ(sum.comms[1], comm_add(xs[1].pub->comms[1], ys[1].pub->comms[1]));
  EXPECT_THROW(pub_add_const(ctx, a, RingElement::constant(ctx.ring, 1), 2), ParamMismatch);
  auto shifted = pub_add_const(ctx, a, RingElement::constant(ctx.ring, 1), 0);
  EXPECT_EQ(shifted.comms[1], a.comms[1]);
}

TEST(CessLinear, ShapeMismatchThrows) {
  auto w = make_world(3);
  SeedStream rng(seed_from_u64(13));
  auto xs = input(w, sample_uniform(w.ctx->ring, rng), rng);
  auto thin = xs[0].pub->commitments_only();
  EXPECT_THROW(pub_add(*w.ctx, *xs[0].pub, thin), ParamMismatch);
  LinearOperand operand;
  operand.other = &xs[1];
  EXPECT_THROW(cess_linear_update(*w.ctx, xs[0], LinearOp::Add, operand), ParamMismatch);
}

TEST(CessWire, RoundTrip) {
  auto w = make_world(3);
  SeedStream rng(seed_from_u64(14));
  auto xs = input(w, sample_uniform(w.ctx->ring, rng), rng);
  for (const auto& s : xs) {
    ByteWriter out;
    write_cess_share(out, *w.ctx, s);
    ByteReader in(out.bytes());
    auto back = read_cess_share(in, *w.ctx);
    in.expect_done();
    EXPECT_EQ(back.owner, s.owner);
    EXPECT_EQ(back.state, s.state);
    EXPECT_EQ(back.pub->comms, s.pub->comms);
    EXPECT_EQ(back.pub->cts_value, s.pub->cts_value);
    EXPECT_EQ(back.pub->cts_rand, s.pub->cts_rand);
  }
  WirePublic retired = *xs[0].pub;
  retired.retire(1);
  ByteWriter out;
  write_wire_public(out, *w.ctx, retired);
  ByteReader in(out.bytes());
  auto back = read_wire_public(in, *w.ctx);
  EXPECT_TRUE(back.retired(1));
  EXPECT_EQ(back.comms[2], retired.comms[2]);

  auto bytes = out.bytes();
  bytes.resize(bytes.size() - 5);
  ByteReader cut(bytes);
  EXPECT_THROW(read_wire_public(cut, *w.ctx), DecodeError);
}

}  // namespace
}  // namespace cessmpc
