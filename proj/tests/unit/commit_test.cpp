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

#include "cessmpc/commit/linked_open.hpp"

namespace cessmpc {
namespace {

class CommitTest : public ::testing::Test {
 protected:
  RingPtr ring = make_ring(RingParams::with_degree(64));
  CommitKeyPtr key = make_commit_key(ring, CommitParams{}, seed_from_u64(77));
  SeedStream rng{seed_from_u64(1234)};

  RingElement msg() { return sample_uniform(ring, rng); }
  Randomness rnd() { return sample_randomness(*key, rng); }
};

TEST_F(CommitTest, ZeroMessageZeroRandomness) {
  auto c = commit(*key, RingElement(ring), Randomness::zero(*key));
  for (const auto& e : c.c1) EXPECT_TRUE(e.is_zero());
  EXPECT_TRUE(c.c2.is_zero());
  EXPECT_EQ(c.norm_budget, 1u);
}

TEST_F(CommitTest, CommitThenOpenAccepts) {
  for (int i = 0; i < 50; ++i) {
    auto m = msg();
    auto r = rnd();
    EXPECT_TRUE(verify_open(*key, commit(*key, m, r), m, r));
  }
}

TEST_F(CommitTest, OversizedRandomnessRejectedAtCommit) {
  auto r = rnd().scaled(2);
  r.r[0].mutable_coeffs()[0] = 2;
  EXPECT_THROW(commit(*key, msg(), r), OversizedRandomness);
}

TEST_F(CommitTest, SameRandomnessDifferentMessages) {
  auto r = rnd();
  auto m1 = msg(), m2 = msg();
  auto c1 = commit(*key, m1, r), c2 = commit(*key, m2, r);
  EXPECT_EQ(c1.c1, c2.c1);
  EXPECT_EQ(c1.c2 - c2.c2, m1 - m2);
  EXPECT_NE(c1.c2, c2.c2);
}

TEST_F(CommitTest, TamperedMessageRejected) {
  auto m = msg();
  auto r = rnd();
  auto c = commit(*key, m, r);
  for (int t = 0; t < 10000; ++t) {
    auto bad = m;
    auto pos = rng.uniform(ring->degree());
    auto delta = 1 + rng.uniform(ring->q() - 1);
    bad.mutable_coeffs()[pos] = ring->modulus().add(bad[pos], delta);
    ASSERT_FALSE(verify_open(*key, c, bad, r));
  }
}

TEST_F(CommitTest, PerturbedOpeningsNeverBind) {
  // Adversarial perturbations of (m, r): m' != m never opens c.
  auto m = msg();
  auto r = rnd();
  auto c = commit(*key, m, r);
  for (int t = 0; t < 10000; ++t) {
    auto bad_m = m;
    auto bad_r = r;
    bad_m.mutable_coeffs()[rng.uniform(ring->degree())] ^= 1 + rng.uniform(7);
    if (bad_m == m) continue;
    auto& coeff = bad_r.r[rng.uniform(key->width())].mutable_coeffs()[rng.uniform(ring->degree())];
    coeff = ring->modulus().reduce_signed(static_cast<i64>(rng.uniform(3)) - 1);
    ASSERT_FALSE(verify_open(*key, c, bad_m, bad_r));
  }
}

TEST_F(CommitTest, RandomnessBeyondBudgetRejected) {
  auto m = msg();
  auto r2 = rnd().scaled(2);
  auto ar = key->apply(r2.r);
  Commitment forged;
  forged.c2 = ar.back() + m;
  ar.pop_back();
  forged.c1 = ar;
  forged.norm_budget = 1;
  forged.key_tag = key->tag();
  if (r2.inf_norm() > 1) {
    EXPECT_FALSE(verify_open(*key, forged, m, r2));
  }
  forged.norm_budget = 2;
  EXPECT_TRUE(verify_open(*key, forged, m, r2));
}

TEST_F(CommitTest, HomomorphicLaws) {
  const auto& mod = ring->modulus();
  for (int t = 0; t < 1000; ++t) {
    auto m1 = msg(), m2 = msg(), k = msg();
    auto r1 = rnd(), r2 = rnd();
    auto a = commit(*key, m1, r1), b = commit(*key, m2, r2);
    ASSERT_TRUE(verify_open(*key, comm_add(a, b), m1 + m2, r1 + r2));
    ASSERT_TRUE(verify_open(*key, comm_add_const(a, k), m1 + k, r1));
    // Scalars stay small enough for direct opens, plus a few centered-negative ones.
    u64 c = rng.uniform(2) ? rng.uniform(8) : mod.value - rng.uniform(8);
    auto sm = comm_scalar_mul(*key, a, c);
    ASSERT_TRUE(verify_open(*key, sm, ring_scalar_mul(m1, c), r1.scaled(c)));
  }
}

TEST_F(CommitTest, AddIdentityAndAssociativity) {
  auto zero = commit(*key, RingElement(ring), Randomness::zero(*key));
  for (int t = 0; t < 100; ++t) {
    auto m1 = msg(), m2 = msg(), m3 = msg();
    auto r1 = rnd(), r2 = rnd(), r3 = rnd();
    auto a = commit(*key, m1, r1), b = commit(*key, m2, r2), c = commit(*key, m3, r3);
    EXPECT_TRUE(verify_open(*key, comm_add(a, zero), m1, r1));
    auto left = comm_add(comm_add(a, b), c);
    auto right = comm_add(a, comm_add(b, c));
    EXPECT_EQ(serialize(*key, left), serialize(*key, right));
    auto k1 = msg(), k2 = msg();
    EXPECT_EQ(comm_add_const(comm_add_const(a, k1), k2), comm_add_const(a, k1 + k2));
  }
}

TEST_F(CommitTest, ScalarEdgeCases) {
  auto m = msg();
  auto r = rnd();
  auto a = commit(*key, m, r);
  EXPECT_EQ(comm_scalar_mul(*key, a, 1), a);
  auto z = comm_scalar_mul(*key, a, 0);
  EXPECT_TRUE(verify_open(*key, z, RingElement(ring), Randomness::zero(*key)));
  EXPECT_EQ(comm_add_const(a, RingElement(ring)), a);
}

TEST_F(CommitTest, PublicRingMultiplier) {
  auto m = msg();
  auto r = rnd();
  auto a = commit(*key, m, r);
  auto k = sample_small(ring, rng, 1);
  auto prod = comm_mul_public(*key, a, k);
  EXPECT_TRUE(verify_open(*key, prod, m * k, r.times(k)));
}

TEST_F(CommitTest, BudgetBoundsHonestRandomness) {
  // Random op sequences: the tracked budget must dominate the true randomness norm.
  for (int trial = 0; trial < 200; ++trial) {
    auto m = msg();
    auto r = rnd();
    auto c = commit(*key, m, r);
    for (int step = 0; step < 8; ++step) {
      switch (rng.uniform(4)) {
        case 0: {
          auto m2 = msg();
          auto r2 = rnd();
          c = comm_add(c, commit(*key, m2, r2));
          m += m2;
          r += r2;
          break;
        }
        case 1: {
          auto k = msg();
          c = comm_add_const(c, k);
          m += k;
          break;
        }
        case 2: {
          u64 s = rng.uniform(1 << 20);
          if (rng.bit()) s = ring->q() - s;
          c = comm_scalar_mul(*key, c, s);
          m.scale(s);
          r = r.scaled(s);
          break;
        }
        default: {
          auto k = sample_small(ring, rng, 1);
          c = comm_mul_public(*key, c, k);
          m *= k;
          r = r.times(k);
          break;
        }
      }
      ASSERT_LE(r.inf_norm(), c.norm_budget);
      ASSERT_TRUE(verify_open(*key, c, m, r));
    }
  }
}

TEST_F(CommitTest, KeyMismatchThrows) {
  auto other = make_commit_key(ring, CommitParams{}, seed_from_u64(78));
  auto a = commit(*key, msg(), rnd());
  auto b = commit(*other, msg(), sample_randomness(*other, rng));
  EXPECT_THROW(comm_add(a, b), ParamMismatch);
}

TEST_F(CommitTest, DeterministicAndSerializable) {
  auto key2 = make_commit_key(ring, CommitParams{}, seed_from_u64(77));
  SeedStream r1(seed_from_u64(5)), r2(seed_from_u64(5));
  auto m1 = sample_uniform(ring, r1);
  auto m2 = sample_uniform(ring, r2);
  auto c1 = commit(*key, m1, sample_randomness(*key, r1));
  auto c2 = commit(*key2, m2, sample_randomness(*key2, r2));
  auto b1 = serialize(*key, c1);
  EXPECT_EQ(b1, serialize(*key2, c2));
  EXPECT_EQ(b1.size(), commitment_wire_size(*key));
  ByteReader br(b1);
  EXPECT_EQ(read_commitment(br, *key), c1);
  auto other_ring = make_commit_key(make_ring(RingParams::with_degree(32)), CommitParams{}, seed_from_u64(77));
  ByteReader br2(b1);
  EXPECT_THROW(read_commitment(br2, *other_ring), DecodeError);
}

TEST_F(CommitTest, LinkedOpenCompleteness) {
  for (int t = 0; t < 50; ++t) {
    auto m = msg();
    auto r = rnd();
    auto c = commit(*key, m, r);
    auto lo = linked_open_prove(*key, c, m, r, seed_from_u64(t));
    EXPECT_TRUE(linked_open_verify(*key, c, lo));
    EXPECT_LE(Randomness{lo.z}.inf_norm(), detail::response_bounds(*key, c.norm_budget).response_bound);
  }
}

TEST_F(CommitTest, LinkedOpenAfterLargeScalars) {
  // Beaver-style public scalars push the budget past the masking range.
  auto m = msg();
  auto r = rnd();
  auto c = comm_scalar_mul(*key, commit(*key, m, r), 123456789);
  m.scale(123456789);
  r = r.scaled(123456789);
  auto m2 = msg();
  auto r2 = rnd();
  c = comm_add(c, commit(*key, m2, r2));
  m += m2;
  r += r2;
  ASSERT_TRUE(verify_open(*key, c, m, r));
  auto lo = linked_open_prove(*key, c, m, r, seed_from_u64(9));
  EXPECT_TRUE(linked_open_verify(*key, c, lo));
  EXPECT_EQ(lo.fresh_commitment.norm_budget, key->base_bound());
}

TEST_F(CommitTest, LinkedOpenRejectsInvalidInput) {
  auto m = msg();
  auto r = rnd();
  auto c = commit(*key, m, r);
  EXPECT_THROW(linked_open_prove(*key, c, msg(), r, seed_from_u64(1)), InvalidOpening);
}

TEST_F(CommitTest, LinkedOpenWrongMessageRejected) {
  for (int t = 0; t < 1000; ++t) {
    auto m = msg();
    auto r = rnd();
    auto c = commit(*key, m, r);
    auto claimed = msg();
    if (t % 2 == 0) {
      // Swap in a consistent fresh commitment to the claimed message after proving.
      auto lo = linked_open_prove(*key, c, m, r, seed_from_u64(t));
      lo.message = claimed;
      lo.fresh_commitment = commit(*key, claimed, lo.fresh_randomness);
      ASSERT_FALSE(linked_open_verify(*key, c, lo));
    } else {
      // Cheating prover runs the protocol as if c committed to the claimed message.
      LinkedOpening lo;
      lo.message = claimed;
      lo.fresh_randomness = rnd();
      lo.fresh_commitment = commit(*key, claimed, lo.fresh_randomness);
      auto d = r - lo.fresh_randomness;
      Randomness y;
      for (std::size_t i = 0; i < key->width(); ++i) y.r.push_back(sample_small(ring, rng, 4));
      lo.w = key->apply(y.r);
      auto chal = detail::challenge_from_digest(
          ring, detail::linked_challenge_digest(*key, c, lo.fresh_commitment, lo.w));
      lo.z = (y + d.times(chal)).r;
      ASSERT_FALSE(linked_open_verify(*key, c, lo));
    }
  }
}

TEST_F(CommitTest, LinkedOpenMutatedBytesRejected) {
  auto m = msg();
  auto r = rnd();
  auto c = commit(*key, m, r);
  auto lo = linked_open_prove(*key, c, m, r, seed_from_u64(3));
  auto bytes = serialize(*key, lo);
  {
    ByteReader br(bytes);
    ASSERT_TRUE(linked_open_verify(*key, c, read_linked_opening(br, *key)));
  }
  for (int t = 0; t < 1000; ++t) {
    auto bad = bytes;
    auto pos = rng.uniform(bad.size());
    bad[pos] ^= static_cast<std::uint8_t>(1 + rng.uniform(255));
    bool accepted = false;
    try {
      ByteReader br(bad);
      auto parsed = read_linked_opening(br, *key);
      br.expect_done();
      accepted = linked_open_verify(*key, c, parsed);
    } catch (const DecodeError&) {
    }
    ASSERT_FALSE(accepted) << "byte " << pos;
  }
}

TEST(ChallengeTest, WeightAndTernary) {
  for (std::size_t n : {4u, 64u, 1024u}) {
    auto ring = n == 4 ? make_ring(RingParams::toy()) : make_ring(RingParams::with_degree(n));
    auto c = detail::challenge_from_digest(ring, Sha256().update("x").finish());
    std::size_t weight = 0;
    for (auto v : c.coeffs()) {
      if (v == 0) continue;
      ++weight;
      EXPECT_TRUE(v == 1 || v == ring->q() - 1);
    }
    EXPECT_EQ(weight, std::min<std::size_t>(32, n / 2));
    EXPECT_EQ(c, detail::challenge_from_digest(ring, Sha256().update("x").finish()));
  }
}

}  // namespace
}  // namespace cessmpc
