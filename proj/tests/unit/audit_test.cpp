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

#include "cessmpc/audit/audit.hpp"
#include "cessmpc/online/protocol.hpp"

namespace cessmpc {
namespace {

constexpr u64 kP = 2013265921;

const char* kCircuit = R"(WIRES 6 INPUTS 2 OUTPUTS 1
INPUT 0
INPUT 1
MUL 2 0 1
MUL_CONST 3 2 3
SQUARE 4 3
ADD 5 4 0
OUTPUT 5
)";

class AuditTest : public ::testing::Test {
 protected:
  ProtocolRun run(std::vector<AdversarySpec> adv, std::size_t n = 3) {
    SessionParams p;
    p.degree = 64;
    p.servers = n;
    p.master = seed_from_u64(31);
    ProtocolOptions o;
    o.adversaries = std::move(adv);
    const auto ring = make_ring(RingParams{64, kP, 0});
    std::vector<u64> a(64), b(64);
    for (std::size_t i = 0; i < 64; ++i) {
      a[i] = i;
      b[i] = 100 + i;
    }
    return run_protocol(p, circuit(), {slot_encode(ring, a), slot_encode(ring, b)}, o);
  }
  static Circuit circuit() { return parse_circuit(kCircuit, kP); }
};

TEST_F(AuditTest, HonestTranscriptHasEmptyCheatList) {
  const auto r = run({});
  const auto rep = audit(r.transcript, circuit());
  EXPECT_EQ(rep.status(), "ok");
  EXPECT_TRUE(rep.cheat_list.empty());
  EXPECT_TRUE(rep.sttp_consistent);
  for (const auto& v : rep.verdicts) EXPECT_TRUE(v.accepted) << v.seq << " " << v.reason;
  ASSERT_TRUE(rep.outcome.has_value());
  EXPECT_EQ(*rep.outcome, *r.output);
}

TEST_F(AuditTest, OneCheaterMatchesOnline) {
  const auto r = run({{1, Behaviour::WrongOpen, std::nullopt, 5, 0}});
  const auto rep = audit(r.transcript, circuit());
  EXPECT_EQ(rep.status(), "ok");
  EXPECT_EQ(rep.cheat_list, std::vector<std::size_t>{1});
  EXPECT_EQ(rep.cheat_list, r.cheaters);
  // the cheater's OPEN is rejected, everything else stands
  std::size_t rejected = 0;
  for (const auto& v : rep.verdicts) {
    if (!v.accepted) {
      ++rejected;
      EXPECT_EQ(v.author, 1u);
      EXPECT_EQ(v.kind, EntryKind::Open);
    }
  }
  EXPECT_EQ(rejected, 1u);
}

TEST_F(AuditTest, TwoAuditorsAgree) {
  const auto r = run({{2, Behaviour::RefuseOutput, std::nullopt, 1, 0}});
  EXPECT_EQ(audit_json(audit(r.transcript, circuit())).dump(), audit_json(audit(r.transcript, circuit())).dump());
}

TEST_F(AuditTest, TruncatedTranscriptIsIncomplete) {
  auto r = run({{0, Behaviour::WrongOpen, std::nullopt, 5, 0}});
  auto t = r.transcript;
  // keep everything up to the first key release
  auto it = std::find_if(t.entries.begin(), t.entries.end(), [](const Message& m) { return m.kind == EntryKind::KeyRelease; });
  ASSERT_NE(it, t.entries.end());
  t.entries.erase(it + 1, t.entries.end());
  const auto rep = audit(t, circuit());
  EXPECT_EQ(rep.status(), "incomplete");
  EXPECT_EQ(rep.cheat_list, std::vector<std::size_t>{0});
}

TEST_F(AuditTest, AlteredOpenRejected) {
  auto r = run({});
  auto& t = r.transcript;
  auto it = std::find_if(t.entries.begin(), t.entries.end(), [](const Message& m) { return m.kind == EntryKind::Open; });
  ASSERT_NE(it, t.entries.end());
  it->payload.back() ^= 1;
  const auto rep = audit(t, circuit());
  EXPECT_FALSE(rep.signatures_ok);
  EXPECT_FALSE(rep.verdicts[it->seq].accepted);
  EXPECT_EQ(rep.verdicts[it->seq].reason, "bad signature");
}

TEST_F(AuditTest, ResignedTamperedOpenFlagsTheAuthor) {
  // The transcript records what the board accepted, so a validly signed bad
  // opening must be caught by the commitment check rather than the signature.
  SessionParams p;
  p.degree = 64;
  p.servers = 3;
  p.master = seed_from_u64(31);
  const auto session = make_session(p);
  auto r = run({});
  auto& t = r.transcript;
  auto it = std::find_if(t.entries.begin(), t.entries.end(),
                         [](const Message& m) { return m.kind == EntryKind::Open && m.author == 2; });
  ASSERT_NE(it, t.entries.end());
  auto batch = decode_item_batch(it->payload);
  auto m = decode_masked_open(*session.ctx, batch.items[0]);
  m.delta.value += RingElement::constant(session.ctx->ring, 1);
  batch.items[0] = encode_masked_open(m);
  const auto seq = it->seq;
  *it = sign_submission(session.signing_key(2), 2, it->epoch, {EntryKind::Open, kBroadcast, encode_item_batch(batch)});
  it->seq = seq;
  const auto rep = audit(t, circuit());
  EXPECT_TRUE(rep.signatures_ok);
  EXPECT_FALSE(rep.verdicts[seq].accepted);
  // the rest of the transcript no longer follows the protocol
  EXPECT_FALSE(rep.complete && rep.cheat_list.empty());
}

TEST_F(AuditTest, WrongCircuitDetected) {
  const auto r = run({});
  const auto other = parse_circuit("WIRES 3 INPUTS 2 OUTPUTS 1\nINPUT 0\nINPUT 1\nMUL 2 0 1\nOUTPUT 2\n", kP);
  const auto rep = audit(r.transcript, other);
  EXPECT_FALSE(rep.circuit_matches);
  EXPECT_EQ(rep.status(), "incomplete");
}

TEST_F(AuditTest, KeyReleaseWithoutAccusationRejected) {
  SessionParams p;
  p.degree = 64;
  p.servers = 3;
  p.master = seed_from_u64(31);
  const auto session = make_session(p);
  auto r = run({});
  auto& t = r.transcript;
  // splice a key release into the first open round
  auto it = std::find_if(t.entries.begin(), t.entries.end(), [](const Message& m) { return m.kind == EntryKind::Open; });
  ASSERT_NE(it, t.entries.end());
  KeyRelease kr{1, FlagReason::BadOpening, session.escrow().key(1)};
  auto rogue = sign_submission(session.signing_key(kSttpId), kSttpId, it->epoch,
                               {EntryKind::KeyRelease, kBroadcast, encode_key_release(*session.ctx->he, kr)});
  t.entries.insert(it + 1, rogue);
  for (std::size_t i = 0; i < t.entries.size(); ++i) t.entries[i].seq = i;
  const auto rep = audit(t, circuit());
  bool found = false;
  for (const auto& v : rep.verdicts) {
    if (v.kind == EntryKind::KeyRelease) {
      found = true;
      EXPECT_FALSE(v.accepted);
    }
  }
  EXPECT_TRUE(found);
  EXPECT_TRUE(rep.cheat_list.empty());
}

}  // namespace
}  // namespace cessmpc
