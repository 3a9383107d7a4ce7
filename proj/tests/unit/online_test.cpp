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

const char* kSample = R"(WIRES 7 INPUTS 3 OUTPUTS 2
INPUT 0
INPUT 1
INPUT 2
ADD 3 0 1
MUL 4 3 2
SQUARE 5 4
ADD_CONST 6 5 5
OUTPUT 4
OUTPUT 6
)";

SessionParams small_params(std::size_t n, u64 seed = 1) {
  SessionParams p;
  p.degree = 64;
  p.modulus = kP;
  p.servers = n;
  p.master = seed_from_u64(seed);
  return p;
}

std::vector<RingElement> slot_inputs(const RingPtr& ring, std::size_t count, u64 base) {
  std::vector<RingElement> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<u64> slots(ring->degree());
    for (std::size_t s = 0; s < slots.size(); ++s) slots[s] = (base + 7 * i + s) % 1000;
    out.push_back(slot_encode(ring, slots));
  }
  return out;
}

TEST(Online, HonestRunMatchesPlainEvaluation) {
  const auto params = small_params(3);
  const auto circuit = parse_circuit(kSample, kP);
  const auto ring = make_ring(RingParams{params.degree, params.modulus, 0});
  const auto inputs = slot_inputs(ring, 3, 11);
  const auto run = run_protocol(params, circuit, inputs);
  ASSERT_TRUE(run.output.has_value());
  EXPECT_TRUE(run.output->ok);
  EXPECT_TRUE(run.output->cheaters.empty());
  EXPECT_TRUE(run.sttp_consistent);
  EXPECT_EQ(run.output->values, eval_plain(circuit, inputs));
  EXPECT_EQ(run.stats.recoveries, 0u);
}

struct Scenario {
  std::size_t servers;
  std::vector<AdversarySpec> adversaries;
};

ProtocolRun run_scenario(const Scenario& sc, u64 seed = 1) {
  const auto params = small_params(sc.servers, seed);
  const auto circuit = parse_circuit(kSample, kP);
  const auto ring = make_ring(RingParams{params.degree, params.modulus, 0});
  ProtocolOptions opts;
  opts.adversaries = sc.adversaries;
  return run_protocol(params, circuit, slot_inputs(ring, 3, seed), opts);
}

void expect_recovered(const ProtocolRun& run, std::vector<std::size_t> cheaters, u64 seed = 1) {
  const auto circuit = parse_circuit(kSample, kP);
  const auto ring = make_ring(RingParams{64, kP, 0});
  ASSERT_TRUE(run.output.has_value());
  EXPECT_TRUE(run.output->ok);
  EXPECT_EQ(run.cheaters, cheaters);
  EXPECT_EQ(run.output->cheaters, std::vector<std::uint32_t>(cheaters.begin(), cheaters.end()));
  EXPECT_EQ(run.output->values, eval_plain(circuit, slot_inputs(ring, 3, seed)));
  EXPECT_TRUE(run.sttp_consistent);
  for (bool f : run.adversary_fired) EXPECT_TRUE(f);
  const auto rep = audit(run.transcript, circuit);
  EXPECT_TRUE(rep.complete) << rep.error;
  EXPECT_TRUE(rep.signatures_ok);
  EXPECT_EQ(rep.cheat_list, run.cheaters);
}

TEST(Online, WrongOpenIsRecovered) {
  const auto run = run_scenario({3, {{1, Behaviour::WrongOpen, 4, 3, 0}}});
  expect_recovered(run, {1});
  EXPECT_EQ(run.stats.recoveries, 1u);
  EXPECT_EQ(run.stats.reopened_stages, 1u);
}

TEST(Online, WrongRandomnessIsRecovered) {
  expect_recovered(run_scenario({3, {{0, Behaviour::WrongRandomness, std::nullopt, 1, 0}}}), {0});
}

TEST(Online, SilentGateIsRecovered) {
  expect_recovered(run_scenario({3, {{2, Behaviour::Silent, 5, 1, 0}}}), {2});
}

TEST(Online, RefusedOutputIsRecovered) {
  expect_recovered(run_scenario({3, {{1, Behaviour::RefuseOutput, std::nullopt, 1, 0}}}), {1});
}

TEST(Online, FalseAccuserIsFlagged) {
  const auto run = run_scenario({3, {{2, Behaviour::FalseAccusation, std::nullopt, 1, 0}}});
  expect_recovered(run, {2});
}

TEST(Online, WrongReportIsFlagged) {
  const auto run =
      run_scenario({4, {{1, Behaviour::WrongOpen, std::nullopt, 1, 0}, {3, Behaviour::WrongReport, std::nullopt, 9, 0}}});
  expect_recovered(run, {1, 3});
}

TEST(Online, TwoCheatersOfFourStillComputes) {
  expect_recovered(
      run_scenario({4, {{0, Behaviour::WrongOpen, 4, 1, 0}, {2, Behaviour::RefuseOutput, std::nullopt, 1, 0}}}), {0, 2});
}

TEST(Online, TwoCheatersOfThreeAbort) {
  const auto run =
      run_scenario({3, {{0, Behaviour::WrongOpen, 4, 1, 0}, {2, Behaviour::Silent, 5, 1, 0}}});
  ASSERT_TRUE(run.output.has_value());
  EXPECT_FALSE(run.output->ok);
  EXPECT_TRUE(run.output->values.empty());
  EXPECT_EQ(run.cheaters, (std::vector<std::size_t>{0, 2}));
  const auto rep = audit(run.transcript, parse_circuit(kSample, kP));
  EXPECT_EQ(rep.status(), "abort");
  EXPECT_EQ(rep.cheat_list, run.cheaters);
}

TEST(Online, SameSeedSameTranscript) {
  const Scenario sc{3, {{1, Behaviour::WrongOpen, std::nullopt, 2, 0}}};
  EXPECT_EQ(run_scenario(sc, 5).transcript.encode(), run_scenario(sc, 5).transcript.encode());
}

TEST(Online, HonestWrapperIsIdentity) {
  const auto plain = run_scenario({3, {}}, 3);
  const auto wrapped = run_scenario({3, {{1, Behaviour::Honest, std::nullopt, 1, 0}}}, 3);
  EXPECT_EQ(plain.transcript.encode(), wrapped.transcript.encode());
}

}  // namespace
}  // namespace cessmpc
