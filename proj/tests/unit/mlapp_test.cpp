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

#include <cmath>
#include <set>
#include <sstream>

#include "cessmpc/mlapp/bench.hpp"

namespace cessmpc::ml {
namespace {

constexpr u64 kP = 2013265921;
const std::string kDataDir = CESSMPC_DATA_DIR;

MpcConfig small_config(std::size_t n = 3, u64 seed = 1) {
  MpcConfig c;
  c.session.degree = 64;
  c.session.modulus = kP;
  c.session.servers = n;
  c.session.master = seed_from_u64(seed);
  return c;
}

// ---- datasets -------------------------------------------------------------------

TEST(Dataset, FixtureShapes) {
  const auto iris = load_csv(kDataDir + "/iris_binary.csv", 4);
  EXPECT_EQ(iris.rows(), 100u);
  EXPECT_EQ(iris.dims(), 4u);
  const auto bc = load_csv(kDataDir + "/breast_cancer.csv", 30);
  EXPECT_EQ(bc.rows(), 569u);
  EXPECT_EQ(bc.dims(), 30u);
}

TEST(Dataset, WriteReadRoundTrip) {
  const auto bc = load_csv(kDataDir + "/breast_cancer.csv");
  std::stringstream buf;
  write_csv(buf, bc);
  const auto back = parse_csv(buf);
  EXPECT_EQ(back.features, bc.features);
  EXPECT_EQ(back.x, bc.x);
  EXPECT_EQ(back.y, bc.y);
}

TEST(Dataset, RejectsMalformedInput) {
  std::istringstream short_row("a,b,label\n1,2,0\n3,1\n");
  EXPECT_THROW(parse_csv(short_row), DataError);
  std::istringstream bad_number("a,label\nx,1\n");
  EXPECT_THROW(parse_csv(bad_number), DataError);
  std::istringstream bad_label("a,label\n1,2\n");
  EXPECT_THROW(parse_csv(bad_label), DataError);
  std::istringstream arity("a,b,label\n1,2,0\n");
  EXPECT_THROW(parse_csv(arity, 3), DataError);
}

TEST(Dataset, IrisSplitIsThirtyAndTwentyPerClass) {
  const auto iris = load_csv(kDataDir + "/iris_binary.csv", 4);
  const auto s = per_class_split(iris, 30, 20);
  ASSERT_EQ(s.train.size(), 60u);
  ASSERT_EQ(s.test.size(), 40u);
  for (int cls : {0, 1}) {
    std::size_t train = 0, test = 0;
    for (auto i : s.train) train += iris.y[i] == cls;
    for (auto i : s.test) test += iris.y[i] == cls;
    EXPECT_EQ(train, 30u);
    EXPECT_EQ(test, 20u);
  }
}

TEST(Dataset, ShuffledSplitIsDisjointAndSeeded) {
  const auto bc = load_csv(kDataDir + "/breast_cancer.csv", 30);
  const auto a = shuffled_split(bc, 0.8, 3);
  const auto b = shuffled_split(bc, 0.8, 3);
  const auto c = shuffled_split(bc, 0.8, 4);
  EXPECT_EQ(a.train, b.train);
  EXPECT_NE(a.train, c.train);
  EXPECT_EQ(a.train.size(), 455u);
  EXPECT_EQ(a.test.size(), 114u);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all.size(), 569u);
}

// ---- training and accuracy ----------------------------------------------------------

TEST(Logreg, SeparableToySetIsFit) {
  Dataset toy;
  toy.features = {"a", "b"};
  toy.x = {{0, 0}, {1, 1}};
  toy.y = {0, 1};
  const auto m = train_logreg(toy);
  EXPECT_EQ(accuracy(float_predictions(m, toy.x), toy.y), 1.0);
}

TEST(Logreg, IrisPlaintextAccuracyIsPerfect) {
  const auto lc = iris_case(kDataDir);
  EXPECT_EQ(accuracy(float_predictions(lc.model, lc.test.x), lc.test.y), 1.0);
}

TEST(Logreg, TrainingIsDeterministic) {
  const auto a = iris_case(kDataDir), b = iris_case(kDataDir);
  EXPECT_EQ(a.model.w, b.model.w);
  EXPECT_EQ(a.model.b, b.model.b);
}

TEST(Logreg, EmptyTrainingSplitIsRejected) {
  Dataset empty;
  empty.features = {"a"};
  EXPECT_THROW(train_logreg(empty), DataError);
}

TEST(Accuracy, Basics) {
  EXPECT_EQ(accuracy({1, 0, 1, 0}, {1, 0, 1, 0}), 1.0);
  EXPECT_EQ(accuracy({1, 0, 1, 0}, {0, 1, 0, 1}), 0.0);
  EXPECT_EQ(accuracy({1, 1, 1, 1}, {1, 1, 0, 0}), 0.5);
  EXPECT_THROW(accuracy({1}, {1, 0}), DataError);
}

// ---- fixed point -------------------------------------------------------------------

TEST(FixedPoint, ExactValues) {
  const FixedPointCodec codec;
  EXPECT_EQ(codec.encode(0), 0u);
  EXPECT_EQ(codec.decode(codec.encode(1.5), 1), 1.5);
  EXPECT_EQ(codec.decode(codec.encode(-1.5), 1), -1.5);
  EXPECT_EQ(codec.encode(-1.0 / 256), kP - 1);
}

TEST(FixedPoint, RoundingBound) {
  const FixedPointCodec codec;
  SeedStream rng(seed_from_u64(5));
  for (int i = 0; i < 10000; ++i) {
    const double x = (static_cast<double>(rng.uniform(2000001)) - 1000000.0) / 997.0;
    EXPECT_LE(std::fabs(codec.decode(codec.encode(x), 1) - x), 0.5 / 256 + 1e-12);
  }
}

TEST(FixedPoint, OverflowIsRejected) {
  const FixedPointCodec codec;
  EXPECT_THROW(codec.encode(1e7), FixedPointOverflow);
  EXPECT_THROW(codec.encode(NAN), FixedPointOverflow);
  FixedModel q{{1 << 20, 1 << 20}, 0, codec};
  EXPECT_THROW(fixed_logit(q, {1 << 10, 1 << 10}), FixedPointOverflow);
}

TEST(FixedPoint, FidelityBoundHoldsOnTestRows) {
  const FixedPointCodec codec;
  for (const auto& lc : {iris_case(kDataDir), breast_cancer_case(kDataDir, 1)}) {
    const auto q = quantize(lc.model, codec);
    for (const auto& row : lc.test.x) {
      const double fixed = static_cast<double>(fixed_logit(q, encode_row(lc.model, row, codec))) / (256.0 * 256.0);
      EXPECT_LE(std::fabs(fixed - lc.model.logit(row)), fidelity_bound(lc.model, row, codec));
    }
  }
}

TEST(FixedPoint, PostprocessThreshold) {
  const FixedPointCodec codec;
  EXPECT_EQ(client_postprocess({0}, codec), std::vector<int>{1});
  EXPECT_EQ(client_postprocess({kP - 1, 1, codec.wrap(-65536), codec.wrap(65536)}, codec),
            (std::vector<int>{0, 1, 0, 1}));
}

TEST(ModelFile, RoundTrip) {
  const auto lc = iris_case(kDataDir);
  const FixedPointCodec codec;
  std::stringstream buf;
  write_model(buf, lc.model, codec);
  const auto back = read_model(buf);
  EXPECT_EQ(back.model.w, lc.model.w);
  EXPECT_EQ(back.model.b, lc.model.b);
  EXPECT_EQ(back.model.mean, lc.model.mean);
  EXPECT_EQ(back.model.stddev, lc.model.stddev);
  EXPECT_EQ(back.codec.scale, codec.scale);
  EXPECT_EQ(back.codec.modulus, codec.modulus);
  std::istringstream truncated("d 2\nf 256\np 17\nmean 0 0\n");
  EXPECT_THROW(read_model(truncated), DataError);
}

// ---- circuits ----------------------------------------------------------------------

TEST(DotCircuit, Shape) {
  const auto c = build_dot_circuit(30, kP);
  EXPECT_EQ(c.multiplications(), 30u);
  EXPECT_EQ(c.inputs, 61u);
  EXPECT_EQ(c.outputs, 1u);
  EXPECT_EQ(plan_circuit(c).layers, 1u);
}

TEST(DotCircuit, UnitWeightPassesInputThrough) {
  const auto ring = make_ring(RingParams{64, kP, 0});
  const auto c = build_dot_circuit(1, kP);
  std::vector<u64> x(64);
  for (std::size_t s = 0; s < x.size(); ++s) x[s] = 3 * s + 1;
  const std::vector<RingElement> in{slot_encode(ring, x), RingElement::constant(ring, 1), RingElement::constant(ring, 0)};
  EXPECT_EQ(slot_decode(eval_plain(c, in)[0]), x);
}

TEST(DotCircuit, MpcMatchesIntegerOracle) {
  const auto cfg = small_config();
  SeedStream rng(seed_from_u64(9));
  const std::size_t d = 5;
  LinearModel m;
  m.mean.assign(d, 0);
  m.stddev.assign(d, 1);
  for (std::size_t j = 0; j < d; ++j) m.w.push_back((static_cast<double>(rng.uniform(2001)) - 1000) / 300);
  m.b = -0.75;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < 64; ++i) {
    std::vector<double> r;
    for (std::size_t j = 0; j < d; ++j) r.push_back((static_cast<double>(rng.uniform(2001)) - 1000) / 250);
    rows.push_back(r);
  }
  const FixedPointCodec codec;
  const auto res = mpc_logreg(m, codec, rows, cfg);
  ASSERT_TRUE(res.ok);
  const auto q = quantize(m, codec);
  ASSERT_EQ(res.residues.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(codec.lift(res.residues[i]), fixed_logit(q, encode_row(m, rows[i], codec)));
  }
}

TEST(DotCircuit, BatchEqualsSingleInstances) {
  const auto cfg = small_config();
  LinearModel m{{0.5, -1.25}, 0.125, {0, 0}, {1, 1}};
  const std::vector<std::vector<double>> rows{{1, 2}, {-3, 0.5}, {2.5, -1}};
  const FixedPointCodec codec;
  const auto batch = mpc_logreg(m, codec, rows, cfg);
  ASSERT_TRUE(batch.ok);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto single = mpc_logreg(m, codec, {rows[i]}, small_config(3, 100 + i));
    ASSERT_TRUE(single.ok);
    EXPECT_EQ(single.residues.at(0), batch.residues.at(i));
  }
}

TEST(NetworkA, OneByOneIsSquare) {
  const auto ring = make_ring(RingParams{64, kP, 0});
  const NetworkShape shape{{1, 1, 1}};
  const auto c = build_network_a(shape, kP);
  EXPECT_EQ(c.multiplications(), 3u);
  std::vector<u64> x(64);
  for (std::size_t s = 0; s < x.size(); ++s) x[s] = s + 2;
  const std::vector<RingElement> in{slot_encode(ring, x), RingElement::constant(ring, 1), RingElement::constant(ring, 1)};
  const auto y = slot_decode(eval_plain(c, in)[0]);
  for (std::size_t s = 0; s < x.size(); ++s) EXPECT_EQ(y[s], x[s] * x[s]);
}

TEST(NetworkA, MultiplicationCount) {
  for (const auto& shape : {NetworkShape{{4, 3, 2}}, NetworkShape::reduced(), NetworkShape::full()}) {
    const auto c = build_network_a(shape, kP);
    EXPECT_EQ(c.multiplications(), shape.multiplications());
    EXPECT_EQ(c.inputs, shape.inputs());
    EXPECT_EQ(c.outputs, shape.dims.back());
  }
  EXPECT_EQ(NetworkShape::reduced().multiplications(), 64u * 16 + 16 * 16 + 16 * 4 + 16 + 16);
  EXPECT_EQ(NetworkShape::full().multiplications(), 784u * 128 + 128 * 128 + 128 * 10 + 128 + 128);
}

TEST(NetworkA, TinyNetMpcMatchesOracle) {
  auto params = small_config().session;
  const Session session = make_session(params);
  SeedStream rng(seed_from_u64(11));
  const auto ni = random_network_instance(NetworkShape{{4, 3, 2}}, params.degree, kP, rng);
  const auto inputs = network_inputs(ni, session.ctx->ring);
  EXPECT_EQ(eval_plain(ni.circuit, inputs).size(), 2u);
  const auto offline =
      offline_run(session.ctx, session.offline_keys, offline_params_for(ni.circuit, params.servers), session.offline_seeds());
  const auto run = run_online(session, ni.circuit, inputs, offline);
  EXPECT_TRUE(network_output_matches(ni, run, kP));
}

TEST(NetworkA, TinyNetRecoversFromWrongOpen) {
  auto params = small_config().session;
  const Session session = make_session(params);
  SeedStream rng(seed_from_u64(12));
  const auto ni = random_network_instance(NetworkShape{{4, 3, 2}}, params.degree, kP, rng);
  const auto inputs = network_inputs(ni, session.ctx->ring);
  const auto offline =
      offline_run(session.ctx, session.offline_keys, offline_params_for(ni.circuit, params.servers), session.offline_seeds());
  ProtocolOptions opts;
  opts.adversaries.push_back(AdversarySpec{2, Behaviour::WrongOpen, std::nullopt, 1, 0});
  const auto run = run_online(session, ni.circuit, inputs, offline, opts);
  EXPECT_TRUE(network_output_matches(ni, run, kP));
  EXPECT_EQ(run.cheaters, std::vector<std::size_t>{2});
  const auto split = run.metrics.recovery_split();
  EXPECT_GT(split.recovery, 0.0);
  EXPECT_GT(split.completion, 0.0);
}

// ---- end to end --------------------------------------------------------------------

TEST(Pipeline, IrisMpcEqualsFixedPointAndIsPerfect) {
  const auto lc = iris_case(kDataDir);
  const FixedPointCodec codec;
  const auto res = mpc_logreg(lc.model, codec, lc.test.x, small_config());
  ASSERT_TRUE(res.ok);
  EXPECT_EQ(res.chunks, 1u);
  EXPECT_EQ(res.labels, fixed_predictions(lc.model, codec, lc.test.x));
  EXPECT_EQ(accuracy(res.labels, lc.test.y), 1.0);
}

TEST(Pipeline, BreastCancerChunksAndEqualsFixedPoint) {
  const auto lc = breast_cancer_case(kDataDir, 1);
  const FixedPointCodec codec;
  const auto res = mpc_logreg(lc.model, codec, lc.test.x, small_config());
  ASSERT_TRUE(res.ok);
  EXPECT_EQ(res.chunks, 2u);  // 114 rows over 64 slots
  EXPECT_EQ(res.labels, fixed_predictions(lc.model, codec, lc.test.x));
}

TEST(Pipeline, ModulusMismatchIsRejected) {
  auto cfg = small_config();
  FixedPointCodec codec;
  codec.modulus = 17;
  LinearModel m{{1}, 0, {0}, {1}};
  EXPECT_THROW(mpc_logreg(m, codec, {{1}}, cfg), DataError);
}

TEST(Bench, UnknownScenarioIsRejected) {
  BenchConfig cfg;
  cfg.scenario = "nope";
  EXPECT_THROW(bench(cfg), std::invalid_argument);
}

TEST(Bench, IrisReportFields) {
  BenchConfig cfg;
  cfg.scenario = "logreg-iris";
  cfg.degree = 64;
  cfg.data_dir = kDataDir;
  const auto r = bench(cfg);
  EXPECT_EQ(r["accuracy_mpc"].get<double>(), 1.0);
  EXPECT_TRUE(r["mpc_equals_fixed"].get<bool>());
  EXPECT_DOUBLE_EQ(r["amortized_seconds"].get<double>(), r["online_seconds"].get<double>() / 64.0);
  EXPECT_GT(r["server_megabytes_per_party"].get<double>(), 0.0);
}

}  // namespace
}  // namespace cessmpc::ml
