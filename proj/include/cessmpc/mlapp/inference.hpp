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

// Logistic-regression inference under MPC: the fixed-point model, the
// integer reference, the model file and the slot-batched pipeline.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cessmpc/mlapp/circuits.hpp"
#include "cessmpc/mlapp/data.hpp"
#include "cessmpc/mlapp/fixed_point.hpp"
#include "cessmpc/online/protocol.hpp"

namespace cessmpc::ml {

// ---- model file -----------------------------------------------------------------

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  char buf[64];
  for (auto x : v) {
    std::snprintf(buf, sizeof buf, " %.17g", x);
    out += buf;
  }
  return out;
}

inline std::vector<double> read_tagged(std::istream& in, const std::string& tag, std::size_t n) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("model file: missing '" + tag + "' line");
  std::istringstream ls(line);
  std::string got;
  ls >> got;
  if (got != tag) throw DataError("model file: expected '" + tag + "', got '" + got + "'");
  std::vector<double> v(n);
  for (auto& x : v) {
    if (!(ls >> x) || !std::isfinite(x)) throw DataError("model file: bad '" + tag + "' values");
  }
  if (ls >> got) throw DataError("model file: extra values on '" + tag + "' line");
  return v;
}

}  // namespace detail

/// Lines: `d`, `f`, `p`, `mean ...`, `std ...`, `w ...`, `b value`.
inline void write_model(std::ostream& out, const LinearModel& m, const FixedPointCodec& codec) {
  out << "d " << m.dims() << '\n'
      << "f " << codec.scale << '\n'
      << "p " << codec.modulus << '\n'
      << "mean" << detail::join_doubles(m.mean) << '\n'
      << "std" << detail::join_doubles(m.stddev) << '\n'
      << "w" << detail::join_doubles(m.w) << '\n'
      << "b" << detail::join_doubles({m.b}) << '\n';
}

inline void save_model(const std::string& path, const LinearModel& m, const FixedPointCodec& codec) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_model(out, m, codec);
}

struct ModelFile {
  LinearModel model;
  FixedPointCodec codec;
};

inline ModelFile read_model(std::istream& in) {
  ModelFile mf;
  const auto d = detail::read_tagged(in, "d", 1)[0];
  if (d < 1 || d != std::floor(d)) throw DataError("model file: bad dimension");
  const auto dims = static_cast<std::size_t>(d);
  mf.codec.scale = static_cast<u64>(detail::read_tagged(in, "f", 1)[0]);
  mf.codec.modulus = static_cast<u64>(detail::read_tagged(in, "p", 1)[0]);
  if (mf.codec.scale == 0 || (mf.codec.scale & (mf.codec.scale - 1))) throw DataError("model file: f must be a power of two");
  mf.model.mean = detail::read_tagged(in, "mean", dims);
  mf.model.stddev = detail::read_tagged(in, "std", dims);
  mf.model.w = detail::read_tagged(in, "w", dims);
  mf.model.b = detail::read_tagged(in, "b", 1)[0];
  for (auto s : mf.model.stddev) {
    if (s <= 0) throw DataError("model file: stddev must be positive");
  }
  return mf;
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_model(in);
}

// ---- fixed-point model and integer reference -----------------------------------------

struct FixedModel {
  std::vector<i64> w;  // scale f
  i64 b = 0;           // scale f^2
  FixedPointCodec codec;
};

inline FixedModel quantize(const LinearModel& m, const FixedPointCodec& codec) {
  FixedModel q;
  q.codec = codec;
  for (auto w : m.w) q.w.push_back(codec.to_int(w));
  const double scaled_b = std::nearbyint(m.b * static_cast<double>(codec.scale) * static_cast<double>(codec.scale));
  if (!std::isfinite(scaled_b) || std::fabs(scaled_b) >= static_cast<double>(codec.half())) {
    throw FixedPointOverflow("bias out of fixed-point range");
  }
  q.b = static_cast<i64>(scaled_b);
  return q;
}

inline std::vector<i64> encode_row(const LinearModel& m, const std::vector<double>& row, const FixedPointCodec& codec) {
  std::vector<i64> x;
  for (auto z : m.standardize(row)) x.push_back(codec.to_int(z));
  return x;
}

/// sum_j W_j X_j + B over the integers, refusing anything that would wrap mod p.
inline i64 fixed_logit(const FixedModel& q, const std::vector<i64>& x) {
  if (x.size() != q.w.size()) throw DataError("fixed_logit: dimension mismatch");
  i128 acc = q.b, bound = q.b < 0 ? -static_cast<i128>(q.b) : q.b;
  for (std::size_t j = 0; j < x.size(); ++j) {
    acc += static_cast<i128>(q.w[j]) * x[j];
    bound += static_cast<i128>(q.w[j] < 0 ? -q.w[j] : q.w[j]) * (x[j] < 0 ? -x[j] : x[j]);
  }
  if (bound >= static_cast<i128>(q.codec.half())) throw FixedPointOverflow("logit may wrap modulo p");
  return static_cast<i64>(acc);
}

/// d * (|w|_inf + |x|_inf + 1) / f, with x the standardized row.
inline double fidelity_bound(const LinearModel& m, const std::vector<double>& row, const FixedPointCodec& codec) {
  double wmax = 0, xmax = 0;
  for (auto w : m.w) wmax = std::max(wmax, std::fabs(w));
  for (auto z : m.standardize(row)) xmax = std::max(xmax, std::fabs(z));
  return static_cast<double>(m.dims()) * (wmax + xmax + 1) / static_cast<double>(codec.scale);
}

/// Reconstructed logit residues at scale f^2 to labels.
inline std::vector<int> client_postprocess(const std::vector<u64>& residues, const FixedPointCodec& codec) {
  std::vector<int> labels;
  for (auto r : residues) labels.push_back(threshold_label(codec.decode(r, 2)));
  return labels;
}

/// Plaintext fixed-point predictions; the exact reference for the MPC pipeline.
inline std::vector<int> fixed_predictions(const LinearModel& m, const FixedPointCodec& codec,
                                          const std::vector<std::vector<double>>& rows) {
  const auto q = quantize(m, codec);
  std::vector<int> out;
  for (const auto& r : rows) out.push_back(threshold_label(static_cast<double>(fixed_logit(q, encode_row(m, r, codec)))));
  return out;
}

inline std::vector<int> float_predictions(const LinearModel& m, const std::vector<std::vector<double>>& rows) {
  std::vector<int> out;
  for (const auto& r : rows) out.push_back(threshold_label(m.logit(r)));
  return out;
}

// ---- MPC pipeline -----------------------------------------------------------------

enum class Transport : std::uint8_t { Sim, Tcp };

struct MpcConfig {
  SessionParams session;
  Transport transport = Transport::Sim;
  std::chrono::milliseconds latency{0};
  std::vector<AdversarySpec> adversaries;
};

struct InferenceResult {
  std::vector<u64> residues;  // one logit per row, scale f^2
  std::vector<int> labels;
  Metrics metrics;            // all chunks
  double offline_seconds = 0;
  std::size_t chunks = 0;
  std::size_t slots = 0;      // ring degree
  std::vector<Transcript> transcripts;
  std::vector<std::vector<std::size_t>> cheaters;
  bool ok = true;

  /// Online seconds per slot over all chunks.
  double amortized_seconds() const {
    return chunks ? metrics.online_seconds() / static_cast<double>(chunks * slots) : 0.0;
  }
};

/// Circuit inputs for build_dot_circuit: one slot per row (at most N rows),
/// then the weights and the f^2-scaled bias in every slot.
inline std::vector<RingElement> logreg_inputs(const LinearModel& m, const FixedPointCodec& codec,
                                              const std::vector<std::vector<double>>& rows, const RingPtr& ring) {
  const std::size_t d = m.dims(), n_slots = ring->degree();
  if (rows.size() > n_slots) throw DataError("more rows than slots");
  const auto q = quantize(m, codec);
  std::vector<std::vector<u64>> columns(d, std::vector<u64>(n_slots, 0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto x = encode_row(m, rows[i], codec);
    (void)fixed_logit(q, x);  // range check before anything is shared
    for (std::size_t j = 0; j < d; ++j) columns[j][i] = codec.wrap(x[j]);
  }
  std::vector<RingElement> inputs;
  for (std::size_t j = 0; j < d; ++j) inputs.push_back(slot_encode(ring, columns[j]));
  for (std::size_t j = 0; j < d; ++j) inputs.push_back(RingElement::constant(ring, codec.wrap(q.w[j])));
  inputs.push_back(RingElement::constant(ring, codec.wrap(q.b)));
  return inputs;
}

/// One protocol run per chunk of at most N rows; each chunk gets its own
/// session seed and fresh offline material.
inline InferenceResult mpc_logreg(const LinearModel& m, const FixedPointCodec& codec,
                                  const std::vector<std::vector<double>>& rows, const MpcConfig& cfg) {
  if (cfg.session.modulus != codec.modulus) throw DataError("codec modulus differs from the session modulus");
  const std::size_t d = m.dims(), n_slots = cfg.session.degree;
  const Circuit circuit = build_dot_circuit(d, codec.modulus);
  InferenceResult res;
  res.slots = n_slots;
  for (std::size_t start = 0; start < rows.size(); start += n_slots) {
    const std::size_t count = std::min(n_slots, rows.size() - start);
    SessionParams sp = cfg.session;
    sp.master = derive_seed(cfg.session.master, "chunk", res.chunks);
    const Session session = make_session(sp);
    const std::vector<std::vector<double>> chunk(rows.begin() + static_cast<std::ptrdiff_t>(start),
                                                 rows.begin() + static_cast<std::ptrdiff_t>(start + count));
    const auto inputs = logreg_inputs(m, codec, chunk, session.ctx->ring);

    const auto t0 = std::chrono::steady_clock::now();
    const auto offline =
        offline_run(session.ctx, session.offline_keys, offline_params_for(circuit, sp.servers), session.offline_seeds());
    res.offline_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    ProtocolOptions opts;
    opts.adversaries = cfg.adversaries;
    opts.sim.latency = cfg.latency;
    ProtocolRun run = cfg.transport == Transport::Tcp ? run_online_tcp(session, circuit, inputs, offline, opts)
                                                      : run_online(session, circuit, inputs, offline, opts);
    res.metrics += run.metrics;
    res.transcripts.push_back(std::move(run.transcript));
    res.cheaters.push_back(run.cheaters);
    ++res.chunks;
    if (!run.output || !run.output->ok) {
      res.ok = false;
      continue;
    }
    const auto slots = slot_decode(run.output->values.at(0));
    for (std::size_t i = 0; i < count; ++i) res.residues.push_back(slots[i]);
  }
  if (res.ok) res.labels = client_postprocess(res.residues, codec);
  return res;
}

}  // namespace cessmpc::ml
