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

// Inference circuits: slot-batched w.x + b and dense/square networks, plus
// their integer reference evaluations.

#pragma once

#include <stdexcept>
#include <vector>

#include "cessmpc/online/circuit.hpp"

namespace cessmpc::ml {

namespace detail {

class CircuitBuilder {
 public:
  std::uint32_t input() {
    const auto w = c_.wires++;
    c_.gates.push_back(Gate{GateKind::Input, w, 0, 0, 0});
    ++c_.inputs;
    return w;
  }
  std::uint32_t binary(GateKind k, std::uint32_t a, std::uint32_t b) {
    const auto w = c_.wires++;
    c_.gates.push_back(Gate{k, w, a, b, 0});
    return w;
  }
  std::uint32_t square(std::uint32_t a) {
    const auto w = c_.wires++;
    c_.gates.push_back(Gate{GateKind::Square, w, a, a, 0});
    return w;
  }
  void output(std::uint32_t w) {
    c_.gates.push_back(Gate{GateKind::Output, w, 0, 0, 0});
    ++c_.outputs;
  }

  /// Balanced ADD tree; keeps the noise growth logarithmic in the fan-in.
  std::uint32_t sum(std::vector<std::uint32_t> terms) {
    if (terms.empty()) throw CircuitError("empty sum");
    while (terms.size() > 1) {
      std::vector<std::uint32_t> next;
      for (std::size_t i = 0; i + 1 < terms.size(); i += 2) next.push_back(binary(GateKind::Add, terms[i], terms[i + 1]));
      if (terms.size() % 2) next.push_back(terms.back());
      terms = std::move(next);
    }
    return terms[0];
  }

  Circuit finish(u64 p) {
    validate_circuit(c_, p);
    return std::move(c_);
  }

 private:
  Circuit c_;
};

inline u64 mod_mul(u64 a, u64 b, u64 p) { return static_cast<u64>(static_cast<unsigned __int128>(a) * b % p); }

}  // namespace detail

// ---- logistic regression ------------------------------------------------------

/// Inputs in order x_0..x_{d-1}, w_0..w_{d-1}, b; one output.
inline Circuit build_dot_circuit(std::size_t d, u64 p) {
  if (d < 1) throw CircuitError("dot circuit needs d >= 1");
  detail::CircuitBuilder cb;
  std::vector<std::uint32_t> x, w;
  for (std::size_t j = 0; j < d; ++j) x.push_back(cb.input());
  for (std::size_t j = 0; j < d; ++j) w.push_back(cb.input());
  const auto b = cb.input();
  std::vector<std::uint32_t> products;
  for (std::size_t j = 0; j < d; ++j) products.push_back(cb.binary(GateKind::Mul, x[j], w[j]));
  cb.output(cb.binary(GateKind::Add, cb.sum(products), b));
  return cb.finish(p);
}

// ---- Network-A ------------------------------------------------------------------

struct NetworkShape {
  std::vector<std::size_t> dims;  // d_0 -> d_1 -> ... -> d_L

  static NetworkShape full() { return {{784, 128, 128, 10}}; }
  static NetworkShape reduced() { return {{64, 16, 16, 4}}; }

  std::size_t layers() const { return dims.size() - 1; }

  std::size_t weights() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l] * dims[l + 1];
    return n;
  }

  /// Square activations after every layer but the last.
  std::size_t activations() const {
    std::size_t n = 0;
    for (std::size_t l = 1; l + 1 < dims.size(); ++l) n += dims[l];
    return n;
  }

  std::size_t multiplications() const { return weights() + activations(); }
  std::size_t inputs() const { return dims[0] + weights(); }
};

/// Inputs: the d_0 slot-batched features, then each layer's weights row-major
/// (W_l[i][j] multiplies h_j into unit i). Outputs: the d_L final units.
inline Circuit build_network_a(const NetworkShape& shape, u64 p) {
  if (shape.dims.size() < 2) throw CircuitError("network needs at least one layer");
  for (auto d : shape.dims) {
    if (d == 0) throw CircuitError("network layer of width 0");
  }
  detail::CircuitBuilder cb;
  std::vector<std::uint32_t> h;
  for (std::size_t j = 0; j < shape.dims[0]; ++j) h.push_back(cb.input());
  std::vector<std::vector<std::uint32_t>> weights(shape.layers());
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    for (std::size_t k = 0; k < shape.dims[l] * shape.dims[l + 1]; ++k) weights[l].push_back(cb.input());
  }
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    const std::size_t in = shape.dims[l], out = shape.dims[l + 1];
    std::vector<std::uint32_t> next;
    for (std::size_t i = 0; i < out; ++i) {
      std::vector<std::uint32_t> terms;
      for (std::size_t j = 0; j < in; ++j) terms.push_back(cb.binary(GateKind::Mul, weights[l][i * in + j], h[j]));
      auto unit = cb.sum(std::move(terms));
      if (l + 1 < shape.layers()) unit = cb.square(unit);
      next.push_back(unit);
    }
    h = std::move(next);
  }
  for (auto w : h) cb.output(w);
  return cb.finish(p);
}

/// Plain modular evaluation of one instance: x has d_0 residues, weights[l]
/// is row-major d_{l+1} x d_l.
inline std::vector<u64> network_oracle(const NetworkShape& shape, const std::vector<std::vector<u64>>& weights,
                                       std::vector<u64> x, u64 p) {
  if (x.size() != shape.dims[0] || weights.size() != shape.layers()) throw std::invalid_argument("network_oracle: shape");
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    const std::size_t in = shape.dims[l], out = shape.dims[l + 1];
    if (weights[l].size() != in * out) throw std::invalid_argument("network_oracle: weight count");
    std::vector<u64> next(out, 0);
    for (std::size_t i = 0; i < out; ++i) {
      u64 acc = 0;
      for (std::size_t j = 0; j < in; ++j) acc = (acc + detail::mod_mul(weights[l][i * in + j] % p, x[j] % p, p)) % p;
      if (l + 1 < shape.layers()) acc = detail::mod_mul(acc, acc, p);
      next[i] = acc;
    }
    x = std::move(next);
  }
  return x;
}

}  // namespace cessmpc::ml
