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

// Arithmetic circuits over R_p in a line-oriented text form:
//
//   WIRES 5 INPUTS 3 OUTPUTS 1
//   INPUT 0
//   INPUT 1
//   INPUT 2
//   ADD 3 0 1
//   MUL 4 3 2
//   OUTPUT 4
//
// Every wire is assigned exactly once and before use. Constants are decimal
// residues and act on every slot.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cessmpc/he/he.hpp"
#include "cessmpc/ring/ring.hpp"

namespace cessmpc {

enum class GateKind : std::uint8_t { Input, Output, Add, Sub, AddConst, MulConst, Mul, Square };

inline std::string_view gate_name(GateKind k) {
  switch (k) {
    case GateKind::Input: return "INPUT";
    case GateKind::Output: return "OUTPUT";
    case GateKind::Add: return "ADD";
    case GateKind::Sub: return "SUB";
    case GateKind::AddConst: return "ADD_CONST";
    case GateKind::MulConst: return "MUL_CONST";
    case GateKind::Mul: return "MUL";
    case GateKind::Square: return "SQUARE";
  }
  return "?";
}

inline bool is_multiplication(GateKind k) { return k == GateKind::Mul || k == GateKind::Square; }
inline bool is_linear(GateKind k) {
  return k == GateKind::Add || k == GateKind::Sub || k == GateKind::AddConst || k == GateKind::MulConst;
}

struct Gate {
  GateKind kind = GateKind::Input;
  std::uint32_t out = 0;  // defined wire; the opened wire for OUTPUT
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  u64 constant = 0;

  bool operator==(const Gate&) const = default;
};

class CircuitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Circuit {
  std::uint32_t wires = 0;
  std::uint32_t inputs = 0;
  std::uint32_t outputs = 0;
  std::vector<Gate> gates;

  std::vector<std::uint32_t> input_wires() const {
    std::vector<std::uint32_t> out;
    for (const auto& g : gates) {
      if (g.kind == GateKind::Input) out.push_back(g.out);
    }
    return out;
  }

  std::vector<std::uint32_t> output_wires() const {
    std::vector<std::uint32_t> out;
    for (const auto& g : gates) {
      if (g.kind == GateKind::Output) out.push_back(g.out);
    }
    return out;
  }

  std::size_t multiplications() const {
    return static_cast<std::size_t>(
        std::count_if(gates.begin(), gates.end(), [](const Gate& g) { return is_multiplication(g.kind); }));
  }

  bool operator==(const Circuit&) const = default;
};

/// Checks single assignment, definition before use and the header counts.
inline void validate_circuit(const Circuit& c, u64 p) {
  std::vector<bool> defined(c.wires, false);
  std::uint32_t inputs = 0, outputs = 0;
  auto use = [&](std::uint32_t w, std::size_t line) {
    if (w >= c.wires || !defined[w]) {
      throw CircuitError("gate " + std::to_string(line) + ": wire " + std::to_string(w) + " used before definition");
    }
  };
  auto define = [&](std::uint32_t w, std::size_t line) {
    if (w >= c.wires) throw CircuitError("gate " + std::to_string(line) + ": wire out of range");
    if (defined[w]) throw CircuitError("gate " + std::to_string(line) + ": wire assigned twice");
    defined[w] = true;
  };
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const auto& g = c.gates[i];
    switch (g.kind) {
      case GateKind::Input:
        define(g.out, i);
        ++inputs;
        break;
      case GateKind::Output:
        use(g.out, i);
        ++outputs;
        break;
      case GateKind::Add:
      case GateKind::Sub:
      case GateKind::Mul:
        use(g.a, i);
        use(g.b, i);
        define(g.out, i);
        break;
      case GateKind::AddConst:
      case GateKind::MulConst:
        if (g.constant >= p) throw CircuitError("gate " + std::to_string(i) + ": constant not reduced mod p");
        use(g.a, i);
        define(g.out, i);
        break;
      case GateKind::Square:
        use(g.a, i);
        define(g.out, i);
        break;
    }
  }
  if (inputs != c.inputs) throw CircuitError("header INPUTS does not match INPUT gates");
  if (outputs != c.outputs) throw CircuitError("header OUTPUTS does not match OUTPUT gates");
}

namespace detail {

inline std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline u64 parse_number(std::string_view s, std::size_t line) {
  u64 v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw CircuitError("line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

inline std::uint32_t parse_wire(std::string_view s, std::size_t line) {
  const u64 v = parse_number(s, line);
  if (v > 0xffffffffULL) throw CircuitError("line " + std::to_string(line) + ": wire index too large");
  return static_cast<std::uint32_t>(v);
}

}  // namespace detail

inline Circuit parse_circuit(std::string_view text, u64 p) {
  Circuit c;
  bool header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto words = detail::split_words(line);
    if (words.empty()) continue;
    if (!header) {
      if (words.size() != 6 || words[0] != "WIRES" || words[2] != "INPUTS" || words[4] != "OUTPUTS") {
        throw CircuitError("line " + std::to_string(line_no) + ": expected 'WIRES n INPUTS k OUTPUTS m'");
      }
      c.wires = detail::parse_wire(words[1], line_no);
      c.inputs = detail::parse_wire(words[3], line_no);
      c.outputs = detail::parse_wire(words[5], line_no);
      header = true;
      continue;
    }
    const auto kw = words[0];
    auto arity = [&](std::size_t n) {
      if (words.size() != n + 1) {
        throw CircuitError("line " + std::to_string(line_no) + ": " + std::string(kw) + " takes " +
                           std::to_string(n) + " operands");
      }
    };
    Gate g;
    if (kw == "INPUT" || kw == "OUTPUT") {
      arity(1);
      g.kind = kw == "INPUT" ? GateKind::Input : GateKind::Output;
      g.out = detail::parse_wire(words[1], line_no);
    } else if (kw == "ADD" || kw == "SUB" || kw == "MUL") {
      arity(3);
      g.kind = kw == "ADD" ? GateKind::Add : kw == "SUB" ? GateKind::Sub : GateKind::Mul;
      g.out = detail::parse_wire(words[1], line_no);
      g.a = detail::parse_wire(words[2], line_no);
      g.b = detail::parse_wire(words[3], line_no);
    } else if (kw == "ADD_CONST" || kw == "MUL_CONST") {
      arity(3);
      g.kind = kw == "ADD_CONST" ? GateKind::AddConst : GateKind::MulConst;
      g.out = detail::parse_wire(words[1], line_no);
      g.a = detail::parse_wire(words[2], line_no);
      g.constant = detail::parse_number(words[3], line_no);
    } else if (kw == "SQUARE") {
      arity(2);
      g.kind = GateKind::Square;
      g.out = detail::parse_wire(words[1], line_no);
      g.a = detail::parse_wire(words[2], line_no);
      g.b = g.a;
    } else {
      throw CircuitError("line " + std::to_string(line_no) + ": unknown gate '" + std::string(kw) + "'");
    }
    c.gates.push_back(g);
  }
  if (!header) throw CircuitError("missing header line");
  validate_circuit(c, p);
  return c;
}

inline std::string format_circuit(const Circuit& c) {
  std::ostringstream os;
  os << "WIRES " << c.wires << " INPUTS " << c.inputs << " OUTPUTS " << c.outputs << "\n";
  for (const auto& g : c.gates) {
    os << gate_name(g.kind);
    switch (g.kind) {
      case GateKind::Input:
      case GateKind::Output: os << ' ' << g.out; break;
      case GateKind::Add:
      case GateKind::Sub:
      case GateKind::Mul: os << ' ' << g.out << ' ' << g.a << ' ' << g.b; break;
      case GateKind::AddConst:
      case GateKind::MulConst: os << ' ' << g.out << ' ' << g.a << ' ' << g.constant; break;
      case GateKind::Square: os << ' ' << g.out << ' ' << g.a; break;
    }
    os << "\n";
  }
  return os.str();
}

inline Digest circuit_digest(const Circuit& c) {
  const auto text = format_circuit(c);
  return Sha256().update(std::string_view(text)).finish();
}

// ---- evaluation schedule ----------------------------------------------------

/// Stages 1..D open the Beaver masks of multiplication layer s; stage D+1
/// opens the outputs. Linear gates run right before the first stage that
/// can see all their operands.
struct CircuitPlan {
  std::size_t layers = 0;                             // D
  std::vector<std::uint32_t> depth;                   // per wire
  std::vector<std::vector<std::size_t>> stage_mults;  // [stage] gate indices
  std::vector<std::vector<std::size_t>> stage_linear;
  std::vector<std::int64_t> triple_of_gate;  // -1 for non-multiplications
  std::vector<std::size_t> last_stage;       // per wire
  std::vector<std::uint32_t> inputs;
  std::vector<std::uint32_t> outputs;

  std::size_t stages() const { return layers + 1; }
  std::size_t output_stage() const { return layers + 1; }
  std::size_t triples() const {
    std::size_t n = 0;
    for (auto t : triple_of_gate) n += t >= 0 ? 1 : 0;
    return n;
  }
};

inline CircuitPlan plan_circuit(const Circuit& c) {
  CircuitPlan plan;
  plan.depth.assign(c.wires, 0);
  plan.triple_of_gate.assign(c.gates.size(), -1);
  std::int64_t next_triple = 0;
  for (const auto& g : c.gates) {
    switch (g.kind) {
      case GateKind::Input:
      case GateKind::Output: break;
      case GateKind::Add:
      case GateKind::Sub: plan.depth[g.out] = std::max(plan.depth[g.a], plan.depth[g.b]); break;
      case GateKind::AddConst:
      case GateKind::MulConst: plan.depth[g.out] = plan.depth[g.a]; break;
      case GateKind::Mul:
      case GateKind::Square: plan.depth[g.out] = std::max(plan.depth[g.a], plan.depth[g.b]) + 1; break;
    }
    if (is_multiplication(g.kind)) plan.layers = std::max<std::size_t>(plan.layers, plan.depth[g.out]);
  }
  plan.stage_mults.assign(plan.stages() + 1, {});
  plan.stage_linear.assign(plan.stages() + 1, {});
  plan.last_stage.assign(c.wires, 0);
  auto touch = [&](std::uint32_t w, std::size_t stage) { plan.last_stage[w] = std::max(plan.last_stage[w], stage); };
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const auto& g = c.gates[i];
    if (is_multiplication(g.kind)) {
      const std::size_t stage = plan.depth[g.out];
      plan.stage_mults[stage].push_back(i);
      plan.triple_of_gate[i] = next_triple++;
      touch(g.a, stage);
      touch(g.b, stage);
      touch(g.out, stage);
    } else if (is_linear(g.kind)) {
      const std::size_t stage = plan.depth[g.out] + 1;
      plan.stage_linear[stage].push_back(i);
      touch(g.a, stage);
      if (g.kind == GateKind::Add || g.kind == GateKind::Sub) touch(g.b, stage);
      touch(g.out, stage);
    } else if (g.kind == GateKind::Input) {
      plan.inputs.push_back(g.out);
      touch(g.out, 1);
    } else {
      plan.outputs.push_back(g.out);
      touch(g.out, plan.output_stage());
    }
  }
  return plan;
}

/// Object ids: wires first, then three per triple (a, b, c).
inline u64 triple_object(const Circuit& c, std::size_t triple, std::size_t part) {
  return static_cast<u64>(c.wires) + 3 * static_cast<u64>(triple) + part;
}

// ---- plaintext reference ----------------------------------------------------

inline std::vector<RingElement> eval_plain(const Circuit& c, std::span<const RingElement> inputs) {
  if (inputs.size() != c.inputs) throw CircuitError("wrong number of circuit inputs");
  if (inputs.empty() && c.outputs == 0) return {};
  std::vector<RingElement> wire(c.wires);
  std::vector<RingElement> out;
  std::size_t next_input = 0;
  RingPtr ring = inputs.empty() ? RingPtr{} : inputs[0].context();
  for (const auto& g : c.gates) {
    switch (g.kind) {
      case GateKind::Input: wire[g.out] = inputs[next_input++]; break;
      case GateKind::Output: out.push_back(wire[g.out]); break;
      case GateKind::Add: wire[g.out] = wire[g.a] + wire[g.b]; break;
      case GateKind::Sub: wire[g.out] = wire[g.a] - wire[g.b]; break;
      case GateKind::AddConst: wire[g.out] = wire[g.a] + RingElement::constant(wire[g.a].context(), g.constant); break;
      case GateKind::MulConst: wire[g.out] = ring_scalar_mul(wire[g.a], g.constant); break;
      case GateKind::Mul: wire[g.out] = wire[g.a] * wire[g.b]; break;
      case GateKind::Square: wire[g.out] = wire[g.a] * wire[g.a]; break;
    }
  }
  return out;
}

// ---- ciphertext noise along the circuit ----------------------------------

/// Worst-case log2 noise of every wire's ciphertexts when inputs and triples
/// arrive freshly encrypted and Beaver masks are arbitrary residues.
inline std::vector<double> circuit_noise(const Circuit& c, const CircuitPlan& plan, const HeContext& he) {
  const double fresh = detail::fresh_log_sigma(he);
  const double p = static_cast<double>(he.p());
  const double mask_l1 = std::log2(static_cast<double>(he.degree()) * p / 2.0);
  const double half_p = std::log2(p / 2.0);
  std::vector<double> sigma(c.wires, fresh);
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const auto& g = c.gates[i];
    const Modulus& m = he.plain()->modulus();
    switch (g.kind) {
      case GateKind::Input:
      case GateKind::Output: break;
      case GateKind::Add:
      case GateKind::Sub: sigma[g.out] = detail::log2_add(sigma[g.a], sigma[g.b]); break;
      case GateKind::AddConst: sigma[g.out] = detail::log2_add(sigma[g.a], half_p); break;
      case GateKind::MulConst: {
        const i64 cc = m.centered(g.constant);
        sigma[g.out] = sigma[g.a] + std::log2(static_cast<double>(std::max<i64>(1, cc < 0 ? -cc : cc)));
        break;
      }
      case GateKind::Mul:
      case GateKind::Square: {
        const double masked = fresh + mask_l1;
        sigma[g.out] = detail::log2_add(detail::log2_add(detail::log2_add(fresh, masked), masked), half_p);
        break;
      }
    }
  }
  (void)plan;
  return sigma;
}

inline void check_circuit_noise(const Circuit& c, const CircuitPlan& plan, const HeContext& he) {
  const auto sigma = circuit_noise(c, plan, he);
  for (std::size_t w = 0; w < sigma.size(); ++w) {
    if (sigma[w] + kNoiseTailFactorLog2 >= he.log2_q() - 1.0) {
      throw NoiseOverflow("wire " + std::to_string(w) + " would exhaust the ciphertext noise budget");
    }
  }
}

// ---- random circuits for testing --------------------------------------------

struct RandomCircuitSpec {
  std::size_t max_gates = 64;
  std::size_t max_mults = 16;
  std::size_t inputs = 3;
  std::size_t outputs = 1;
  u64 max_scalar = 16;  // MUL_CONST constants are drawn from [-max_scalar, max_scalar]
};

inline Circuit random_circuit(SeedStream& rng, const RandomCircuitSpec& spec, u64 p) {
  Circuit c;
  std::vector<std::uint32_t> avail;
  auto fresh_wire = [&] { return c.wires++; };
  for (std::size_t i = 0; i < spec.inputs; ++i) {
    const auto w = fresh_wire();
    c.gates.push_back({GateKind::Input, w, 0, 0, 0});
    avail.push_back(w);
  }
  const std::size_t body = spec.max_gates > spec.inputs + spec.outputs ? spec.max_gates - spec.inputs - spec.outputs : 0;
  const std::size_t gates = body == 0 ? 0 : 1 + rng.uniform(body);
  std::size_t mults = 0;
  for (std::size_t i = 0; i < gates; ++i) {
    auto pick = [&] { return avail[rng.uniform(avail.size())]; };
    Gate g;
    auto roll = rng.uniform(6);
    if (roll >= 4 && mults >= spec.max_mults) roll = rng.uniform(4);
    switch (roll) {
      case 0: g = {GateKind::Add, 0, pick(), pick(), 0}; break;
      case 1: g = {GateKind::Sub, 0, pick(), pick(), 0}; break;
      case 2: g = {GateKind::AddConst, 0, pick(), 0, rng.uniform(p)}; break;
      case 3: {
        const u64 mag = rng.uniform(spec.max_scalar + 1);
        g = {GateKind::MulConst, 0, pick(), 0, rng.bit() ? mag : (p - mag) % p};
        break;
      }
      case 4:
        g = {GateKind::Mul, 0, pick(), pick(), 0};
        ++mults;
        break;
      default: {
        const auto a = pick();
        g = {GateKind::Square, 0, a, a, 0};
        ++mults;
        break;
      }
    }
    g.out = fresh_wire();
    c.gates.push_back(g);
    avail.push_back(g.out);
  }
  for (std::size_t i = 0; i < spec.outputs; ++i) {
    // favour late wires so outputs depend on most of the circuit
    const std::size_t back = std::min<std::size_t>(avail.size(), 1 + rng.uniform(3));
    c.gates.push_back({GateKind::Output, avail[avail.size() - back], 0, 0, 0});
  }
  c.inputs = static_cast<std::uint32_t>(spec.inputs);
  c.outputs = static_cast<std::uint32_t>(spec.outputs);
  validate_circuit(c, p);
  return c;
}

}  // namespace cessmpc
