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

#pragma once

#include <cmath>
#include <stdexcept>

#include "cessmpc/ring/modarith.hpp"

namespace cessmpc::ml {

class FixedPointOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reals as round(x * f) in Z_p, negative values wrapped.
struct FixedPointCodec {
  u64 scale = 256;  // f, a power of two
  u64 modulus = 2013265921;

  i64 half() const { return static_cast<i64>(modulus / 2); }

  i64 to_int(double x) const {
    const double v = std::nearbyint(x * static_cast<double>(scale));
    if (!std::isfinite(v) || std::fabs(v) >= static_cast<double>(half())) {
      throw FixedPointOverflow("fixed-point value out of range");
    }
    return static_cast<i64>(v);
  }

  /// Integer already at some power of the scale (e.g. a bias at f^2).
  u64 wrap(i64 v) const {
    if (v >= half() || v <= -half()) throw FixedPointOverflow("fixed-point value out of range");
    return v < 0 ? modulus - static_cast<u64>(-v) : static_cast<u64>(v);
  }

  u64 encode(double x) const { return wrap(to_int(x)); }

  i64 lift(u64 residue) const {
    const u64 r = residue % modulus;
    return r > modulus / 2 ? static_cast<i64>(r) - static_cast<i64>(modulus) : static_cast<i64>(r);
  }

  double decode(u64 residue, unsigned power = 1) const {
    return static_cast<double>(lift(residue)) / std::pow(static_cast<double>(scale), power);
  }
};

}  // namespace cessmpc::ml
