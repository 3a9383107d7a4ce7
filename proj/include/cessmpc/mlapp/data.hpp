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

// Numeric CSV datasets, train/test splits and a plaintext logistic
// regression trainer.

#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cessmpc/common/crypto.hpp"

namespace cessmpc::ml {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  std::vector<std::string> features;
  std::vector<std::vector<double>> x;
  std::vector<int> y;

  std::size_t rows() const { return x.size(); }
  std::size_t dims() const { return features.size(); }

  Dataset subset(const std::vector<std::size_t>& idx) const {
    Dataset d;
    d.features = features;
    for (auto i : idx) {
      d.x.push_back(x.at(i));
      d.y.push_back(y.at(i));
    }
    return d;
  }
};

struct Split {
  std::vector<std::size_t> train, test;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, std::size_t row) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DataError("row " + std::to_string(row) + ": not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw DataError("row " + std::to_string(row) + ": bad number '" + s + "'");
  return v;
}

}  // namespace detail

/// Header row of feature names then `label`; every row has the same arity.
/// `expected_dims` of 0 accepts any width.
inline Dataset parse_csv(std::istream& in, std::size_t expected_dims = 0) {
  Dataset d;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header.back() != "label") throw DataError("header must end with a 'label' column");
  header.pop_back();
  d.features = header;
  if (expected_dims && d.dims() != expected_dims) {
    throw DataError("expected " + std::to_string(expected_dims) + " features, header has " + std::to_string(d.dims()));
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != d.dims() + 1) throw DataError("row " + std::to_string(row) + ": wrong number of columns");
    std::vector<double> v;
    for (std::size_t j = 0; j < d.dims(); ++j) v.push_back(detail::parse_number(cells[j], row));
    const double label = detail::parse_number(cells.back(), row);
    if (label != 0 && label != 1) throw DataError("row " + std::to_string(row) + ": label must be 0 or 1");
    d.x.push_back(std::move(v));
    d.y.push_back(static_cast<int>(label));
  }
  return d;
}

inline Dataset load_csv(const std::string& path, std::size_t expected_dims = 0) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return parse_csv(in, expected_dims);
}

inline void write_csv(std::ostream& out, const Dataset& d) {
  for (const auto& f : d.features) out << f << ',';
  out << "label\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (auto v : d.x[i]) out << v << ',';
    out << d.y[i] << '\n';
  }
}

/// First `train` rows of each class (file order) for training, the next `test` for testing.
inline Split per_class_split(const Dataset& d, std::size_t train, std::size_t test) {
  Split s;
  for (int cls : {0, 1}) {
    std::size_t seen = 0;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      if (d.y[i] != cls) continue;
      if (seen < train) {
        s.train.push_back(i);
      } else if (seen < train + test) {
        s.test.push_back(i);
      }
      ++seen;
    }
    if (seen < train + test) throw DataError("class " + std::to_string(cls) + " has too few rows for the split");
  }
  return s;
}

/// Seeded Fisher-Yates shuffle, then the first `train_fraction` of rows train.
inline Split shuffled_split(const Dataset& d, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(d.rows());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  SeedStream rng(derive_seed(seed_from_u64(seed), "split"));
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform(i)]);
  const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(d.rows())));
  Split s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end());
  return s;
}

// ---- logistic regression --------------------------------------------------------

struct LinearModel {
  std::vector<double> w;
  double b = 0;
  std::vector<double> mean, stddev;

  std::size_t dims() const { return w.size(); }

  std::vector<double> standardize(const std::vector<double>& row) const {
    if (row.size() != dims()) throw DataError("row has the wrong number of features");
    std::vector<double> z(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) z[j] = (row[j] - mean[j]) / stddev[j];
    return z;
  }

  double logit(const std::vector<double>& row) const {
    const auto z = standardize(row);
    double s = b;
    for (std::size_t j = 0; j < z.size(); ++j) s += w[j] * z[j];
    return s;
  }
};

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 2000;
  double l2 = 1e-3;
  std::uint64_t seed = 1;
};

/// Full-batch gradient descent on standardized features.
inline LinearModel train_logreg(const Dataset& train, const TrainConfig& cfg = {}) {
  if (train.rows() == 0) throw DataError("empty training split");
  const std::size_t d = train.dims();
  LinearModel m;
  m.mean.assign(d, 0);
  m.stddev.assign(d, 0);
  const double rows = static_cast<double>(train.rows());
  for (const auto& r : train.x) {
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += r[j] / rows;
  }
  for (const auto& r : train.x) {
    for (std::size_t j = 0; j < d; ++j) m.stddev[j] += (r[j] - m.mean[j]) * (r[j] - m.mean[j]) / rows;
  }
  for (auto& s : m.stddev) s = s > 0 ? std::sqrt(s) : 1.0;

  std::vector<std::vector<double>> z;
  for (const auto& r : train.x) {
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j) row[j] = (r[j] - m.mean[j]) / m.stddev[j];
    z.push_back(std::move(row));
  }
  SeedStream rng(derive_seed(seed_from_u64(cfg.seed), "logreg-init"));
  m.w.resize(d);
  for (auto& w : m.w) w = (static_cast<double>(rng.uniform(2001)) - 1000.0) * 1e-5;

  std::vector<double> grad(d);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      double s = m.b;
      for (std::size_t j = 0; j < d; ++j) s += m.w[j] * z[i][j];
      const double err = 1.0 / (1.0 + std::exp(-s)) - train.y[i];
      for (std::size_t j = 0; j < d; ++j) grad[j] += err * z[i][j] / rows;
      grad_b += err / rows;
    }
    for (std::size_t j = 0; j < d; ++j) m.w[j] -= cfg.learning_rate * (grad[j] + cfg.l2 * m.w[j]);
    m.b -= cfg.learning_rate * grad_b;
    if (!std::isfinite(m.b)) throw DataError("training diverged");
  }
  for (auto w : m.w) {
    if (!std::isfinite(w)) throw DataError("training diverged");
  }
  return m;
}

/// 1 iff sigmoid(logit) >= 1/2, i.e. logit >= 0.
inline int threshold_label(double logit) { return logit >= 0 ? 1 : 0; }

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw DataError("accuracy: length mismatch");
  if (truth.empty()) return 0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

}  // namespace cessmpc::ml
