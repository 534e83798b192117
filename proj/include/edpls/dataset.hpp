//
// Copyright 2026 The edPLS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "edpls/error.hpp"
#include "edpls/types.hpp"

namespace edpls {

// Predictor matrix X (n samples x m channels) and response y (length n).
// When `centered` is set, `x_means` and `y_mean` hold the statistics that were
// subtracted.
struct Dataset {
  Matrix X;
  Vector y;
  bool centered = false;
  std::optional<Vector> x_means;
  std::optional<double> y_mean;

  Dataset() = default;
  Dataset(Matrix x, Vector response) : X(std::move(x)), y(std::move(response)) {
    if (X.rows() != y.size()) {
      throw ShapeError("dataset: X has " + std::to_string(X.rows()) +
                       " rows but y has " + std::to_string(y.size()) +
                       " entries");
    }
  }

  Index samples() const { return X.rows(); }
  Index channels() const { return X.cols(); }
  bool empty() const { return X.rows() == 0; }
};

// Throws unless the dataset has at least two samples and one channel.
inline void require_trainable(const Dataset& d, const char* what) {
  if (d.X.rows() != d.y.size()) {
    throw ShapeError(std::string(what) + ": row count of X differs from y");
  }
  if (d.samples() < 2) {
    throw DegenerateInputError(std::string(what) +
                               ": need at least 2 samples, got " +
                               std::to_string(d.samples()));
  }
  if (d.channels() < 1) {
    throw DegenerateInputError(std::string(what) + ": need at least 1 channel");
  }
}

inline Dataset mean_center(const Dataset& d) {
  require_trainable(d, "mean_center");
  if (d.centered) {
    throw StateError("mean_center: dataset is already centered");
  }
  Dataset out;
  Vector means = d.X.colwise().mean().transpose();
  const double y_mean = d.y.mean();
  out.X = d.X.rowwise() - means.transpose();
  out.y = d.y.array() - y_mean;
  out.centered = true;
  out.x_means = std::move(means);
  out.y_mean = y_mean;
  return out;
}

// Inverse of mean_center; returns uncentered data unchanged.
inline Dataset uncenter(const Dataset& d) {
  if (!d.centered) return d;
  Dataset out;
  out.X = d.X.rowwise() + d.x_means->transpose();
  out.y = d.y.array() + *d.y_mean;
  return out;
}

inline Matrix select_rows(const Matrix& X, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Index>(i)) = X.row(rows[i]);
  }
  return out;
}

inline Vector select_rows(const Vector& y, std::span<const Index> rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[static_cast<Index>(i)] = y[rows[i]];
  }
  return out;
}

// Row subset of an uncentered dataset.
inline Dataset select_rows(const Dataset& d, std::span<const Index> rows) {
  const Dataset raw = uncenter(d);
  return Dataset(select_rows(raw.X, rows), select_rows(raw.y, rows));
}

}  // namespace edpls
