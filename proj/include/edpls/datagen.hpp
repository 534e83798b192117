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

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "edpls/dataset.hpp"
#include "edpls/error.hpp"
#include "edpls/random.hpp"
#include "edpls/types.hpp"

// Simulated spectra for two data holders that share an analyte and one
// interferent and each own one unique narrow interferent.
namespace edpls {

struct SignalSpec {
  double mu = 0.0;     // center, channel index
  double sigma = 1.0;  // width, channels
  double h = 1.0;      // height

  void validate() const {
    if (!(sigma > 0.0)) throw ArgumentError("signal: sigma must be > 0");
    if (!(h > 0.0)) throw ArgumentError("signal: height must be > 0");
  }
};

// Analyte, shared interferent, holder-1 interferent, holder-2 interferent.
inline constexpr std::array<SignalSpec, 4> kSimulatedSignals{{
    {50.0, 15.0, 8.0},
    {70.0, 10.0, 10.0},
    {40.0, 1.0, 0.5},
    {30.0, 1.0, 0.5},
}};

inline constexpr double kConcentrationMax = 10.0;

// s_i = h exp(-(i - mu)^2 / (2 sigma^2)), i = 0..m-1.
inline Vector gaussian_signal(Index m, const SignalSpec& spec) {
  if (m < 1) throw ArgumentError("gaussian_signal: m must be >= 1");
  spec.validate();
  Vector s(m);
  for (Index i = 0; i < m; ++i) {
    const double z = (static_cast<double>(i) - spec.mu) / spec.sigma;
    s[i] = spec.h * std::exp(-0.5 * z * z);
  }
  return s;
}

struct TwoHolderData {
  Dataset holder1;
  Dataset holder2;
};

// X1 = [c1 c2 c3][s1 s2 s3]^T, y1 = c1 and X2 = [c1 c2 c4][s1 s2 s4]^T,
// y2 = c1, with concentrations uniform on [0, 10) and drawn independently for
// each holder. Draw order: holder 1 columns c1, c2, c3, then holder 2 columns
// c1, c2, c4, each column filled sample by sample.
inline TwoHolderData simulate_two_holders(Index n, Index m, RngStream& rng) {
  if (n < 2) throw ArgumentError("simulate_two_holders: n must be >= 2");
  if (m < 1) throw ArgumentError("simulate_two_holders: m must be >= 1");
  Matrix S(m, 4);
  for (int j = 0; j < 4; ++j) {
    S.col(j) = gaussian_signal(m, kSimulatedSignals[static_cast<std::size_t>(j)]);
  }
  auto holder = [&](int unique_signal) {
    Matrix C(n, 3);
    for (int j = 0; j < 3; ++j) {
      for (Index i = 0; i < n; ++i) C(i, j) = rng.uniform(0.0, kConcentrationMax);
    }
    Matrix S_h(m, 3);
    S_h.col(0) = S.col(0);
    S_h.col(1) = S.col(1);
    S_h.col(2) = S.col(unique_signal);
    return Dataset(C * S_h.transpose(), C.col(0));
  };
  TwoHolderData out;
  out.holder1 = holder(2);
  out.holder2 = holder(3);
  return out;
}

// Sample-wise stacking [X1; X2], [y1; y2]. Centered inputs are uncentered
// first; the result is uncentered. A dataset with no rows is an identity.
inline Dataset concat_rows(const Dataset& d1, const Dataset& d2) {
  if (d2.empty()) return uncenter(d1);
  if (d1.empty()) return uncenter(d2);
  if (d1.channels() != d2.channels()) {
    throw ShapeError("concat_rows: channel counts differ (" +
                     std::to_string(d1.channels()) + " vs " +
                     std::to_string(d2.channels()) + ")");
  }
  const Dataset a = uncenter(d1);
  const Dataset b = uncenter(d2);
  Matrix X(a.samples() + b.samples(), a.channels());
  X << a.X, b.X;
  Vector y(a.y.size() + b.y.size());
  y << a.y, b.y;
  return Dataset(std::move(X), std::move(y));
}

}  // namespace edpls
