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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "edpls/error.hpp"
#include "edpls/privacy.hpp"
#include "edpls/types.hpp"

// Sensitivity bounds for the four released PLS quantities and Gaussian noise
// calibration.
//
// The suprema are estimated from the observed residuals (largest row norm,
// largest |response|), so the sensitivities are data dependent. This follows
// the published procedure; it is not a worst-case bound over all possible
// datasets unless the inputs are clipped to those norms beforehand.
namespace edpls {

struct SampleBounds {
  double max_row_norm = 0.0;  // max_i ||E_i||_2
  double y_max_abs = 0.0;     // max_i |f_i|
};

inline SampleBounds sample_bounds(const Matrix& E, const Vector& f) {
  if (E.rows() == 0 || E.cols() == 0 || f.size() == 0) {
    throw DegenerateInputError("sample_bounds: empty residuals");
  }
  if (E.rows() != f.size()) {
    throw ShapeError("sample_bounds: E has " + std::to_string(E.rows()) +
                     " rows but f has " + std::to_string(f.size()));
  }
  SampleBounds b;
  b.max_row_norm = E.rowwise().norm().maxCoeff();
  b.y_max_abs = f.cwiseAbs().maxCoeff();
  return b;
}

// Bound on the change of E^T f when one (x, y) pair is removed: sup |y| ||x||.
inline double sensitivity_weights(const SampleBounds& b) {
  return b.y_max_abs * b.max_row_norm;
}

// |x^T w| <= ||x|| for unit w.
inline double sensitivity_scores(const SampleBounds& b) {
  return b.max_row_norm;
}

// |t_i| <= 1 for unit t, so ||t_i x_i|| <= ||x_i||.
inline double sensitivity_xloadings(const SampleBounds& b) {
  return b.max_row_norm;
}

inline double sensitivity_yloading(const SampleBounds& b) {
  return b.y_max_abs;
}

// Standard normal CDF. std::erfc is accurate to a few ulp over the whole real
// line, including the lower tail where Phi itself is tiny.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// log Phi(x), finite far into the lower tail where Phi underflows.
inline double log_normal_cdf(double x) {
  if (x > -30.0) {
    if (x > 5.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
    return std::log(normal_cdf(x));
  }
  // Mills-ratio asymptotic series; the truncation error is below 1e-12
  // relative for x <= -30.
  const double z2 = x * x;
  const double series =
      1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2) +
      105.0 / (z2 * z2 * z2 * z2);
  return -0.5 * z2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log(series);
}

// Noise scale of the classic Gaussian mechanism,
//   sigma = delta_f * sqrt(2 ln(1.25 / delta)) / epsilon.
// The guarantee only holds for epsilon <= 1; see classic_guarantee_holds.
inline double classic_gaussian_sigma(double delta_f, const PrivacyBudget& budget) {
  if (!(delta_f >= 0.0) || !std::isfinite(delta_f)) {
    throw ArgumentError("classic_gaussian_sigma: sensitivity must be finite and >= 0");
  }
  return delta_f * std::sqrt(2.0 * std::log(1.25 / budget.delta())) /
         budget.epsilon();
}

inline bool classic_guarantee_holds(const PrivacyBudget& budget) {
  return budget.epsilon() <= 1.0;
}

// Smallest delta for which a Gaussian mechanism with noise scale `sigma` and
// L2 sensitivity `delta_f` is (epsilon, delta)-DP:
//   Phi(D/(2s) - e s/D) - exp(e) Phi(-D/(2s) - e s/D).
// Strictly decreasing in sigma.
inline double gaussian_privacy_profile(double sigma, double delta_f,
                                       double epsilon) {
  if (!(sigma > 0.0) || !(delta_f > 0.0) || !(epsilon > 0.0)) {
    throw ArgumentError(
        "gaussian_privacy_profile: sigma, sensitivity and epsilon must be > 0");
  }
  const double a = delta_f / (2.0 * sigma);
  const double b = epsilon * sigma / delta_f;
  if (std::isinf(a)) return 1.0;
  if (std::isinf(b)) return 0.0;
  const double first = normal_cdf(a - b);
  // exp(epsilon) * Phi(-a - b) evaluated in log space; exp(epsilon) alone
  // overflows for epsilon > ~709.
  const double second = std::exp(epsilon + log_normal_cdf(-a - b));
  return std::max(0.0, first - second);
}

inline constexpr double kAnalyticRelativeTolerance = 1e-9;
inline constexpr int kAnalyticMaxBisections = 200;

// Minimal sigma with gaussian_privacy_profile(sigma) <= delta, by bracketing
// and bisection on the monotone profile. The returned sigma is always on the
// feasible side of the bracket.
inline NoiseCalibration analytic_gaussian_sigma(
    double delta_f, const PrivacyBudget& budget,
    NoiseTarget target = NoiseTarget::kWeights) {
  if (!(delta_f >= 0.0) || !std::isfinite(delta_f)) {
    throw ArgumentError("analytic_gaussian_sigma: sensitivity must be finite and >= 0");
  }
  NoiseCalibration cal{target, delta_f, 0.0, CalibrationMethod::kAnalytic};
  if (delta_f == 0.0) return cal;

  const double eps = budget.epsilon();
  const double delta = budget.delta();
  auto feasible = [&](double sigma) {
    return gaussian_privacy_profile(sigma, delta_f, eps) <= delta;
  };

  const double classic_ratio = std::sqrt(2.0 * std::log(1.25 / delta)) / eps;
  double lo = delta_f * 1e-6;
  double hi = delta_f * std::max(10.0, 2.0 * classic_ratio);
  int steps = 0;
  while (!feasible(hi)) {
    hi *= 2.0;
    if (++steps > kAnalyticMaxBisections) {
      throw NumericalError("analytic_gaussian_sigma: no feasible upper bracket");
    }
  }
  while (feasible(lo)) {
    hi = lo;
    lo *= 0.5;
    if (++steps > kAnalyticMaxBisections || lo == 0.0) {
      throw NumericalError("analytic_gaussian_sigma: no infeasible lower bracket");
    }
  }
  for (int i = 0; i < kAnalyticMaxBisections; ++i) {
    if (hi - lo <= kAnalyticRelativeTolerance * hi) {
      cal.sigma = hi;
      return cal;
    }
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  throw NumericalError("analytic_gaussian_sigma: bisection did not converge");
}

// Classic calibration packaged as a NoiseCalibration, for comparison output.
inline NoiseCalibration classic_calibration(
    double delta_f, const PrivacyBudget& budget,
    NoiseTarget target = NoiseTarget::kWeights) {
  return {target, delta_f, classic_gaussian_sigma(delta_f, budget),
          CalibrationMethod::kClassic};
}

}  // namespace edpls
