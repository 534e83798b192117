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
#include <string>
#include <vector>

#include "edpls/dataset.hpp"
#include "edpls/error.hpp"
#include "edpls/linalg.hpp"
#include "edpls/mechanism.hpp"
#include "edpls/privacy.hpp"
#include "edpls/random.hpp"
#include "edpls/types.hpp"

namespace edpls {

struct FitConfig {
  int k = 1;
  // Absent: ordinary (non-private) PLS1.
  std::optional<PrivacyBudget> privacy;
  RngStream rng;
  // Extraction stops once ||E^T f|| drops below this fraction of the initial
  // ||X^T y||.
  double residual_tolerance = 1e-12;
  // Multiplies every calibrated sigma before sampling. Only meant for
  // diagnostics: 0 turns a private fit into a noise-free one while keeping the
  // calibration log.
  double noise_scale = 1.0;
};

struct PlsModel {
  Matrix W;  // m x k weights, unit columns
  Matrix P;  // m x k X-loadings
  Vector c;  // k Y-loadings
  Matrix T;  // n x k scores, unit columns
  Vector b;  // m regression coefficients (centered scale)
  int k = 0;
  int requested_k = 0;
  bool early_stopped = false;
  Vector x_means;
  double y_mean = 0.0;
  std::optional<PrivacyBudget> privacy;
  std::vector<NoiseCalibration> calibration_log;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  Index channels() const { return b.size(); }
};

// b = W (P^T W)^{-1} c, via a k x k LU solve.
inline Vector regression_coefficients(const Matrix& W, const Matrix& P,
                                      const Vector& c, int components = -1) {
  if (W.rows() != P.rows() || W.cols() != P.cols() || W.cols() != c.size()) {
    throw ShapeError("regression_coefficients: W, P and c dimensions disagree");
  }
  if (W.cols() == 0) return Vector::Zero(W.rows());
  const Eigen::MatrixXd PtW = P.transpose() * W;
  const Vector z = solve_checked(PtW, c, "regression_coefficients",
                                 components >= 0 ? components
                                                 : static_cast<int>(W.cols()));
  return W * z;
}

namespace detail {

inline Vector unit(const Vector& v, const char* what) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw NumericalError(std::string("fit: cannot normalize ") + what +
                         " (norm " + std::to_string(norm) + ")");
  }
  return v / norm;
}

// Releases `value` through the Gaussian mechanism (or unchanged without a
// budget) and records the calibration.
class Releaser {
 public:
  Releaser(const FitConfig& cfg, std::vector<NoiseCalibration>& log)
      : cfg_(cfg), rng_(cfg.rng), log_(log) {}

  Vector release(const Vector& value, double sensitivity, NoiseTarget target) {
    if (!cfg_.privacy) return value;
    const NoiseCalibration cal =
        analytic_gaussian_sigma(sensitivity, *cfg_.privacy, target);
    log_.push_back(cal);
    return value + gaussian_vector(value.size(), cal.sigma * cfg_.noise_scale,
                                   rng_);
  }

  double release(double value, double sensitivity, NoiseTarget target) {
    Vector v(1);
    v[0] = value;
    return release(v, sensitivity, target)[0];
  }

 private:
  const FitConfig& cfg_;
  RngStream rng_;
  std::vector<NoiseCalibration>& log_;
};

}  // namespace detail

// PLS1 fit with optional (epsilon, delta) Gaussian mechanisms on weights,
// scores, X-loadings and Y-loading of every component.
//
// Noise is added to the released copies only; deflation always uses the
// non-private scores and loadings. Released weights and scores are
// renormalized to unit length after noise addition, and the same
// renormalization runs on the noise-free path so both are bit-identical when
// no noise is drawn.
inline PlsModel fit(const Dataset& data, const FitConfig& cfg) {
  const Dataset d = data.centered ? data : mean_center(data);
  require_trainable(d, "fit");
  const Index n = d.samples();
  const Index m = d.channels();
  if (cfg.k < 1 || cfg.k > std::min<Index>(n - 1, m)) {
    throw ArgumentError("fit: k = " + std::to_string(cfg.k) +
                        " outside [1, min(n-1, m)] = [1, " +
                        std::to_string(std::min<Index>(n - 1, m)) + "]");
  }
  if (!(cfg.residual_tolerance > 0.0)) {
    throw ArgumentError("fit: residual_tolerance must be positive");
  }
  if (!(cfg.noise_scale >= 0.0)) {
    throw ArgumentError("fit: noise_scale must be >= 0");
  }

  PlsModel model;
  model.requested_k = cfg.k;
  model.privacy = cfg.privacy;
  model.seed = cfg.rng.seed();
  model.stream_id = cfg.rng.stream_id();
  model.x_means = d.x_means ? *d.x_means : Vector::Zero(m);
  model.y_mean = d.y_mean.value_or(0.0);

  Matrix W(m, cfg.k), P(m, cfg.k), T(n, cfg.k);
  Vector c(cfg.k);
  detail::Releaser releaser(cfg, model.calibration_log);

  Matrix E = d.X;
  Vector f = d.y;
  const double initial_cov = (E.transpose() * f).norm();
  if (!(initial_cov > 0.0)) {
    throw DegenerateInputError(
        "fit: X^T y vanishes after centering (constant response or predictors)");
  }
  int extracted = 0;
  for (int j = 0; j < cfg.k; ++j) {
    const Vector cov = E.transpose() * f;
    const double cov_norm = cov.norm();
    if (!(cov_norm > cfg.residual_tolerance * initial_cov)) {
      model.early_stopped = true;
      break;
    }
    const Vector w = cov / cov_norm;
    const SampleBounds bounds = sample_bounds(E, f);

    const Vector w_rel = detail::unit(
        releaser.release(w, sensitivity_weights(bounds), NoiseTarget::kWeights),
        "released weights");

    const Vector t = detail::unit(E * w, "scores");
    const Vector t_rel = detail::unit(
        releaser.release(t, sensitivity_scores(bounds), NoiseTarget::kScores),
        "released scores");

    const double tt = t.squaredNorm();
    const Vector p = E.transpose() * t / tt;
    const double q = f.dot(t) / tt;
    const Vector p_rel =
        releaser.release(p, sensitivity_xloadings(bounds), NoiseTarget::kXLoadings);
    const double q_rel =
        releaser.release(q, sensitivity_yloading(bounds), NoiseTarget::kYLoading);

    E.noalias() -= t * p.transpose();
    f -= t * q;

    W.col(j) = w_rel;
    T.col(j) = t_rel;
    P.col(j) = p_rel;
    c[j] = q_rel;
    ++extracted;
  }

  model.k = extracted;
  model.W = W.leftCols(extracted);
  model.P = P.leftCols(extracted);
  model.T = T.leftCols(extracted);
  model.c = c.head(extracted);
  model.b = regression_coefficients(model.W, model.P, model.c, extracted);
  return model;
}

// y_hat = (X - x_means) b + y_mean, row-wise.
inline Vector predict(const PlsModel& model, const Matrix& X) {
  if (X.cols() != model.channels()) {
    throw ShapeError("predict: expected " + std::to_string(model.channels()) +
                     " channels, got " + std::to_string(X.cols()));
  }
  const Matrix centered = X.rowwise() - model.x_means.transpose();
  return (centered * model.b).array() + model.y_mean;
}

}  // namespace edpls
