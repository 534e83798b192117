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
#include <limits>
#include <string>

#include "edpls/error.hpp"
#include "edpls/linalg.hpp"
#include "edpls/types.hpp"

// Recovery of another data holder's unique variability from shared model
// components: project the global weights (or loadings) off the span of a
// locally fitted model's weights; what remains lies in directions only the
// other holder's data can explain.
namespace edpls {

inline constexpr double kAttackRankTolerance = 1e-10;

struct AttackReport {
  Matrix w_perp;
  Vector per_component_similarity;
  Index component_argmax = 0;
};

// W_global - W_local (W_local^T W_local)^{-1} W_local^T W_global.
inline Matrix orthogonal_complement_weights(const Matrix& W_global,
                                            const Matrix& W_local) {
  if (W_global.rows() != W_local.rows()) {
    throw ShapeError("orthogonal_complement_weights: global has " +
                     std::to_string(W_global.rows()) + " rows, local has " +
                     std::to_string(W_local.rows()));
  }
  if (W_local.cols() == 0) return W_global;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(W_local);
  qr.setThreshold(kAttackRankTolerance);
  if (qr.rank() < W_local.cols()) {
    throw SingularSystemError(
        "orthogonal_complement_weights: local matrix has rank " +
            std::to_string(qr.rank()) + " < " + std::to_string(W_local.cols()) +
            " columns; prune dependent columns",
        std::numeric_limits<double>::infinity());
  }
  const Eigen::MatrixXd gram = W_local.transpose() * W_local;
  const Eigen::MatrixXd coef =
      solve_checked(gram, Eigen::MatrixXd(W_local.transpose() * W_global),
                    "orthogonal_complement_weights");
  return W_global - W_local * coef;
}

// Runs the projection and scores each remaining column by its absolute
// cosine with `truth_signal`. Columns that vanish (norm at or below 1e-12 of
// the matching global column) score 0.
inline AttackReport attack_and_score(const Matrix& W_global,
                                     const Matrix& W_local,
                                     const Vector& truth_signal) {
  if (truth_signal.size() != W_global.rows()) {
    throw ShapeError("attack_and_score: truth signal has " +
                     std::to_string(truth_signal.size()) + " entries, expected " +
                     std::to_string(W_global.rows()));
  }
  const double truth_norm = truth_signal.norm();
  if (!(truth_norm > 0.0)) {
    throw ArgumentError("attack_and_score: truth signal must be nonzero");
  }

  AttackReport report;
  report.w_perp = orthogonal_complement_weights(W_global, W_local);
  const Index k = report.w_perp.cols();
  report.per_component_similarity = Vector::Zero(k);
  for (Index j = 0; j < k; ++j) {
    const double norm = report.w_perp.col(j).norm();
    const double reference = W_global.col(j).norm();
    if (!(norm > 1e-12 * reference) || norm == 0.0) continue;
    const double cosine =
        report.w_perp.col(j).dot(truth_signal) / (norm * truth_norm);
    report.per_component_similarity[j] = std::min(1.0, std::abs(cosine));
  }
  if (k > 0) report.per_component_similarity.maxCoeff(&report.component_argmax);
  return report;
}

}  // namespace edpls
