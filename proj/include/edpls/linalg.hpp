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
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "edpls/error.hpp"
#include "edpls/types.hpp"

namespace edpls {

// Systems whose reciprocal condition estimate falls below this are rejected.
inline constexpr double kMinReciprocalCondition = 1e-13;

// Solves A X = B with partial-pivoting LU. Throws SingularSystemError carrying
// the estimated (1-norm) condition number when A is numerically singular.
template <typename Rhs>
Eigen::Matrix<double, Eigen::Dynamic, Rhs::ColsAtCompileTime> solve_checked(
    const Eigen::MatrixXd& A, const Rhs& B, const std::string& what,
    int components = -1) {
  if (A.rows() != A.cols() || A.rows() != B.rows()) {
    throw ShapeError(what + ": system dimensions do not agree");
  }
  if (A.rows() == 0) {
    return Eigen::Matrix<double, Eigen::Dynamic, Rhs::ColsAtCompileTime>(
        0, B.cols());
  }
  if (!A.allFinite()) {
    throw SingularSystemError(what + ": matrix has non-finite entries",
                              std::numeric_limits<double>::infinity(),
                              components);
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > kMinReciprocalCondition)) {
    const double cond = rcond > 0.0 ? 1.0 / rcond
                                    : std::numeric_limits<double>::infinity();
    std::ostringstream msg;
    msg << what << ": singular " << A.rows() << "x" << A.cols()
        << " system (condition estimate " << cond << ")";
    throw SingularSystemError(msg.str(), cond, components);
  }
  return lu.solve(B);
}

// Symmetric positive-definite band matrix with half-bandwidth `bandwidth`,
// stored by lower diagonals: band_[d][i] = A(i + d, i).
class BandedSpdMatrix {
 public:
  BandedSpdMatrix(Index n, Index bandwidth)
      : n_(n),
        bandwidth_(bandwidth),
        band_(static_cast<std::size_t>(bandwidth + 1),
              std::vector<double>(static_cast<std::size_t>(n), 0.0)) {}

  Index size() const { return n_; }
  Index bandwidth() const { return bandwidth_; }

  // Entry (row, col) with |row - col| <= bandwidth.
  double& at(Index row, Index col) {
    if (row < col) std::swap(row, col);
    return band_[static_cast<std::size_t>(row - col)]
                [static_cast<std::size_t>(col)];
  }
  double at(Index row, Index col) const {
    if (row < col) std::swap(row, col);
    if (row - col > bandwidth_) return 0.0;
    return band_[static_cast<std::size_t>(row - col)]
                [static_cast<std::size_t>(col)];
  }

  // In-place banded Cholesky (A = L L^T) followed by two triangular solves.
  Vector solve(const Vector& rhs) const {
    if (rhs.size() != n_) throw ShapeError("banded solve: rhs length mismatch");
    auto L = band_;
    auto l = [&](Index r, Index c) -> double& {
      return L[static_cast<std::size_t>(r - c)][static_cast<std::size_t>(c)];
    };
    for (Index j = 0; j < n_; ++j) {
      double diag = l(j, j);
      for (Index k = std::max<Index>(0, j - bandwidth_); k < j; ++k) {
        diag -= l(j, k) * l(j, k);
      }
      if (!(diag > 0.0) || !std::isfinite(diag)) {
        throw NumericalError("banded solve: matrix not positive definite at row " +
                             std::to_string(j));
      }
      const double ljj = std::sqrt(diag);
      l(j, j) = ljj;
      for (Index i = j + 1; i <= std::min(n_ - 1, j + bandwidth_); ++i) {
        double v = l(i, j);
        for (Index k = std::max<Index>(0, i - bandwidth_); k < j; ++k) {
          v -= l(i, k) * l(j, k);
        }
        l(i, j) = v / ljj;
      }
    }
    Vector x = rhs;
    for (Index i = 0; i < n_; ++i) {
      double v = x[i];
      for (Index k = std::max<Index>(0, i - bandwidth_); k < i; ++k) {
        v -= l(i, k) * x[k];
      }
      x[i] = v / l(i, i);
    }
    for (Index i = n_ - 1; i >= 0; --i) {
      double v = x[i];
      for (Index k = i + 1; k <= std::min(n_ - 1, i + bandwidth_); ++k) {
        v -= l(k, i) * x[k];
      }
      x[i] = v / l(i, i);
    }
    return x;
  }

 private:
  Index n_;
  Index bandwidth_;
  std::vector<std::vector<double>> band_;
};

}  // namespace edpls
