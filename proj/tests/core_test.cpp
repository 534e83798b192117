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

#include <cmath>
#include <set>

#include "edpls/dataset.hpp"
#include "edpls/linalg.hpp"
#include "edpls/random.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace edpls {
namespace {

using testing::random_matrix;
using testing::random_vector;

TEST(MeanCenterTest, TwoPointSymmetry) {
  Matrix X(2, 1);
  X << 1, 3;
  Vector y(2);
  y << 2, 4;
  const Dataset c = mean_center(Dataset(X, y));
  EXPECT_TRUE(c.centered);
  EXPECT_DOUBLE_EQ(c.X(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(c.X(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(c.y[0], -1.0);
  EXPECT_DOUBLE_EQ(c.y[1], 1.0);
  EXPECT_DOUBLE_EQ((*c.x_means)[0], 2.0);
  EXPECT_DOUBLE_EQ(*c.y_mean, 3.0);
}

TEST(MeanCenterTest, AlreadyCenteredDataIsUnchanged) {
  Matrix X(3, 2);
  X << -1, 2, 0, 0, 1, -2;
  Vector y(3);
  y << 0.5, 0.0, -0.5;
  const Dataset c = mean_center(Dataset(X, y));
  EXPECT_TRUE(c.X.isApprox(X));
  EXPECT_TRUE(c.y.isApprox(y));
  EXPECT_NEAR(c.x_means->cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_NEAR(*c.y_mean, 0.0, 1e-15);
}

TEST(MeanCenterTest, RandomColumnMeansVanish) {
  const Dataset c =
      mean_center(Dataset(random_matrix(20, 5, 3, -10, 10), random_vector(20, 3)));
  for (Index j = 0; j < 5; ++j) {
    double sum = 0.0;
    for (Index i = 0; i < 20; ++i) sum += c.X(i, j);
    EXPECT_LT(std::abs(sum / 20.0), 1e-12);
  }
  EXPECT_LT(std::abs(c.y.sum() / 20.0), 1e-12);
}

TEST(MeanCenterTest, RoundTripRecoversOriginal) {
  const Matrix X = random_matrix(15, 7, 11, -5, 20);
  const Vector y = random_vector(15, 11, 0, 100);
  const Dataset back = uncenter(mean_center(Dataset(X, y)));
  EXPECT_FALSE(back.centered);
  EXPECT_LT((back.X - X).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((back.y - y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MeanCenterTest, Errors) {
  EXPECT_THROW(mean_center(Dataset(Matrix::Ones(1, 3), Vector::Ones(1))),
               DegenerateInputError);
  const Dataset c = mean_center(Dataset(Matrix::Ones(3, 2), Vector::Ones(3)));
  EXPECT_THROW(mean_center(c), StateError);
  EXPECT_THROW(Dataset(Matrix::Ones(3, 2), Vector::Ones(4)), ShapeError);
}

TEST(RngStreamTest, MatchesDocumentedAlgorithm) {
  // Values from an independent Python implementation of the documented
  // counter-based SplitMix64 construction.
  RngStream rng(42, 0);
  EXPECT_EQ(rng.next_u64(), 0xca685846b557f0fcULL);
  EXPECT_EQ(rng.next_u64(), 0x0d5ec61fa641d02eULL);
  EXPECT_EQ(rng.next_u64(), 0x45d46229cc936c2bULL);

  RngStream u(42, 0);
  EXPECT_EQ(u.uniform(), 0.7906546757343162);
  EXPECT_EQ(u.uniform(), 0.052227385260500414);

  RngStream g(7, 3);
  EXPECT_NEAR(g.normal(), 1.0698245178541951, 1e-15);
  EXPECT_NEAR(g.normal(), -0.85039573380394312, 1e-15);
}

TEST(RngStreamTest, DerivedStreamsDiffer) {
  const RngStream base(5, 0);
  RngStream a = base.derive(0), b = base.derive(1), c = base.derive(0);
  const auto xa = a.next_u64();
  EXPECT_NE(xa, b.next_u64());
  EXPECT_EQ(xa, c.next_u64());
  EXPECT_EQ(a.seed(), 5u);
}

TEST(RngStreamTest, PermutationIsBijection) {
  RngStream rng(9);
  const auto perm = random_permutation(57, rng);
  std::set<Index> seen(perm.begin(), perm.end());
  EXPECT_EQ(seen.size(), 57u);
  EXPECT_EQ(*seen.begin(), 0);
  EXPECT_EQ(*seen.rbegin(), 56);
}

TEST(RngStreamTest, UniformIndexStaysInRange) {
  RngStream rng(1);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(rng.uniform_index(7), 7u);
  EXPECT_THROW(rng.uniform_index(0), ArgumentError);
}

TEST(GaussianVectorTest, ZeroSigmaGivesZeros) {
  RngStream rng(123);
  const Vector v = gaussian_vector(5, 0.0, rng);
  EXPECT_EQ(v, Vector::Zero(5));
}

TEST(GaussianVectorTest, SampleStandardDeviation) {
  RngStream rng(42);
  const Vector v = gaussian_vector(100000, 1.0, rng);
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().sum() / (v.size() - 1));
  EXPECT_NEAR(sd, 1.0, 0.01);
  EXPECT_NEAR(mean, 0.0, 0.01);
}

TEST(GaussianVectorTest, Deterministic) {
  RngStream a(8, 2), b(8, 2);
  EXPECT_EQ(gaussian_vector(64, 2.5, a), gaussian_vector(64, 2.5, b));
}

TEST(GaussianVectorTest, NegativeSigmaRejected) {
  RngStream rng(1);
  EXPECT_THROW(gaussian_vector(3, -1.0, rng), ArgumentError);
  EXPECT_THROW(gaussian_vector(3, std::nan(""), rng), ArgumentError);
}

TEST(SolveCheckedTest, SolvesWellConditionedSystem) {
  Eigen::MatrixXd A(2, 2);
  A << 4, 1, 2, 3;
  Vector b(2);
  b << 1, 2;
  const Vector x = solve_checked(A, b, "test");
  EXPECT_LT((A * x - b).norm(), 1e-14);
}

TEST(SolveCheckedTest, SingularSystemReportsCondition) {
  Eigen::MatrixXd A(2, 2);
  A << 1, 2, 2, 4;
  try {
    solve_checked(A, Vector::Ones(2), "test", 2);
    FAIL() << "expected SingularSystemError";
  } catch (const SingularSystemError& e) {
    EXPECT_GT(e.condition_estimate(), 1e12);
    EXPECT_EQ(e.components(), 2);
  }
}

TEST(BandedSpdMatrixTest, MatchesDenseSolve) {
  for (Index bw : {1, 2, 3}) {
    const Index n = 30;
    BandedSpdMatrix band(n, bw);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    const Matrix R = random_matrix(n, bw + 1, 77 + bw);
    for (Index i = 0; i < n; ++i) {
      for (Index d = 1; d <= bw && i + d < n; ++d) {
        band.at(i + d, i) = R(i, d);
        dense(i + d, i) = dense(i, i + d) = R(i, d);
      }
      band.at(i, i) = 2.0 * bw + 1.0 + R(i, 0);
      dense(i, i) = band.at(i, i);
    }
    const Vector rhs = random_vector(n, 5);
    const Vector x = band.solve(rhs);
    const Vector expected = dense.llt().solve(rhs);
    EXPECT_LT((x - expected).cwiseAbs().maxCoeff(), 1e-12) << "bandwidth " << bw;
  }
}

TEST(BandedSpdMatrixTest, IndefiniteMatrixFails) {
  BandedSpdMatrix band(3, 1);
  band.at(0, 0) = 1;
  band.at(1, 1) = -1;
  band.at(2, 2) = 1;
  EXPECT_THROW(band.solve(Vector::Ones(3)), NumericalError);
}

}  // namespace
}  // namespace edpls
