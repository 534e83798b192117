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

#include "edpls/preprocess.hpp"
#include "edpls/random.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace edpls {
namespace {

using testing::random_matrix;

Vector gaussian_peak(Index m, double center, double width, double height) {
  Vector v(m);
  for (Index i = 0; i < m; ++i) {
    const double z = (static_cast<double>(i) - center) / width;
    v[i] = height * std::exp(-0.5 * z * z);
  }
  return v;
}

Matrix smooth_rows(Index rows, Index m, std::uint64_t seed) {
  RngStream rng(seed);
  Matrix X(rows, m);
  for (Index r = 0; r < rows; ++r) {
    const double a = rng.uniform(0.5, 2.0), b = rng.uniform(-1.0, 1.0);
    const double f = rng.uniform(0.5, 3.0), ph = rng.uniform(0.0, 3.0);
    for (Index i = 0; i < m; ++i) {
      X(r, i) = a * std::sin(f * static_cast<double>(i) / static_cast<double>(m) * 6.0 + ph) + b +
                0.3 * static_cast<double>(i) / static_cast<double>(m);
    }
  }
  return X;
}

// Least-squares polynomial fit solved through the normal equations by
// Gaussian elimination, independent of the QR route in the library.
Vector normal_equation_sg_weights(int window, int order, int deriv, int position) {
  const int q = order + 1;
  std::vector<std::vector<double>> A(q, std::vector<double>(q + window, 0.0));
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j)
      for (int r = 0; r < window; ++r)
        A[i][j] += std::pow(r - position, i) * std::pow(r - position, j);
    for (int r = 0; r < window; ++r) A[i][q + r] = std::pow(r - position, i);
  }
  for (int c = 0; c < q; ++c) {
    int piv = c;
    for (int r = c + 1; r < q; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    for (int r = 0; r < q; ++r) {
      if (r == c) continue;
      const double f = A[r][c] / A[c][c];
      for (int k = c; k < q + window; ++k) A[r][k] -= f * A[c][k];
    }
  }
  double fact = 1.0;
  for (int i = 2; i <= deriv; ++i) fact *= i;
  Vector w(window);
  for (int r = 0; r < window; ++r) w[r] = fact * A[deriv][q + r] / A[deriv][deriv];
  return w;
}

TEST(SavitzkyGolayTest, KernelFiveTwoOne) {
  const Vector k = savitzky_golay_kernel(SgConfig{5, 2, 1});
  const double expected[] = {-0.2, -0.1, 0.0, 0.1, 0.2};
  ASSERT_EQ(k.size(), 5);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(k[i], expected[i], 1e-14);
}

TEST(SavitzkyGolayTest, SmoothingKernelFiveTwoZero) {
  const Vector k = savitzky_golay_kernel(SgConfig{5, 2, 0});
  const double expected[] = {-3.0 / 35, 12.0 / 35, 17.0 / 35, 12.0 / 35, -3.0 / 35};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(k[i], expected[i], 1e-14);
}

TEST(SavitzkyGolayTest, WeightsMatchNormalEquations) {
  for (const SgConfig cfg : {SgConfig{5, 2, 1}, SgConfig{7, 3, 2}, SgConfig{11, 4, 1},
                             SgConfig{9, 2, 0}}) {
    for (int pos = 0; pos < cfg.window; ++pos) {
      const Vector got = savitzky_golay_weights(cfg, pos);
      const Vector want =
          normal_equation_sg_weights(cfg.window, cfg.polyorder, cfg.derivative, pos);
      EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-10)
          << cfg.window << "," << cfg.polyorder << "," << cfg.derivative << " @" << pos;
    }
  }
}

TEST(SavitzkyGolayTest, ConstantRowHasZeroDerivative) {
  const Matrix X = Matrix::Constant(2, 12, 4.5);
  EXPECT_LT(savitzky_golay(X, SgConfig{}).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(SavitzkyGolayTest, QuadraticIsDifferentiatedExactlyEverywhere) {
  const double a = 1.5, b = -0.7, c = 0.25;
  const Index m = 15;
  Matrix X(1, m);
  for (Index i = 0; i < m; ++i) X(0, i) = a + b * i + c * i * i;
  const Matrix D = savitzky_golay(X, SgConfig{5, 2, 1});
  // One-sided edge fits reproduce the quadratic too.
  for (Index i = 0; i < m; ++i) EXPECT_NEAR(D(0, i), b + 2 * c * i, 1e-11) << i;
}

TEST(SavitzkyGolayTest, OutputKeepsShape) {
  const Matrix X = random_matrix(3, 20, 1);
  const Matrix Y = savitzky_golay(X, SgConfig{7, 3, 1});
  EXPECT_EQ(Y.rows(), 3);
  EXPECT_EQ(Y.cols(), 20);
}

TEST(SavitzkyGolayTest, Linearity) {
  const Matrix X = random_matrix(4, 30, 2);
  const Matrix Y = random_matrix(4, 30, 3);
  const SgConfig cfg{7, 2, 1};
  const Matrix lhs = savitzky_golay(2.5 * X - 0.75 * Y, cfg);
  const Matrix rhs = 2.5 * savitzky_golay(X, cfg) - 0.75 * savitzky_golay(Y, cfg);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SavitzkyGolayTest, Errors) {
  EXPECT_THROW(savitzky_golay(Matrix::Zero(1, 4), SgConfig{5, 2, 1}), ShapeError);
  EXPECT_THROW(SgConfig({4, 2, 1}).validate(), ArgumentError);
  EXPECT_THROW(SgConfig({5, 5, 1}).validate(), ArgumentError);
  EXPECT_THROW(SgConfig({5, 2, 3}).validate(), ArgumentError);
  EXPECT_THROW(SgConfig({1, 0, 0}).validate(), ArgumentError);
}

TEST(MscTest, ReferenceRowUnchanged) {
  const Matrix X = smooth_rows(5, 40, 7);
  const Vector ref = X.row(2).transpose();
  const Matrix Y = msc(X, ref);
  EXPECT_LT((Y.row(2) - X.row(2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MscTest, MeanReferenceRowUnchanged) {
  Matrix X = smooth_rows(6, 40, 8);
  const Vector mean = X.colwise().mean().transpose();
  Matrix with_mean(7, 40);
  with_mean << X, mean.transpose();
  // Appending the mean row changes nothing in the column means.
  const Matrix Y = msc(with_mean);
  EXPECT_LT((Y.row(6) - mean.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MscTest, AffineRowMapsToReference) {
  const Vector ref = smooth_rows(1, 30, 9).row(0).transpose();
  Matrix X(1, 30);
  X.row(0) = (2.0 * ref.array() + 5.0).matrix().transpose();
  const Matrix Y = msc(X, ref);
  EXPECT_LT((Y.row(0).transpose() - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MscTest, OutputsHaveUnitSlopeAndZeroIntercept) {
  const Matrix X = smooth_rows(8, 50, 10);
  const Vector ref = X.colwise().mean().transpose();
  const Matrix Y = msc(X, ref);
  const double rm = ref.mean();
  for (Index i = 0; i < Y.rows(); ++i) {
    double sxy = 0.0, sxx = 0.0;
    const double ym = Y.row(i).mean();
    for (Index j = 0; j < 50; ++j) {
      sxy += (ref[j] - rm) * (Y(i, j) - ym);
      sxx += (ref[j] - rm) * (ref[j] - rm);
    }
    const double slope = sxy / sxx;
    EXPECT_NEAR(slope, 1.0, 1e-10);
    EXPECT_NEAR(ym - slope * rm, 0.0, 1e-10);
  }
}

TEST(MscTest, IdempotentWithFixedReference) {
  const Matrix X = smooth_rows(6, 40, 11);
  const Vector ref = X.colwise().mean().transpose();
  const Matrix once = msc(X, ref);
  EXPECT_LT((msc(once, ref) - once).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(MscTest, Errors) {
  EXPECT_THROW(msc(Matrix::Ones(3, 5), Vector::Constant(5, 2.0)), DegenerateInputError);
  Matrix X = smooth_rows(3, 20, 12);
  X.row(1).setConstant(3.0);
  try {
    msc(X, Vector(smooth_rows(1, 20, 13).row(0).transpose()));
    FAIL() << "expected DegenerateInputError";
  } catch (const DegenerateInputError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
  EXPECT_THROW(msc(X, Vector::LinSpaced(19, 0, 1)), ShapeError);
}

TEST(AirPlsTest, FlatRowHasNoResidual) {
  const Matrix X = Matrix::Constant(2, 50, 3.0);
  EXPECT_LT(airpls_correct(X, AirPlsConfig{}).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(AirPlsTest, PeakOnZeroBaselineKeepsHeight) {
  const Vector peak = gaussian_peak(200, 100.0, 5.0, 10.0);
  const Vector corrected = peak - airpls_baseline(peak, AirPlsConfig{});
  EXPECT_NEAR(corrected.maxCoeff(), 10.0, 0.5);
}

TEST(AirPlsTest, DefaultsFollowMildRamp) {
  // A rise of 0.1 over the spectrum, a tenth of the peak height.
  const Index m = 200;
  const Vector peak = gaussian_peak(m, 100.0, 5.0, 1.0);
  const Vector ramp = Vector::LinSpaced(m, 0.5, 0.6);
  const Vector x = peak + ramp;
  const Vector corrected = x - airpls_baseline(x, AirPlsConfig{});
  EXPECT_LT((corrected - peak).cwiseAbs().maxCoeff(), 0.05);
}

TEST(AirPlsTest, SecondOrderPenaltyRemovesSteepRamp) {
  // Linear ramps lie in the null space of the second-difference penalty.
  const Index m = 700;
  const Vector peak = gaussian_peak(m, 350.0, 17.5, 1.0);
  const Vector ramp = Vector::LinSpaced(m, 0.5, 7.49);
  const Vector x = peak + ramp;
  const Vector corrected = x - airpls_baseline(x, AirPlsConfig{1e6, 15, 2});
  EXPECT_LT((corrected - peak).cwiseAbs().maxCoeff(), 0.05);
}

TEST(AirPlsTest, ConvergedBaselineStaysUnderSignal) {
  for (double height : {1.0, 10.0}) {
    const Vector x = gaussian_peak(300, 150.0, 8.0, height) +
                     gaussian_peak(300, 60.0, 3.0, 0.5 * height);
    AirPlsConfig cfg;
    cfg.max_iterations = 100;
    const Vector z = airpls_baseline(x, cfg);
    // Overshoot is bounded by the stopping rule on negative residuals.
    const double overshoot = (z - x).cwiseMax(0.0).sum();
    EXPECT_LT(overshoot, 0.001 * x.cwiseAbs().sum());
  }
}

TEST(AirPlsTest, WhittakerWithUnitWeightsMatchesDenseSolve) {
  const Index m = 12;
  const Vector x = testing::random_vector(m, 4);
  const Vector w = Vector::Ones(m);
  for (int order : {1, 2, 3}) {
    const Vector z = detail::whittaker_smooth(x, w, detail::difference_penalty(m, order, 5.0));
    Eigen::MatrixXd D = Eigen::MatrixXd::Identity(m, m);
    for (int d = 0; d < order; ++d) {
      const Index rows = D.rows() - 1;
      D = (D.bottomRows(rows) - D.topRows(rows)).eval();
    }
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m) + 5.0 * D.transpose() * D;
    const Vector want = A.ldlt().solve(x);
    EXPECT_LT((z - want).cwiseAbs().maxCoeff(), 1e-12) << order;
  }
}

TEST(AirPlsTest, Errors) {
  EXPECT_THROW(airpls_baseline(Vector::Ones(2), AirPlsConfig{}), ShapeError);
  EXPECT_THROW(AirPlsConfig({0.0, 15, 1}).validate(), ArgumentError);
  EXPECT_THROW(AirPlsConfig({100.0, 0, 1}).validate(), ArgumentError);
  EXPECT_THROW(AirPlsConfig({100.0, 15, 0}).validate(), ArgumentError);
}

TEST(PipelineTest, ParseAndTag) {
  EXPECT_EQ(Pipeline::parse("").tag(), "none");
  EXPECT_EQ(Pipeline::parse("none").tag(), "none");
  EXPECT_EQ(Pipeline::parse("sg").tag(), "sg:5,2,1");
  EXPECT_EQ(Pipeline::parse(" sg:7,3,2 | msc|airpls:1e5,10,2|center ").tag(),
            "sg:7,3,2|msc|airpls:100000,10,2|center");
  EXPECT_EQ(Pipeline::parse("airpls").tag(), "airpls:100,15,1");
  EXPECT_EQ(Pipeline::parse(Pipeline::parse("sg|msc").tag()).tag(), "sg:5,2,1|msc");
}

TEST(PipelineTest, ParseErrors) {
  EXPECT_THROW(Pipeline::parse("fft"), ConfigError);
  EXPECT_THROW(Pipeline::parse("sg:5,2"), ConfigError);
  EXPECT_THROW(Pipeline::parse("sg:4,2,1"), ConfigError);
  EXPECT_THROW(Pipeline::parse("sg:5,x,1"), ConfigError);
  EXPECT_THROW(Pipeline::parse("sg:5,2.5,1"), ConfigError);
  EXPECT_THROW(Pipeline::parse("msc:1"), ConfigError);
  EXPECT_THROW(Pipeline::parse("airpls:-1,15,1"), ConfigError);
}

TEST(PipelineTest, EmptyIsIdentity) {
  Pipeline p;
  const Matrix X = random_matrix(3, 6, 1);
  EXPECT_EQ(p.fit_transform(X), X);
  EXPECT_EQ(p.transform(X), X);
}

TEST(PipelineTest, TransformBeforeFit) {
  const Pipeline p = Pipeline::parse("msc");
  EXPECT_THROW(p.transform(random_matrix(2, 6, 1)), StateError);
}

TEST(PipelineTest, MscReplayMatchesDirect) {
  const Matrix X = smooth_rows(6, 30, 14);
  Pipeline p = Pipeline::parse("msc");
  p.fit(X);
  EXPECT_LT((p.transform(X) - msc(X)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PipelineTest, SgCenterUsesTrainMeans) {
  const Matrix train = random_matrix(8, 20, 15);
  const Matrix test = random_matrix(3, 20, 16);
  Pipeline p = Pipeline::parse("sg:5,2,1|center");
  p.fit(train);
  const SgConfig cfg{5, 2, 1};
  const Matrix sg_train = savitzky_golay(train, cfg);
  const Vector means = sg_train.colwise().mean().transpose();
  const Matrix want = savitzky_golay(test, cfg).rowwise() - means.transpose();
  EXPECT_LT((p.transform(test) - want).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PipelineTest, FittedStateDependsOnTrainingRowsOnly) {
  const Matrix train = smooth_rows(8, 25, 17);
  const Matrix test = smooth_rows(4, 25, 18);
  Pipeline a = Pipeline::parse("msc|center");
  a.fit(train);
  Matrix reversed = test.colwise().reverse();
  const Matrix ta = a.transform(test);
  const Matrix tb = a.transform(reversed);
  for (Index r = 0; r < 4; ++r)
    EXPECT_LT((ta.row(r) - tb.row(3 - r)).cwiseAbs().maxCoeff(), 1e-13);
  const auto& ref = std::get<MscStep>(a.steps()[0]).reference;
  ASSERT_TRUE(ref.has_value());
  EXPECT_LT((*ref - Vector(train.colwise().mean().transpose())).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PipelineTest, CenterChannelMismatch) {
  Pipeline p = Pipeline::parse("center");
  p.fit(random_matrix(4, 5, 1));
  EXPECT_THROW(p.transform(random_matrix(2, 6, 1)), ShapeError);
}

}  // namespace
}  // namespace edpls
