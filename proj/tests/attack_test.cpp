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

#include <algorithm>
#include <cmath>

#include "edpls/attack.hpp"
#include "edpls/datagen.hpp"
#include "edpls/pls.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace edpls {
namespace {

using testing::random_matrix;

TEST(OrthogonalComplementTest, SelfProjectionVanishes) {
  const Matrix W = random_matrix(10, 3, 1);
  EXPECT_LT(orthogonal_complement_weights(W, W).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(OrthogonalComplementTest, CoordinateProjection) {
  Matrix local = Matrix::Zero(5, 2);
  local(0, 0) = 1.0;
  local(1, 1) = 1.0;
  const Matrix global = Matrix::Identity(5, 3) + random_matrix(5, 3, 2);
  const Matrix out = orthogonal_complement_weights(global, local);
  EXPECT_LT(out.topRows(2).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((out.bottomRows(3) - global.bottomRows(3)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(OrthogonalComplementTest, OrthogonalAndIdempotent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix global = random_matrix(30, 4, seed);
    const Matrix local = random_matrix(30, 4, seed + 100);
    const Matrix once = orthogonal_complement_weights(global, local);
    const Matrix twice = orthogonal_complement_weights(once, local);
    EXPECT_LT((twice - once).cwiseAbs().maxCoeff(), 1e-10);
    for (Index j = 0; j < 4; ++j) {
      for (Index i = 0; i < 4; ++i) {
        const double scaled = local.col(i).dot(once.col(j)) /
                              (local.col(i).norm() * std::max(once.col(j).norm(), 1e-300));
        EXPECT_LT(std::abs(scaled), 1e-8);
      }
    }
  }
}

TEST(OrthogonalComplementTest, RankDeficientLocal) {
  Matrix local = random_matrix(8, 3, 4);
  local.col(2) = 2.0 * local.col(0) - local.col(1);
  try {
    orthogonal_complement_weights(random_matrix(8, 3, 5), local);
    FAIL() << "expected SingularSystemError";
  } catch (const SingularSystemError& e) {
    EXPECT_NE(std::string(e.what()).find("prune"), std::string::npos);
  }
}

TEST(OrthogonalComplementTest, ShapeMismatch) {
  EXPECT_THROW(orthogonal_complement_weights(random_matrix(8, 3, 1), random_matrix(7, 3, 1)),
               ShapeError);
}

TEST(AttackScoreTest, OrthogonalTruthScoresZero) {
  Matrix local = Matrix::Zero(4, 1);
  local(0, 0) = 1.0;
  Matrix global = Matrix::Zero(4, 2);
  global(0, 0) = 1.0;
  global(1, 0) = 1.0;
  global(2, 1) = 1.0;
  Vector truth = Vector::Zero(4);
  truth[3] = 1.0;
  const AttackReport r = attack_and_score(global, local, truth);
  EXPECT_LT(r.per_component_similarity.maxCoeff(), 1e-15);
}

TEST(AttackScoreTest, ExactMatchScoresOne) {
  Matrix local = Matrix::Zero(4, 1);
  local(0, 0) = 1.0;
  Matrix global(4, 2);
  global << 1, 0.5, 0, 0, -3, 0, 0, 2;
  Vector truth(4);
  truth << 0, 0, 1, 0;
  const AttackReport r = attack_and_score(global, local, truth);
  EXPECT_NEAR(r.per_component_similarity[0], 1.0, 1e-15);
  EXPECT_EQ(r.component_argmax, 0);
  EXPECT_EQ(r.w_perp.rows(), 4);
  EXPECT_EQ(r.w_perp.cols(), 2);
}

TEST(AttackScoreTest, VanishingColumnScoresZero) {
  const Matrix W = random_matrix(6, 2, 3);
  const AttackReport r = attack_and_score(W, W, Vector::Ones(6));
  EXPECT_EQ(r.per_component_similarity[0], 0.0);
  EXPECT_EQ(r.per_component_similarity[1], 0.0);
}

TEST(AttackScoreTest, SimilaritiesInUnitInterval) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const AttackReport r = attack_and_score(random_matrix(20, 3, seed),
                                            random_matrix(20, 2, seed + 50),
                                            testing::random_vector(20, seed));
    EXPECT_GE(r.per_component_similarity.minCoeff(), 0.0);
    EXPECT_LE(r.per_component_similarity.maxCoeff(), 1.0);
  }
}

TEST(AttackScoreTest, Errors) {
  EXPECT_THROW(attack_and_score(random_matrix(5, 2, 1), random_matrix(5, 1, 1), Vector::Zero(5)),
               ArgumentError);
  EXPECT_THROW(attack_and_score(random_matrix(5, 2, 1), random_matrix(5, 1, 1), Vector::Ones(4)),
               ShapeError);
}

double best_similarity(std::uint64_t seed, std::optional<double> epsilon, bool loadings) {
  RngStream rng(seed);
  const TwoHolderData d = simulate_two_holders(100, 100, rng);
  FitConfig local_cfg;
  local_cfg.k = 3;
  const PlsModel local = fit(d.holder1, local_cfg);
  FitConfig global_cfg = local_cfg;
  global_cfg.rng = RngStream(seed, 5);
  if (epsilon) global_cfg.privacy = PrivacyBudget(*epsilon, 0.01);
  const PlsModel global = fit(concat_rows(d.holder1, d.holder2), global_cfg);
  const Vector truth = gaussian_signal(100, kSimulatedSignals[3]);
  const AttackReport r = loadings ? attack_and_score(global.P, local.P, truth)
                                  : attack_and_score(global.W, local.W, truth);
  return r.per_component_similarity.maxCoeff();
}

TEST(AttackSimulationTest, NoiseFreeModelLeaksUniqueSignal) {
  EXPECT_GT(best_similarity(0, std::nullopt, false), 0.8);
  EXPECT_GT(best_similarity(0, std::nullopt, true), 0.8);
}

TEST(AttackSimulationTest, StrongPrivacyBluntsAttack) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const double clear = best_similarity(seed, std::nullopt, false);
    EXPECT_LT(best_similarity(seed, 1.0, false), 0.5 * clear) << seed;
    EXPECT_LT(best_similarity(seed, 1.0, true), 0.5 * best_similarity(seed, std::nullopt, true))
        << seed;
  }
}

}  // namespace
}  // namespace edpls
