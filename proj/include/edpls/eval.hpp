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
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "edpls/dataset.hpp"
#include "edpls/error.hpp"
#include "edpls/pls.hpp"
#include "edpls/preprocess.hpp"
#include "edpls/random.hpp"
#include "edpls/types.hpp"

namespace edpls {

inline constexpr double kDefaultDelta = 0.01;

inline double rmse(const Vector& y, const Vector& yhat) {
  if (y.size() != yhat.size()) {
    throw ShapeError("rmse: lengths differ (" + std::to_string(y.size()) +
                     " vs " + std::to_string(yhat.size()) + ")");
  }
  if (y.size() == 0) throw DegenerateInputError("rmse: empty input");
  return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

inline double r2_score(const Vector& y, const Vector& yhat) {
  if (y.size() != yhat.size()) throw ShapeError("r2_score: lengths differ");
  if (y.size() == 0) throw DegenerateInputError("r2_score: empty input");
  const double total = (y.array() - y.mean()).square().sum();
  if (!(total > 0.0)) {
    throw DegenerateInputError("r2_score: response has zero variance");
  }
  return 1.0 - (y - yhat).squaredNorm() / total;
}

struct Split {
  Dataset train;
  Dataset test;
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
};

// Random disjoint partition with ceil(n (1 - f)) training rows.
inline Split train_test_split(const Dataset& d, double test_fraction,
                              RngStream& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ArgumentError("train_test_split: test fraction must lie in (0, 1)");
  }
  const Index n = d.samples();
  // The small offset keeps products like 80 * 0.7 from rounding up.
  const auto n_train = static_cast<Index>(
      std::ceil(static_cast<double>(n) * (1.0 - test_fraction) - 1e-9));
  if (n_train < 2 || n - n_train < 2) {
    throw DegenerateInputError("train_test_split: split of " + std::to_string(n) +
                               " samples leaves fewer than 2 on one side");
  }
  const std::vector<Index> perm = random_permutation(n, rng);
  Split s;
  s.train_rows.assign(perm.begin(), perm.begin() + n_train);
  s.test_rows.assign(perm.begin() + n_train, perm.end());
  s.train = select_rows(d, s.train_rows);
  s.test = select_rows(d, s.test_rows);
  return s;
}

enum class EvalKind { kCrossValidation, kTest };

struct EvalEntry {
  EvalKind kind = EvalKind::kTest;
  std::optional<double> epsilon;  // absent: non-private baseline
  int k = 0;
  std::string preprocessing = "none";
  std::optional<double> rmsecv;
  std::optional<double> rmsep;
  std::optional<double> r2p;
  std::uint64_t seed = 0;
  int repeat = 0;
  bool failed = false;
  std::string message;
};

// Mean, standard error of the mean and median of one metric over the
// non-failed entries of a (kind, epsilon, k, preprocessing) group.
struct EvalAggregate {
  EvalKind kind = EvalKind::kTest;
  std::optional<double> epsilon;
  int k = 0;
  std::string preprocessing;
  std::string metric;
  int count = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double median = 0.0;
};

struct EvalReport {
  std::vector<EvalEntry> entries;
  std::vector<EvalAggregate> aggregates;
  // Indices into `entries` of the RMSECV argmin per (epsilon, preprocessing).
  std::vector<std::size_t> best_cv;
};

struct SummaryStats {
  int count = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double median = 0.0;
};

inline SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.count;
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / (s.count - 1)) / std::sqrt(double(s.count));
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 == 1 ? values[mid]
                                    : 0.5 * (values[mid - 1] + values[mid]);
  return s;
}

// Fills report.aggregates and report.best_cv from report.entries.
inline void aggregate(EvalReport& report) {
  using Key = std::tuple<int, bool, double, int, std::string>;
  std::map<Key, std::vector<const EvalEntry*>> groups;
  std::vector<Key> order;
  for (const auto& e : report.entries) {
    Key key{static_cast<int>(e.kind), e.epsilon.has_value(),
            e.epsilon.value_or(0.0), e.k, e.preprocessing};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&e);
  }
  report.aggregates.clear();
  for (const Key& key : order) {
    const auto& members = groups[key];
    const EvalEntry& head = *members.front();
    auto add = [&](const char* metric, auto getter) {
      std::vector<double> values;
      for (const EvalEntry* e : members) {
        if (e->failed) continue;
        if (auto v = getter(*e)) values.push_back(*v);
      }
      if (values.empty()) return;
      const SummaryStats s = summarize(values);
      report.aggregates.push_back({head.kind, head.epsilon, head.k,
                                   head.preprocessing, metric, s.count, s.mean,
                                   s.std_error, s.median});
    };
    add("rmsecv", [](const EvalEntry& e) { return e.rmsecv; });
    add("rmsep", [](const EvalEntry& e) { return e.rmsep; });
    add("r2p", [](const EvalEntry& e) { return e.r2p; });
  }

  // Argmin RMSECV per (epsilon, preprocessing); ties go to the smaller k.
  report.best_cv.clear();
  std::map<std::tuple<bool, double, std::string>, std::size_t> best;
  std::vector<std::tuple<bool, double, std::string>> best_order;
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const EvalEntry& e = report.entries[i];
    if (e.kind != EvalKind::kCrossValidation || e.failed || !e.rmsecv) continue;
    const std::tuple<bool, double, std::string> key{
        e.epsilon.has_value(), e.epsilon.value_or(0.0), e.preprocessing};
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(key, i);
      best_order.push_back(key);
      continue;
    }
    const EvalEntry& cur = report.entries[it->second];
    if (*e.rmsecv < *cur.rmsecv || (*e.rmsecv == *cur.rmsecv && e.k < cur.k)) {
      it->second = i;
    }
  }
  for (const auto& key : best_order) report.best_cv.push_back(best[key]);
}

namespace detail {

// Fits preprocessing and model on `train`, predicts `test`.
inline Vector fit_and_predict(const Dataset& train, const Matrix& test_X,
                              const Pipeline& pre, const FitConfig& cfg) {
  Pipeline pipeline = pre;
  const Matrix train_X = pipeline.fit_transform(train.X);
  const PlsModel model = fit(Dataset(train_X, train.y), cfg);
  return predict(model, pipeline.transform(test_X));
}

}  // namespace detail

// k-fold cross-validation over a grid of fit configurations. All grid points
// share one seeded partition into contiguous blocks of a permutation; each
// fold refits the pipeline and the model on its training rows only, and the
// model stream for fold i is cfg.rng.derive(i).
inline EvalReport kfold_cv(const Dataset& data, int folds,
                           const std::vector<FitConfig>& grid,
                           const Pipeline& pre, RngStream& rng) {
  const Dataset d = uncenter(data);
  const Index n = d.samples();
  if (grid.empty()) throw ArgumentError("kfold_cv: empty grid");
  if (folds < 2 || folds > n) {
    throw ArgumentError("kfold_cv: folds must lie in [2, n] = [2, " +
                        std::to_string(n) + "], got " + std::to_string(folds));
  }
  const std::vector<Index> perm = random_permutation(n, rng);
  std::vector<std::vector<Index>> blocks(static_cast<std::size_t>(folds));
  for (Index i = 0; i < n; ++i) {
    // Block sizes differ by at most one; earlier blocks are larger.
    const Index block = i * folds / n;
    blocks[static_cast<std::size_t>(block)].push_back(perm[static_cast<std::size_t>(i)]);
  }

  EvalReport report;
  const std::string tag = pre.tag();
  for (const FitConfig& cfg : grid) {
    EvalEntry entry;
    entry.kind = EvalKind::kCrossValidation;
    entry.k = cfg.k;
    entry.preprocessing = tag;
    entry.seed = cfg.rng.seed();
    if (cfg.privacy) entry.epsilon = cfg.privacy->epsilon();
    double sse = 0.0;
    try {
      for (int fold = 0; fold < folds; ++fold) {
        const auto& held = blocks[static_cast<std::size_t>(fold)];
        std::vector<Index> rest;
        for (int other = 0; other < folds; ++other) {
          if (other == fold) continue;
          const auto& b = blocks[static_cast<std::size_t>(other)];
          rest.insert(rest.end(), b.begin(), b.end());
        }
        const Dataset train = select_rows(d, rest);
        const Dataset test = select_rows(d, held);
        FitConfig fold_cfg = cfg;
        fold_cfg.rng = cfg.rng.derive(static_cast<std::uint64_t>(fold));
        const Vector yhat = detail::fit_and_predict(train, test.X, pre, fold_cfg);
        sse += (test.y - yhat).squaredNorm();
      }
      entry.rmsecv = std::sqrt(sse / static_cast<double>(n));
    } catch (const Error& e) {
      entry.failed = true;
      entry.message = e.what();
    }
    report.entries.push_back(std::move(entry));
  }
  aggregate(report);
  return report;
}

// RMSEP and R^2 on `test` of a non-private baseline and of `repeats`
// private fits per epsilon. The pipeline is fitted on `train` once. The
// stream for (epsilon index e, repeat r) is rng.derive(e).derive(r).
inline EvalReport privacy_utility_sweep(const Dataset& train, const Dataset& test,
                                        const std::vector<double>& eps_list,
                                        int k, const Pipeline& pre, int repeats,
                                        const RngStream& rng,
                                        double delta = kDefaultDelta) {
  if (repeats < 1) throw ArgumentError("privacy_utility_sweep: repeats must be >= 1");
  const Dataset tr = uncenter(train);
  const Dataset te = uncenter(test);
  Pipeline pipeline = pre;
  const Matrix train_X = pipeline.fit_transform(tr.X);
  const Matrix test_X = pipeline.transform(te.X);
  const Dataset fit_data(train_X, tr.y);
  const std::string tag = pipeline.tag();

  EvalReport report;
  auto run = [&](std::optional<double> epsilon, int repeat, const RngStream& stream) {
    EvalEntry entry;
    entry.kind = EvalKind::kTest;
    entry.epsilon = epsilon;
    entry.k = k;
    entry.preprocessing = tag;
    entry.seed = rng.seed();
    entry.repeat = repeat;
    try {
      FitConfig cfg;
      cfg.k = k;
      cfg.rng = stream;
      if (epsilon) cfg.privacy = PrivacyBudget(*epsilon, delta);
      const PlsModel model = fit(fit_data, cfg);
      const Vector yhat = predict(model, test_X);
      entry.rmsep = rmse(te.y, yhat);
      entry.r2p = r2_score(te.y, yhat);
    } catch (const Error& e) {
      entry.failed = true;
      entry.message = e.what();
    }
    report.entries.push_back(std::move(entry));
  };

  run(std::nullopt, 0, rng);
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const RngStream eps_stream = rng.derive(e);
    for (int r = 0; r < repeats; ++r) {
      run(eps_list[e], r, eps_stream.derive(static_cast<std::uint64_t>(r)));
    }
  }
  aggregate(report);
  return report;
}

inline std::string_view to_string(EvalKind kind) {
  return kind == EvalKind::kCrossValidation ? "cv" : "test";
}

}  // namespace edpls
