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
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "edpls/error.hpp"
#include "edpls/linalg.hpp"
#include "edpls/types.hpp"

namespace edpls {

struct SgConfig {
  int window = 5;
  int polyorder = 2;
  int derivative = 1;

  void validate() const {
    if (window < 3 || window % 2 == 0) {
      throw ArgumentError("savitzky_golay: window must be odd and >= 3, got " +
                          std::to_string(window));
    }
    if (polyorder < 0 || polyorder >= window) {
      throw ArgumentError("savitzky_golay: polyorder must lie in [0, window)");
    }
    if (derivative < 0 || derivative > polyorder) {
      throw ArgumentError("savitzky_golay: derivative must lie in [0, polyorder]");
    }
  }
};

struct AirPlsConfig {
  double lambda = 100.0;
  int max_iterations = 15;
  int diff_order = 1;

  void validate() const {
    if (!(lambda > 0.0)) throw ArgumentError("airpls: lambda must be > 0");
    if (max_iterations < 1) {
      throw ArgumentError("airpls: max_iterations must be >= 1");
    }
    if (diff_order < 1) throw ArgumentError("airpls: diff_order must be >= 1");
  }
};

// --- Savitzky-Golay ---------------------------------------------------------

// Weights that map the `window` samples of a window onto the
// `derivative`-th derivative (unit spacing) of the least-squares polynomial,
// evaluated at window position `position`.
inline Vector savitzky_golay_weights(const SgConfig& cfg, int position) {
  cfg.validate();
  Eigen::MatrixXd vander(cfg.window, cfg.polyorder + 1);
  for (int r = 0; r < cfg.window; ++r) {
    const double x = static_cast<double>(r - position);
    double power = 1.0;
    for (int q = 0; q <= cfg.polyorder; ++q) {
      vander(r, q) = power;
      power *= x;
    }
  }
  // Rows of the pseudo-inverse map samples to polynomial coefficients.
  const Eigen::MatrixXd pinv = vander.colPivHouseholderQr().solve(
      Eigen::MatrixXd::Identity(cfg.window, cfg.window));
  double factorial = 1.0;
  for (int i = 2; i <= cfg.derivative; ++i) factorial *= i;
  return factorial * pinv.row(cfg.derivative).transpose();
}

// Centered kernel, in correlation order: out[i] = sum_j kernel[j] x[i - h + j].
inline Vector savitzky_golay_kernel(const SgConfig& cfg) {
  return savitzky_golay_weights(cfg, cfg.window / 2);
}

// Filters every row. The first and last window/2 channels use the polynomial
// fitted to the first/last full window, so the output keeps all m channels.
inline Matrix savitzky_golay(const Matrix& X, const SgConfig& cfg) {
  cfg.validate();
  const Index m = X.cols();
  if (m < cfg.window) {
    throw ShapeError("savitzky_golay: " + std::to_string(m) +
                     " channels is fewer than window " +
                     std::to_string(cfg.window));
  }
  const int half = cfg.window / 2;
  const Vector center = savitzky_golay_kernel(cfg);
  std::vector<Vector> left, right;
  for (int pos = 0; pos < half; ++pos) {
    left.push_back(savitzky_golay_weights(cfg, pos));
    right.push_back(savitzky_golay_weights(cfg, half + 1 + pos));
  }

  Matrix out(X.rows(), m);
  for (Index r = 0; r < X.rows(); ++r) {
    const auto row = X.row(r);
    for (Index i = 0; i < m; ++i) {
      double acc = 0.0;
      if (i < half) {
        const Vector& w = left[static_cast<std::size_t>(i)];
        for (int j = 0; j < cfg.window; ++j) acc += w[j] * row[j];
      } else if (i >= m - half) {
        const Vector& w = right[static_cast<std::size_t>(i - (m - half))];
        const Index start = m - cfg.window;
        for (int j = 0; j < cfg.window; ++j) acc += w[j] * row[start + j];
      } else {
        for (int j = 0; j < cfg.window; ++j) acc += center[j] * row[i - half + j];
      }
      out(r, i) = acc;
    }
  }
  return out;
}

// --- Multiplicative scatter correction --------------------------------------

inline void require_nonconstant_reference(const Vector& reference) {
  if (reference.size() < 2) {
    throw DegenerateInputError("msc: reference needs at least 2 channels");
  }
  const double mean = reference.mean();
  if (!((reference.array() - mean).square().sum() > 0.0)) {
    throw DegenerateInputError("msc: reference spectrum is constant");
  }
}

// Regresses each row on the reference (x_i ~ a_i + b_i ref) and returns
// (x_i - a_i) / b_i. Without a reference the column mean of X is used.
inline Matrix msc(const Matrix& X, const std::optional<Vector>& reference = {}) {
  const Vector ref =
      reference ? *reference : Vector(X.colwise().mean().transpose());
  if (ref.size() != X.cols()) {
    throw ShapeError("msc: reference has " + std::to_string(ref.size()) +
                     " channels, X has " + std::to_string(X.cols()));
  }
  require_nonconstant_reference(ref);
  const double ref_mean = ref.mean();
  const Vector ref_c = ref.array() - ref_mean;
  const double sxx = ref_c.squaredNorm();

  Matrix out(X.rows(), X.cols());
  for (Index i = 0; i < X.rows(); ++i) {
    const auto row = X.row(i);
    const double row_mean = row.mean();
    const double slope = (row.transpose().array() - row_mean).matrix().dot(ref_c) / sxx;
    if (!(std::abs(slope) >= 1e-12)) {
      throw DegenerateInputError("msc: row " + std::to_string(i) +
                                 " has near-zero slope against the reference");
    }
    const double intercept = row_mean - slope * ref_mean;
    out.row(i) = (row.array() - intercept) / slope;
  }
  return out;
}

// --- airPLS -----------------------------------------------------------------

namespace detail {

// lambda * D^T D for the d-th order difference operator D ((m-d) x m).
inline BandedSpdMatrix difference_penalty(Index m, int order, double lambda) {
  std::vector<double> coef(static_cast<std::size_t>(order) + 1);
  // Binomial coefficients with alternating sign: (-1)^(d-j) C(d, j).
  for (int j = 0; j <= order; ++j) {
    double binom = 1.0;
    for (int i = 1; i <= j; ++i) binom = binom * (order - j + i) / i;
    coef[static_cast<std::size_t>(j)] = ((order - j) % 2 == 0 ? 1.0 : -1.0) * binom;
  }
  BandedSpdMatrix A(m, order);
  for (Index r = 0; r + order < m; ++r) {
    for (int a = 0; a <= order; ++a) {
      for (int b = 0; b <= a; ++b) {
        A.at(r + a, r + b) += lambda * coef[static_cast<std::size_t>(a)] *
                              coef[static_cast<std::size_t>(b)];
      }
    }
  }
  return A;
}

// Weighted Whittaker smoother: argmin sum w_i (x_i - z_i)^2 + lambda ||D z||^2.
inline Vector whittaker_smooth(const Vector& x, const Vector& weights,
                               const BandedSpdMatrix& penalty) {
  BandedSpdMatrix A = penalty;
  for (Index i = 0; i < x.size(); ++i) A.at(i, i) += weights[i];
  return A.solve(weights.cwiseProduct(x));
}

}  // namespace detail

// Adaptive iteratively reweighted penalized least squares baseline of one
// spectrum.
inline Vector airpls_baseline(const Vector& x, const AirPlsConfig& cfg) {
  cfg.validate();
  const Index m = x.size();
  if (m < 3 || m <= cfg.diff_order) {
    throw ShapeError("airpls: need at least 3 channels and more than diff_order");
  }
  const BandedSpdMatrix penalty =
      detail::difference_penalty(m, cfg.diff_order, cfg.lambda);
  const double x_l1 = x.cwiseAbs().sum();
  Vector weights = Vector::Ones(m);
  Vector z = x;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    z = detail::whittaker_smooth(x, weights, penalty);
    const Vector d = x - z;
    double neg_l1 = 0.0;
    double neg_max = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < m; ++i) {
      if (d[i] < 0.0) {
        neg_l1 -= d[i];
        neg_max = std::max(neg_max, d[i]);
      }
    }
    if (neg_l1 < 0.001 * x_l1 || neg_l1 == 0.0 || iter == cfg.max_iterations) {
      break;
    }
    for (Index i = 0; i < m; ++i) {
      weights[i] = d[i] >= 0.0 ? 0.0 : std::exp(iter * std::abs(d[i]) / neg_l1);
    }
    // End points keep a positive weight so the penalized system stays
    // definite.
    weights[0] = std::exp(iter * neg_max / neg_l1);
    weights[m - 1] = weights[0];
  }
  return z;
}

// Baseline-corrected spectra x - z, row by row.
inline Matrix airpls_correct(const Matrix& X, const AirPlsConfig& cfg) {
  Matrix out(X.rows(), X.cols());
  for (Index r = 0; r < X.rows(); ++r) {
    const Vector x = X.row(r).transpose();
    out.row(r) = (x - airpls_baseline(x, cfg)).transpose();
  }
  return out;
}

// --- Pipeline ---------------------------------------------------------------

struct SgStep {
  SgConfig config;
};
struct MscStep {
  std::optional<Vector> reference;  // fitted: mean spectrum of training rows
};
struct AirPlsStep {
  AirPlsConfig config;
};
struct CenterStep {
  std::optional<Vector> means;  // fitted: column means of training rows
};

using PreprocessStep = std::variant<SgStep, MscStep, AirPlsStep, CenterStep>;

// Ordered preprocessing steps. fit() derives state (MSC reference, centering
// means) from training rows only; transform() replays it.
class Pipeline {
 public:
  Pipeline() = default;
  explicit Pipeline(std::vector<PreprocessStep> steps) : steps_(std::move(steps)) {}

  // Parses "sg:5,2,1|msc|airpls:100,15,1|center". Parameters are optional
  // and default to sg:5,2,1 and airpls:100,15,1. Empty string or "none" is
  // the identity.
  static Pipeline parse(std::string_view spec);

  const std::vector<PreprocessStep>& steps() const { return steps_; }
  std::vector<PreprocessStep>& mutable_steps() { return steps_; }
  bool empty() const { return steps_.empty(); }
  bool fitted() const { return fitted_; }
  void mark_fitted() { fitted_ = true; }

  // Canonical spec string, e.g. "sg:5,2,1|center"; "none" when empty.
  std::string tag() const;

  Matrix fit_transform(const Matrix& X) {
    Matrix cur = X;
    for (auto& step : steps_) {
      if (auto* s = std::get_if<MscStep>(&step)) {
        s->reference = Vector(cur.colwise().mean().transpose());
      } else if (auto* c = std::get_if<CenterStep>(&step)) {
        c->means = Vector(cur.colwise().mean().transpose());
      }
      cur = apply(step, cur);
    }
    fitted_ = true;
    return cur;
  }

  void fit(const Matrix& X) { (void)fit_transform(X); }

  Matrix transform(const Matrix& X) const {
    if (!fitted_) {
      throw StateError("pipeline: transform called before fit");
    }
    Matrix cur = X;
    for (const auto& step : steps_) cur = apply(step, cur);
    return cur;
  }

 private:
  static Matrix apply(const PreprocessStep& step, const Matrix& X) {
    return std::visit(
        [&](const auto& s) -> Matrix {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, SgStep>) {
            return savitzky_golay(X, s.config);
          } else if constexpr (std::is_same_v<S, MscStep>) {
            return msc(X, s.reference);
          } else if constexpr (std::is_same_v<S, AirPlsStep>) {
            return airpls_correct(X, s.config);
          } else {
            if (!s.means) throw StateError("pipeline: center step not fitted");
            if (s.means->size() != X.cols()) {
              throw ShapeError("pipeline: center step fitted on " +
                               std::to_string(s.means->size()) +
                               " channels, got " + std::to_string(X.cols()));
            }
            return X.rowwise() - s.means->transpose();
          }
        },
        step);
  }

  std::vector<PreprocessStep> steps_;
  bool fitted_ = false;
};

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline double parse_number(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("pipeline: bad number '" + text + "' in " + context);
  }
}

inline int parse_int(const std::string& text, const std::string& context) {
  const double v = parse_number(text, context);
  if (v != std::floor(v)) {
    throw ConfigError("pipeline: expected integer, got '" + text + "' in " + context);
  }
  return static_cast<int>(v);
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace detail

inline Pipeline Pipeline::parse(std::string_view spec) {
  std::vector<PreprocessStep> steps;
  const std::string whole = detail::trim(spec);
  if (whole.empty() || whole == "none") return Pipeline{};
  for (const std::string& raw : detail::split(whole, '|')) {
    const std::string item = detail::trim(raw);
    const auto colon = item.find(':');
    const std::string name = detail::trim(item.substr(0, colon));
    std::vector<std::string> args;
    if (colon != std::string::npos) {
      for (const auto& a : detail::split(item.substr(colon + 1), ',')) {
        args.push_back(detail::trim(a));
      }
    }
    auto expect_args = [&](std::size_t count) {
      if (!args.empty() && args.size() != count) {
        throw ConfigError("pipeline: step '" + name + "' takes " +
                          std::to_string(count) + " parameters, got " +
                          std::to_string(args.size()));
      }
    };
    if (name == "sg") {
      expect_args(3);
      SgConfig cfg;
      if (!args.empty()) {
        cfg = {detail::parse_int(args[0], item), detail::parse_int(args[1], item),
               detail::parse_int(args[2], item)};
      }
      try {
        cfg.validate();
      } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
      }
      steps.emplace_back(SgStep{cfg});
    } else if (name == "msc") {
      expect_args(0);
      steps.emplace_back(MscStep{});
    } else if (name == "airpls") {
      expect_args(3);
      AirPlsConfig cfg;
      if (!args.empty()) {
        cfg = {detail::parse_number(args[0], item),
               detail::parse_int(args[1], item),
               detail::parse_int(args[2], item)};
      }
      try {
        cfg.validate();
      } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
      }
      steps.emplace_back(AirPlsStep{cfg});
    } else if (name == "center") {
      expect_args(0);
      steps.emplace_back(CenterStep{});
    } else {
      throw ConfigError("pipeline: unknown step '" + name +
                        "' (expected sg, msc, airpls or center)");
    }
  }
  return Pipeline(std::move(steps));
}

inline std::string Pipeline::tag() const {
  if (steps_.empty()) return "none";
  std::string out;
  for (const auto& step : steps_) {
    if (!out.empty()) out += '|';
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, SgStep>) {
            out += "sg:" + std::to_string(s.config.window) + "," +
                   std::to_string(s.config.polyorder) + "," +
                   std::to_string(s.config.derivative);
          } else if constexpr (std::is_same_v<S, MscStep>) {
            out += "msc";
          } else if constexpr (std::is_same_v<S, AirPlsStep>) {
            out += "airpls:" + detail::format_number(s.config.lambda) + "," +
                   std::to_string(s.config.max_iterations) + "," +
                   std::to_string(s.config.diff_order);
          } else {
            out += "center";
          }
        },
        step);
  }
  return out;
}

}  // namespace edpls
