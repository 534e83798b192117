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
#include <string>
#include <string_view>

#include "edpls/error.hpp"

namespace edpls {

// (epsilon, delta) spent by a single mechanism invocation.
class PrivacyBudget {
 public:
  PrivacyBudget(double epsilon, double delta) : epsilon_(epsilon), delta_(delta) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw ArgumentError("privacy budget: epsilon must be finite and > 0, got " +
                          std::to_string(epsilon));
    }
    if (!(delta > 0.0 && delta < 1.0)) {
      throw ArgumentError("privacy budget: delta must lie in (0, 1), got " +
                          std::to_string(delta));
    }
  }

  double epsilon() const noexcept { return epsilon_; }
  double delta() const noexcept { return delta_; }

  friend bool operator==(const PrivacyBudget&, const PrivacyBudget&) = default;

 private:
  double epsilon_;
  double delta_;
};

enum class NoiseTarget { kWeights, kScores, kXLoadings, kYLoading };
enum class CalibrationMethod { kClassic, kAnalytic };

// Sensitivity and noise scale for one released vector or scalar.
struct NoiseCalibration {
  NoiseTarget target = NoiseTarget::kWeights;
  double sensitivity = 0.0;
  double sigma = 0.0;
  CalibrationMethod method = CalibrationMethod::kAnalytic;

  friend bool operator==(const NoiseCalibration&,
                         const NoiseCalibration&) = default;
};

inline std::string_view to_string(NoiseTarget target) {
  switch (target) {
    case NoiseTarget::kWeights:
      return "weights";
    case NoiseTarget::kScores:
      return "scores";
    case NoiseTarget::kXLoadings:
      return "x_loadings";
    case NoiseTarget::kYLoading:
      return "y_loading";
  }
  return "unknown";
}

inline std::string_view to_string(CalibrationMethod method) {
  return method == CalibrationMethod::kClassic ? "classic" : "analytic";
}

inline NoiseTarget noise_target_from_string(std::string_view name) {
  if (name == "weights") return NoiseTarget::kWeights;
  if (name == "scores") return NoiseTarget::kScores;
  if (name == "x_loadings") return NoiseTarget::kXLoadings;
  if (name == "y_loading") return NoiseTarget::kYLoading;
  throw ArgumentError("unknown noise target '" + std::string(name) + "'");
}

inline CalibrationMethod calibration_method_from_string(std::string_view name) {
  if (name == "classic") return CalibrationMethod::kClassic;
  if (name == "analytic") return CalibrationMethod::kAnalytic;
  throw ArgumentError("unknown calibration method '" + std::string(name) + "'");
}

}  // namespace edpls
