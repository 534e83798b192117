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

// Fits a non-private and an (epsilon, delta)-private PLS1 model on simulated
// two-holder spectra and prints test errors.

#include <iostream>

#include "edpls/edpls.hpp"

int main() {
  edpls::RngStream rng(7);
  const auto holders = edpls::simulate_two_holders(100, 100, rng);
  const edpls::Dataset all = edpls::concat_rows(holders.holder1, holders.holder2);
  const auto split = edpls::train_test_split(all, 0.3, rng);

  for (double epsilon : {0.0, 100.0, 10.0, 1.0}) {
    edpls::FitConfig cfg;
    cfg.k = 3;
    cfg.rng = edpls::RngStream(7, 1);
    if (epsilon > 0.0) cfg.privacy = edpls::PrivacyBudget(epsilon, 0.01);
    const edpls::PlsModel model = edpls::fit(split.train, cfg);
    const edpls::Vector yhat = edpls::predict(model, split.test.X);
    std::cout << (epsilon > 0.0 ? "epsilon=" + std::to_string(epsilon)
                                : std::string("baseline"))
              << "  RMSEP=" << edpls::rmse(split.test.y, yhat)
              << "  R2P=" << edpls::r2_score(split.test.y, yhat) << '\n';
  }
}
