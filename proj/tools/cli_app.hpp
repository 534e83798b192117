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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "edpls/edpls.hpp"

// Command-line front end. run() is the whole program; main() only forwards
// argv so tests can drive commands in-process.
namespace edpls::cli {

namespace fs = std::filesystem;

// Stream ids under the master seed, one per independent use.
inline constexpr std::uint64_t kSimulateStream = 0;
inline constexpr std::uint64_t kSplitStream = 1;
inline constexpr std::uint64_t kFoldStream = 2;
inline constexpr std::uint64_t kModelStream = 3;
inline constexpr std::uint64_t kUtilityStream = 4;

struct DataArgs {
  std::string input;
  bool header = false;
  int response_col = 0;
};

struct SimulateArgs {
  int n = 100;
  int m = 100;
};

struct FitArgs {
  DataArgs data;
  int k = 3;
  std::optional<double> epsilon;
  double delta = kDefaultDelta;
  std::string pipeline = "none";
};

struct PredictArgs {
  DataArgs data;
  std::string model;
};

struct AttackArgs {
  DataArgs data;
  std::string model;
  std::string truth;
  std::string target = "weights";
  std::optional<int> k;
};

struct SweepArgs {
  DataArgs data;
  std::string mode = "both";
  int k = 10;
  std::vector<double> epsilons{1.0, 10.0, 100.0};
  double delta = kDefaultDelta;
  std::vector<std::string> pipelines{"none"};
  int folds = 10;
  double test_fraction = 0.3;
  int repeats = 20;
};

struct PreprocessArgs {
  DataArgs data;
  std::string pipeline = "none";
};

struct Common {
  std::string output;
  std::uint64_t seed = 0;
};

namespace detail {

inline void prepare_output(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'" +
                  (ec ? ": " + ec.message() : std::string()));
  }
}

inline void write_text(const fs::path& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline Dataset load_data(const DataArgs& a) {
  return read_dataset_csv(a.input, a.header, a.response_col);
}

// A vector stored either as one row or as one column.
inline Vector read_vector_csv(const fs::path& path, bool header) {
  const Matrix v = read_csv(path, header).values;
  if (v.rows() == 1) return v.row(0).transpose();
  if (v.cols() == 1) return v.col(0);
  throw ShapeError("'" + path.string() + "' must hold a single row or column, found " +
                   std::to_string(v.rows()) + "x" + std::to_string(v.cols()));
}

inline void add_data_options(CLI::App* cmd, DataArgs& a, bool input_required = true) {
  auto* in = cmd->add_option("--input", a.input, "CSV file")->check(CLI::ExistingFile);
  if (input_required) in->required();
  cmd->add_flag("--header", a.header, "First CSV line is a header");
  cmd->add_option("--response-col", a.response_col, "Column index of the response")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

inline void add_common(CLI::App* cmd, Common& c) {
  // Consumed by expand_config() before parsing.
  cmd->add_option("--config", "Flat key=value config file; flags override it")
      ->configurable(false);
  cmd->add_option("--output", c.output, "Output directory")->required();
  cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
}

inline json calibration_summary(const PlsModel& m) {
  json by_target = json::object();
  for (const auto& cal : m.calibration_log) {
    json& t = by_target[std::string(to_string(cal.target))];
    if (t.is_null()) {
      t = {{"count", 0}, {"sigma_min", cal.sigma}, {"sigma_max", cal.sigma},
           {"sensitivity_min", cal.sensitivity}, {"sensitivity_max", cal.sensitivity}};
    }
    t["count"] = t["count"].get<int>() + 1;
    t["sigma_min"] = std::min(t["sigma_min"].get<double>(), cal.sigma);
    t["sigma_max"] = std::max(t["sigma_max"].get<double>(), cal.sigma);
    t["sensitivity_min"] = std::min(t["sensitivity_min"].get<double>(), cal.sensitivity);
    t["sensitivity_max"] = std::max(t["sensitivity_max"].get<double>(), cal.sensitivity);
  }
  return {{"entries", m.calibration_log.size()}, {"by_target", by_target}};
}

inline std::vector<double> parse_epsilons(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& item : items) {
    if (item == "none") continue;
    double v = 0.0;
    if (!CLI::detail::lexical_cast(item, v) || !(v > 0.0)) {
      throw ArgumentError("--epsilon values must be positive numbers or none, got '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

// Splices the keys of `--config FILE` into the argument list right after the
// subcommand, skipping keys already given as flags. CLI11 does not process
// config files attached to subcommands, so the expansion happens here.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::size_t sub = 1;
  while (sub < args.size() && args[sub].starts_with("-")) ++sub;
  if (sub >= args.size()) return args;
  std::string file;
  for (std::size_t i = sub + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    if (args[i].starts_with("--config=")) file = args[i].substr(9);
  }
  if (file.empty()) return args;
  if (!fs::is_regular_file(file)) throw IoError("cannot open config file '" + file + "'");
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(file);
  } catch (const CLI::Error& e) {
    throw ConfigError("config file '" + file + "': " + e.what());
  }
  auto given = [&](const std::string& key) {
    for (std::size_t i = sub + 1; i < args.size(); ++i) {
      if (args[i] == "--" + key || args[i].starts_with("--" + key + "=")) return true;
    }
    return false;
  };
  std::vector<std::string> extra;
  for (const auto& item : items) {
    if (!item.parents.empty() && item.parents != std::vector<std::string>{args[sub]}) continue;
    // "++" and "--" are the reader's section open/close markers.
    if (item.name == "++" || item.name == "--") continue;
    if (item.name == "config" || given(item.name)) continue;
    // Unset optional values are written back as empty strings.
    if (item.inputs.empty() || (item.inputs.size() == 1 && item.inputs[0].empty())) continue;
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true") extra.push_back("--" + item.name);
      continue;
    }
    extra.push_back("--" + item.name);
    extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub) + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace detail

// --- Commands ---------------------------------------------------------------

inline void cmd_simulate(const SimulateArgs& a, const Common& c, std::ostream& out) {
  const fs::path dir = c.output;
  detail::prepare_output(dir);
  RngStream rng(c.seed, kSimulateStream);
  const TwoHolderData d = simulate_two_holders(a.n, a.m, rng);
  write_dataset_csv(dir / "holder1.csv", d.holder1);
  write_dataset_csv(dir / "holder2.csv", d.holder2);
  write_dataset_csv(dir / "combined.csv", concat_rows(d.holder1, d.holder2));

  const char* names[] = {"analyte", "shared_interferent", "holder1_unique", "holder2_unique"};
  json signals = json::array();
  for (std::size_t j = 0; j < kSimulatedSignals.size(); ++j) {
    signals.push_back({{"name", names[j]},
                       {"mu", kSimulatedSignals[j].mu},
                       {"sigma", kSimulatedSignals[j].sigma},
                       {"h", kSimulatedSignals[j].h}});
  }
  write_json(dir / "manifest.json",
             {{"format", "edpls-simulation"},
              {"seed", c.seed},
              {"stream_id", kSimulateStream},
              {"samples_per_holder", a.n},
              {"channels", a.m},
              {"concentration_range", {0.0, kConcentrationMax}},
              {"signals", signals},
              {"holder1", {{"file", "holder1.csv"}, {"signals", {0, 1, 2}}}},
              {"holder2", {{"file", "holder2.csv"}, {"signals", {0, 1, 3}}}},
              {"combined", {{"file", "combined.csv"}, {"rows", "holder1 then holder2"}}},
              {"columns", "y,x0..x(m-1)"}});
  out << "wrote " << (dir / "holder1.csv").string() << ", holder2.csv, combined.csv, manifest.json\n";
}

inline void cmd_fit(const FitArgs& a, const Common& c, std::ostream& out) {
  const fs::path dir = c.output;
  const Dataset data = detail::load_data(a.data);
  Pipeline pipeline = Pipeline::parse(a.pipeline);
  detail::prepare_output(dir);
  const Matrix X = pipeline.fit_transform(data.X);
  FitConfig cfg;
  cfg.k = a.k;
  cfg.rng = RngStream(c.seed, kModelStream);
  if (a.epsilon) cfg.privacy = PrivacyBudget(*a.epsilon, a.delta);
  const PlsModel model = fit(Dataset(X, data.y), cfg);
  save_model(dir / "model.json", model, pipeline);

  const double train_rmse = rmse(data.y, predict(model, X));
  json privacy = nullptr;
  if (model.privacy) {
    privacy = {{"epsilon", model.privacy->epsilon()}, {"delta", model.privacy->delta()}};
  }
  write_json(dir / "fit_report.json",
             {{"format", "edpls-fit-report"},
              {"k", model.k},
              {"requested_k", model.requested_k},
              {"early_stopped", model.early_stopped},
              {"samples", data.samples()},
              {"channels", data.channels()},
              {"preprocessing", pipeline.tag()},
              {"privacy", privacy},
              {"seed", c.seed},
              {"calibration", detail::calibration_summary(model)},
              {"training_rmse", train_rmse}});
  out << "wrote " << (dir / "model.json").string() << " (k=" << model.k
      << ", training RMSE " << format_double(train_rmse) << ")\n";
}

inline void cmd_predict(const PredictArgs& a, const Common& c, std::ostream& out) {
  const fs::path dir = c.output;
  const LoadedModel loaded = load_model(a.model);
  const Matrix table = read_csv(a.data.input, a.data.header).values;
  const Index m = loaded.model.channels();
  Matrix X;
  if (table.cols() == m) {
    X = table;
  } else if (table.cols() == m + 1) {
    X = dataset_from_table(table, a.data.response_col).X;
  } else {
    throw ShapeError("predict: model expects " + std::to_string(m) +
                     " channels (or " + std::to_string(m + 1) +
                     " columns with a response), input has " + std::to_string(table.cols()));
  }
  if (loaded.pipeline) X = loaded.pipeline->transform(X);
  const Vector yhat = predict(loaded.model, X);
  detail::prepare_output(dir);
  auto file = open_for_write(dir / "predictions.csv");
  write_matrix_csv(file, Matrix(yhat), {"y_hat"});
  if (!file) throw IoError("failed writing predictions.csv");
  out << "wrote " << (dir / "predictions.csv").string() << " (" << yhat.size() << " rows)\n";
}

inline void cmd_attack(const AttackArgs& a, const Common& c, std::ostream& out) {
  const fs::path dir = c.output;
  const LoadedModel global = load_model(a.model);
  if (a.k && *a.k != global.model.k) {
    throw ConfigError("attack: --k " + std::to_string(*a.k) + " differs from the global model's k = " +
                      std::to_string(global.model.k));
  }
  const Dataset local_data = detail::load_data(a.data);
  if (local_data.channels() != global.model.channels()) {
    throw ShapeError("attack: local data has " + std::to_string(local_data.channels()) +
                     " channels, global model expects " +
                     std::to_string(global.model.channels()));
  }
  Pipeline pipeline = global.pipeline.value_or(Pipeline{});
  FitConfig cfg;
  cfg.k = global.model.k;
  const PlsModel local = fit(Dataset(pipeline.fit_transform(local_data.X), local_data.y), cfg);
  if (local.k != global.model.k) {
    throw ConfigError("attack: local model stopped at k = " + std::to_string(local.k) +
                      ", global model has k = " + std::to_string(global.model.k));
  }
  const bool loadings = a.target == "loadings";
  const Matrix& Wg = loadings ? global.model.P : global.model.W;
  const Matrix& Wl = loadings ? local.P : local.W;

  json report{{"format", "edpls-attack-report"}, {"target", a.target}, {"k", global.model.k}};
  Matrix w_perp;
  if (!a.truth.empty()) {
    const Vector truth = detail::read_vector_csv(a.truth, false);
    const AttackReport r = attack_and_score(Wg, Wl, truth);
    w_perp = r.w_perp;
    report["per_component_similarity"] = to_json_value(r.per_component_similarity);
    report["component_argmax"] = r.component_argmax;
    report["best_similarity"] = r.per_component_similarity[r.component_argmax];
    out << "best |cosine| " << format_double(r.per_component_similarity[r.component_argmax])
        << " at component " << r.component_argmax << "\n";
  } else {
    w_perp = orthogonal_complement_weights(Wg, Wl);
    report["per_component_similarity"] = nullptr;
    report["component_argmax"] = nullptr;
    report["best_similarity"] = nullptr;
  }
  Vector norms(w_perp.cols());
  for (Index j = 0; j < w_perp.cols(); ++j) norms[j] = w_perp.col(j).norm();
  report["w_perp_norms"] = to_json_value(norms);
  report["w_perp"] = to_json_columns(w_perp);
  detail::prepare_output(dir);
  write_json(dir / "attack_report.json", report);
  out << "wrote " << (dir / "attack_report.json").string() << "\n";
}

inline EvalReport run_sweep(const SweepArgs& a, const Dataset& data, std::uint64_t seed) {
  if (a.k < 1) throw ArgumentError("sweep: empty grid (k must be >= 1)");
  if (a.mode != "cv" && a.mode != "utility" && a.mode != "both") {
    throw ArgumentError("sweep: --mode must be cv, utility or both");
  }
  if (a.repeats < 1) throw ArgumentError("sweep: --repeats must be >= 1");
  RngStream split_rng(seed, kSplitStream);
  const Split split = train_test_split(data, a.test_fraction, split_rng);

  EvalReport all;
  for (std::size_t p = 0; p < a.pipelines.size(); ++p) {
    const Pipeline pipeline = Pipeline::parse(a.pipelines[p]);
    if (a.mode != "utility") {
      const RngStream model_base = RngStream(seed, kModelStream).derive(p);
      for (int r = 0; r < a.repeats; ++r) {
        std::vector<FitConfig> grid;
        for (std::size_t e = 0; e <= a.epsilons.size(); ++e) {
          for (int k = 1; k <= a.k; ++k) {
            FitConfig cfg;
            cfg.k = k;
            // Slot 0 is the non-private baseline.
            if (e > 0) cfg.privacy = PrivacyBudget(a.epsilons[e - 1], a.delta);
            cfg.rng = model_base.derive(e).derive(static_cast<std::uint64_t>(k)).derive(
                static_cast<std::uint64_t>(r));
            grid.push_back(cfg);
          }
        }
        RngStream fold_rng = RngStream(seed, kFoldStream).derive(static_cast<std::uint64_t>(r));
        EvalReport cv = kfold_cv(split.train, a.folds, grid, pipeline, fold_rng);
        for (EvalEntry& entry : cv.entries) {
          entry.repeat = r;
          entry.seed = seed;
          all.entries.push_back(std::move(entry));
        }
      }
    }
    if (a.mode != "cv") {
      const EvalReport u = privacy_utility_sweep(
          split.train, split.test, a.epsilons, a.k, pipeline, a.repeats,
          RngStream(seed, kUtilityStream).derive(p), a.delta);
      for (EvalEntry entry : u.entries) {
        entry.seed = seed;
        all.entries.push_back(std::move(entry));
      }
    }
  }
  aggregate(all);
  bool any_ok = false;
  for (const auto& e : all.entries) any_ok = any_ok || !e.failed;
  if (!any_ok) {
    throw NumericalError("sweep: every entry failed; first error: " +
                         (all.entries.empty() ? std::string("none") : all.entries.front().message));
  }
  return all;
}

inline void cmd_sweep(const SweepArgs& a, const Common& c, std::ostream& out) {
  const fs::path dir = c.output;
  const Dataset data = detail::load_data(a.data);
  const EvalReport report = run_sweep(a, data, c.seed);
  detail::prepare_output(dir);
  save_report(dir / "report.json", dir / "report.csv", report);
  std::size_t failed = 0;
  for (const auto& e : report.entries) failed += e.failed ? 1 : 0;
  out << "wrote " << (dir / "report.json").string() << " and report.csv (" << report.entries.size()
      << " entries, " << failed << " failed)\n";
}

inline void cmd_preprocess(const PreprocessArgs& a, const Common& c, std::ostream& out) {
  const fs::path dir = c.output;
  const Dataset data = detail::load_data(a.data);
  Pipeline pipeline = Pipeline::parse(a.pipeline);
  const Matrix X = pipeline.fit_transform(data.X);
  detail::prepare_output(dir);
  write_dataset_csv(dir / "preprocessed.csv", Dataset(X, data.y), a.data.header);
  write_json(dir / "pipeline.json", pipeline_to_json(pipeline));
  out << "wrote " << (dir / "preprocessed.csv").string() << " (" << pipeline.tag() << ")\n";
}

// --- Entry point --------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Differentially private PLS1 regression toolkit", "edpls"};
  app.require_subcommand(1);

  Common common;
  SimulateArgs sim;
  FitArgs fit_args;
  PredictArgs pred;
  AttackArgs att;
  SweepArgs sweep;
  PreprocessArgs pre;

  auto* simulate = app.add_subcommand("simulate", "Generate the two-holder simulated spectra");
  detail::add_common(simulate, common);
  simulate->add_option("--n", sim.n, "Samples per holder")->check(CLI::Range(2, 1 << 24))
      ->capture_default_str();
  simulate->add_option("--m", sim.m, "Channels")->check(CLI::Range(1, 1 << 24))
      ->capture_default_str();

  auto* fit_cmd = app.add_subcommand("fit", "Fit baseline PLS1 or edPLS");
  detail::add_common(fit_cmd, common);
  detail::add_data_options(fit_cmd, fit_args.data);
  fit_cmd->add_option("--k", fit_args.k, "Latent variables")->check(CLI::Range(1, 1 << 20))
      ->capture_default_str();
  fit_cmd->add_option("--epsilon", fit_args.epsilon, "Privacy loss; omit for baseline PLS")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--delta", fit_args.delta, "Privacy failure probability")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  fit_cmd->add_option("--pipeline", fit_args.pipeline, "Preprocessing, e.g. sg:5,2,1|center")
      ->capture_default_str();

  auto* predict_cmd = app.add_subcommand("predict", "Apply a saved model");
  detail::add_common(predict_cmd, common);
  detail::add_data_options(predict_cmd, pred.data);
  predict_cmd->add_option("--model", pred.model, "Model JSON")->required()
      ->check(CLI::ExistingFile);

  auto* attack = app.add_subcommand("attack", "Orthogonal-complement attack on a global model");
  detail::add_common(attack, common);
  detail::add_data_options(attack, att.data);
  attack->add_option("--model", att.model, "Global model JSON")->required()
      ->check(CLI::ExistingFile);
  attack->add_option("--truth", att.truth, "CSV with the signal to score against")
      ->check(CLI::ExistingFile);
  attack->add_option("--target", att.target, "Attacked matrix")
      ->check(CLI::IsMember({"weights", "loadings"}))->capture_default_str();
  attack->add_option("--k", att.k, "Expected number of components");

  auto* sweep_cmd = app.add_subcommand("sweep", "Cross-validation and privacy-utility sweeps");
  detail::add_common(sweep_cmd, common);
  detail::add_data_options(sweep_cmd, sweep.data);
  sweep_cmd->add_option("--mode", sweep.mode, "cv, utility or both")
      ->check(CLI::IsMember({"cv", "utility", "both"}))->capture_default_str();
  sweep_cmd->add_option("--k", sweep.k, "Largest k in the CV grid; k of the utility sweep")
      ->capture_default_str();
  std::vector<std::string> sweep_eps{"1", "10", "100"};
  sweep_cmd->add_option("--epsilon", sweep_eps, "Privacy losses, comma separated; none for baseline only")
      ->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--delta", sweep.delta, "Privacy failure probability")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sweep_cmd->add_option("--pipeline", sweep.pipelines, "Preprocessing; repeat for several")
      ->capture_default_str();
  sweep_cmd->add_option("--folds", sweep.folds, "CV folds")->capture_default_str();
  sweep_cmd->add_option("--test-fraction", sweep.test_fraction, "Held-out share")
      ->capture_default_str();
  sweep_cmd->add_option("--repeats", sweep.repeats, "Repeats per configuration")
      ->capture_default_str();

  auto* preprocess = app.add_subcommand("preprocess", "Apply a preprocessing pipeline");
  detail::add_common(preprocess, common);
  detail::add_data_options(preprocess, pre.data);
  preprocess->add_option("--pipeline", pre.pipeline, "Preprocessing steps")
      ->capture_default_str();

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = detail::expand_config(std::move(args));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
  // CLI11 consumes a reversed argument vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : exit_code_for(ErrorKind::kArgument);
  }

  CLI::App* used = app.get_subcommands().front();
  try {
    if (used == sweep_cmd) sweep.epsilons = detail::parse_epsilons(sweep_eps);
    if (used == simulate) cmd_simulate(sim, common, out);
    if (used == fit_cmd) cmd_fit(fit_args, common, out);
    if (used == predict_cmd) cmd_predict(pred, common, out);
    if (used == attack) cmd_attack(att, common, out);
    if (used == sweep_cmd) cmd_sweep(sweep, common, out);
    if (used == preprocess) cmd_preprocess(pre, common, out);
    detail::write_text(fs::path(common.output) / "resolved_config.ini",
                       used->config_to_str(true, false));
  } catch (const SingularSystemError& e) {
    err << "error: " << e.what() << " (condition estimate " << e.condition_estimate()
        << "; try a smaller --k or a larger --epsilon)\n";
    return exit_code_for(e.kind());
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace edpls::cli
