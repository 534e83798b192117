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

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "edpls/dataset.hpp"
#include "edpls/error.hpp"
#include "edpls/eval.hpp"
#include "edpls/pls.hpp"
#include "edpls/preprocess.hpp"
#include "edpls/privacy.hpp"
#include "edpls/types.hpp"

// CSV datasets and JSON documents for models, pipelines and evaluation
// reports.
namespace edpls {

using json = nlohmann::json;

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// --- CSV --------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

// Comma-separated numeric table. Blank lines are skipped; every data line
// must have the same number of fields. Errors name the offending line.
inline CsvTable read_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line, ',');
    if (header_pending) {
      for (const auto& f : fields) table.header.push_back(detail::trim(f));
      header_pending = false;
      continue;
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string field = detail::trim(fields[c]);
      double v = 0.0;
      const char* first = field.data();
      const char* last = first + field.size();
      if (!field.empty() && *first == '+') ++first;
      const auto res = std::from_chars(first, last, v);
      if (field.empty() || res.ec != std::errc() || res.ptr != last) {
        throw IoError(path.string() + ":" + std::to_string(line_no) +
                      ": field " + std::to_string(c + 1) + " '" + field +
                      "' is not a number");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(rows.front().size()) + " fields, found " +
                    std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  const Index cols = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  table.values.resize(static_cast<Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Index c = 0; c < cols; ++c) {
      table.values(static_cast<Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    }
  }
  return table;
}

// Splits a numeric table into response column `response_col` and the
// remaining channels in their original order.
inline Dataset dataset_from_table(const Matrix& values, Index response_col = 0) {
  if (response_col < 0 || response_col >= values.cols()) {
    throw ShapeError("response column " + std::to_string(response_col) +
                     " outside table with " + std::to_string(values.cols()) +
                     " columns");
  }
  Matrix X(values.rows(), values.cols() - 1);
  for (Index c = 0, out = 0; c < values.cols(); ++c) {
    if (c == response_col) continue;
    X.col(out++) = values.col(c);
  }
  return Dataset(std::move(X), values.col(response_col));
}

inline Dataset read_dataset_csv(const std::filesystem::path& path,
                                bool has_header = false, Index response_col = 0) {
  return dataset_from_table(read_csv(path, has_header).values, response_col);
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

inline void write_matrix_csv(std::ostream& out, const Matrix& M,
                             const std::vector<std::string>& header = {}) {
  if (!header.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      out << (i ? "," : "") << header[i];
    }
    out << '\n';
  }
  for (Index r = 0; r < M.rows(); ++r) {
    for (Index c = 0; c < M.cols(); ++c) {
      out << (c ? "," : "") << format_double(M(r, c));
    }
    out << '\n';
  }
}

// Dataset as "y,x0,x1,...", response first.
inline void write_dataset_csv(const std::filesystem::path& path, const Dataset& data,
                              bool with_header = false) {
  const Dataset d = uncenter(data);
  Matrix table(d.samples(), d.channels() + 1);
  table.col(0) = d.y;
  table.rightCols(d.channels()) = d.X;
  std::vector<std::string> header;
  if (with_header) {
    header.push_back("y");
    for (Index c = 0; c < d.channels(); ++c) header.push_back("x" + std::to_string(c));
  }
  auto out = open_for_write(path);
  write_matrix_csv(out, table, header);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline void write_json(const std::filesystem::path& path, const json& doc) {
  auto out = open_for_write(path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": invalid JSON: " + e.what());
  }
}

// --- JSON encoders ----------------------------------------------------------

inline json to_json_value(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

// Matrices are stored as arrays of columns.
inline json to_json_columns(const Matrix& M) {
  json cols = json::array();
  for (Index c = 0; c < M.cols(); ++c) cols.push_back(to_json_value(Vector(M.col(c))));
  return cols;
}

inline Vector vector_from_json(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

inline Matrix matrix_from_json_columns(const json& j, Index rows) {
  Matrix M(rows, static_cast<Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    const Vector col = vector_from_json(j[c]);
    if (col.size() != rows) throw IoError("model JSON: ragged matrix column");
    M.col(static_cast<Index>(c)) = col;
  }
  return M;
}

inline json pipeline_to_json(const Pipeline& p) {
  json steps = json::array();
  for (const auto& step : p.steps()) {
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, SgStep>) {
            steps.push_back({{"name", "sg"},
                             {"window", s.config.window},
                             {"polyorder", s.config.polyorder},
                             {"derivative", s.config.derivative}});
          } else if constexpr (std::is_same_v<S, MscStep>) {
            json j{{"name", "msc"}};
            if (s.reference) j["reference"] = to_json_value(*s.reference);
            steps.push_back(j);
          } else if constexpr (std::is_same_v<S, AirPlsStep>) {
            steps.push_back({{"name", "airpls"},
                             {"lambda", s.config.lambda},
                             {"max_iterations", s.config.max_iterations},
                             {"diff_order", s.config.diff_order}});
          } else {
            json j{{"name", "center"}};
            if (s.means) j["means"] = to_json_value(*s.means);
            steps.push_back(j);
          }
        },
        step);
  }
  return {{"spec", p.tag()}, {"fitted", p.fitted()}, {"steps", steps}};
}

inline Pipeline pipeline_from_json(const json& j) {
  std::vector<PreprocessStep> steps;
  for (const json& s : j.at("steps")) {
    const std::string name = s.at("name").get<std::string>();
    if (name == "sg") {
      steps.emplace_back(SgStep{{s.at("window").get<int>(), s.at("polyorder").get<int>(),
                                 s.at("derivative").get<int>()}});
    } else if (name == "msc") {
      MscStep step;
      if (s.contains("reference")) step.reference = vector_from_json(s["reference"]);
      steps.emplace_back(step);
    } else if (name == "airpls") {
      steps.emplace_back(AirPlsStep{{s.at("lambda").get<double>(),
                                     s.at("max_iterations").get<int>(),
                                     s.at("diff_order").get<int>()}});
    } else if (name == "center") {
      CenterStep step;
      if (s.contains("means")) step.means = vector_from_json(s["means"]);
      steps.emplace_back(step);
    } else {
      throw IoError("pipeline JSON: unknown step '" + name + "'");
    }
  }
  Pipeline p(std::move(steps));
  if (j.value("fitted", false)) p.mark_fitted();
  return p;
}

inline json model_to_json(const PlsModel& model,
                          const std::optional<Pipeline>& pipeline = {}) {
  json log = json::array();
  for (const auto& cal : model.calibration_log) {
    log.push_back({{"target", std::string(to_string(cal.target))},
                   {"sensitivity", cal.sensitivity},
                   {"sigma", cal.sigma},
                   {"method", std::string(to_string(cal.method))}});
  }
  json privacy = nullptr;
  if (model.privacy) {
    privacy = {{"epsilon", model.privacy->epsilon()},
               {"delta", model.privacy->delta()}};
  }
  json doc{
      {"format", "edpls-model"},
      {"version", 1},
      {"k", model.k},
      {"requested_k", model.requested_k},
      {"early_stopped", model.early_stopped},
      {"channels", model.channels()},
      {"samples", model.T.rows()},
      {"seed", model.seed},
      {"stream_id", model.stream_id},
      {"privacy", privacy},
      {"x_means", to_json_value(model.x_means)},
      {"y_mean", model.y_mean},
      {"W", to_json_columns(model.W)},
      {"P", to_json_columns(model.P)},
      {"T", to_json_columns(model.T)},
      {"c", to_json_value(model.c)},
      {"b", to_json_value(model.b)},
      {"calibration_log", log},
  };
  doc["pipeline"] = pipeline ? pipeline_to_json(*pipeline) : json(nullptr);
  return doc;
}

struct LoadedModel {
  PlsModel model;
  std::optional<Pipeline> pipeline;
};

inline LoadedModel model_from_json(const json& doc) {
  try {
    if (doc.value("format", "") != "edpls-model") {
      throw IoError("model JSON: missing format tag 'edpls-model'");
    }
    LoadedModel out;
    PlsModel& m = out.model;
    m.k = doc.at("k").get<int>();
    m.requested_k = doc.value("requested_k", m.k);
    m.early_stopped = doc.value("early_stopped", false);
    const auto channels = doc.at("channels").get<Index>();
    const auto samples = doc.at("samples").get<Index>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.stream_id = doc.value("stream_id", std::uint64_t{0});
    if (!doc.at("privacy").is_null()) {
      m.privacy = PrivacyBudget(doc["privacy"].at("epsilon").get<double>(),
                                doc["privacy"].at("delta").get<double>());
    }
    m.x_means = vector_from_json(doc.at("x_means"));
    m.y_mean = doc.at("y_mean").get<double>();
    m.W = matrix_from_json_columns(doc.at("W"), channels);
    m.P = matrix_from_json_columns(doc.at("P"), channels);
    m.T = matrix_from_json_columns(doc.at("T"), samples);
    m.c = vector_from_json(doc.at("c"));
    m.b = vector_from_json(doc.at("b"));
    for (const json& e : doc.at("calibration_log")) {
      m.calibration_log.push_back(
          {noise_target_from_string(e.at("target").get<std::string>()),
           e.at("sensitivity").get<double>(), e.at("sigma").get<double>(),
           calibration_method_from_string(e.at("method").get<std::string>())});
    }
    if (m.b.size() != channels || m.x_means.size() != channels ||
        m.W.cols() != m.k || m.c.size() != m.k) {
      throw IoError("model JSON: inconsistent dimensions");
    }
    if (doc.contains("pipeline") && !doc["pipeline"].is_null()) {
      out.pipeline = pipeline_from_json(doc["pipeline"]);
    }
    return out;
  } catch (const json::exception& e) {
    throw IoError(std::string("model JSON: ") + e.what());
  } catch (const ArgumentError& e) {
    throw IoError(std::string("model JSON: ") + e.what());
  }
}

inline void save_model(const std::filesystem::path& path, const PlsModel& model,
                       const std::optional<Pipeline>& pipeline = {}) {
  write_json(path, model_to_json(model, pipeline));
}

inline LoadedModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_json(path));
}

// --- Evaluation reports -----------------------------------------------------

inline json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json report_to_json(const EvalReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"kind", std::string(to_string(e.kind))},
                       {"epsilon", optional_json(e.epsilon)},
                       {"k", e.k},
                       {"preprocessing", e.preprocessing},
                       {"rmsecv", optional_json(e.rmsecv)},
                       {"rmsep", optional_json(e.rmsep)},
                       {"r2p", optional_json(e.r2p)},
                       {"seed", e.seed},
                       {"repeat", e.repeat},
                       {"failed", e.failed},
                       {"message", e.message}});
  }
  json aggregates = json::array();
  for (const auto& a : report.aggregates) {
    aggregates.push_back({{"kind", std::string(to_string(a.kind))},
                          {"epsilon", optional_json(a.epsilon)},
                          {"k", a.k},
                          {"preprocessing", a.preprocessing},
                          {"metric", a.metric},
                          {"count", a.count},
                          {"mean", a.mean},
                          {"std_error", a.std_error},
                          {"median", a.median}});
  }
  return {{"format", "edpls-eval-report"},
          {"entries", entries},
          {"aggregates", aggregates},
          {"best_cv", report.best_cv}};
}

// Tidy CSV, one row per entry.
inline void write_report_csv(std::ostream& out, const EvalReport& report) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  out << "kind,epsilon,k,preprocessing,repeat,seed,rmsecv,rmsep,r2p,failed\n";
  for (const auto& e : report.entries) {
    out << to_string(e.kind) << ',' << opt(e.epsilon) << ',' << e.k << ",\""
        << e.preprocessing << "\"," << e.repeat << ',' << e.seed << ','
        << opt(e.rmsecv) << ',' << opt(e.rmsep) << ',' << opt(e.r2p) << ','
        << (e.failed ? 1 : 0) << '\n';
  }
}

inline void save_report(const std::filesystem::path& json_path,
                        const std::filesystem::path& csv_path,
                        const EvalReport& report) {
  write_json(json_path, report_to_json(report));
  auto out = open_for_write(csv_path);
  write_report_csv(out, report);
  if (!out) throw IoError("failed writing '" + csv_path.string() + "'");
}

}  // namespace edpls
