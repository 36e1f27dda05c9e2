// Copyright 2026 The Labelopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "labelopt/io.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "labelopt/csv.hpp"
#include "labelopt/error.hpp"

namespace labelopt::io {

std::vector<std::string> CollectTruthLabels(const fs::path& dataset_path) {
  const csv::Table table = csv::ReadFile(dataset_path);
  const size_t truth = table.RequireColumn("truth", dataset_path.string());
  std::vector<std::string> out;
  for (const auto& row : table.rows) {
    if (!row[truth].empty()) out.push_back(row[truth]);
  }
  return out;
}

std::vector<std::string> CollectPredictionLabels(std::span<const fs::path> prediction_paths) {
  std::vector<std::string> out;
  for (const fs::path& path : prediction_paths) {
    const csv::Table table = csv::ReadFile(path);
    const size_t label = table.RequireColumn("label", path.string());
    for (const auto& row : table.rows) out.push_back(row[label]);
  }
  return out;
}

LabelAlphabet InferAlphabet(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  tokens.erase(std::remove(tokens.begin(), tokens.end(), std::string()), tokens.end());
  Require(tokens.size() >= 2, ErrorCode::kInvalidArgument,
          "found fewer than two distinct labels; pass the alphabet explicitly");
  return LabelAlphabet(std::move(tokens));
}

Dataset LoadDataset(const fs::path& dataset_path, const std::optional<fs::path>& features_path,
                    const LabelAlphabet& alphabet, bool read_truth) {
  const std::string src = dataset_path.string();
  const csv::Table table = csv::ReadFile(dataset_path);
  const size_t id_col = table.RequireColumn("id", src);
  const auto truth_col = read_truth ? table.Column("truth") : std::nullopt;
  const auto uri_col = table.Column("payload_uri");

  std::vector<Element> elements;
  elements.reserve(table.rows.size());
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Element e;
    e.id = row[id_col];
    if (truth_col && !row[*truth_col].empty()) {
      auto label = alphabet.Find(row[*truth_col]);
      Require(label.has_value(), ErrorCode::kParse,
              src + ":" + std::to_string(table.line_numbers[r]) + ": label '" + row[*truth_col] +
                  "' is not in the alphabet");
      e.truth = *label;
    }
    if (uri_col && !row[*uri_col].empty()) e.payload_uri = row[*uri_col];
    elements.push_back(std::move(e));
  }

  if (features_path) {
    const std::string fsrc = features_path->string();
    const csv::Table features = csv::ReadFile(*features_path);
    Require(!features.header.empty() && features.header[0] == "id", ErrorCode::kParse,
            fsrc + ": first column must be 'id'");
    const size_t d = features.header.size() - 1;
    Require(d >= 1, ErrorCode::kParse, fsrc + ": no feature columns");
    std::unordered_map<std::string, size_t> position;
    for (size_t i = 0; i < elements.size(); ++i) position.emplace(elements[i].id, i);
    size_t seen = 0;
    for (size_t r = 0; r < features.rows.size(); ++r) {
      const auto& row = features.rows[r];
      auto it = position.find(row[0]);
      const std::string where = fsrc + ":" + std::to_string(features.line_numbers[r]);
      Require(it != position.end(), ErrorCode::kParse, where + ": unknown id '" + row[0] + "'");
      Element& e = elements[it->second];
      Require(!e.features.has_value(), ErrorCode::kParse, where + ": duplicate id '" + row[0] + "'");
      std::vector<double> values(d);
      for (size_t k = 0; k < d; ++k) values[k] = csv::ParseDouble(row[k + 1], where);
      e.features = std::move(values);
      ++seen;
    }
    Require(seen == elements.size(), ErrorCode::kParse,
            fsrc + ": features missing for " + std::to_string(elements.size() - seen) + " elements");
  }
  return Dataset(std::move(elements), alphabet);
}

Dataset StripTruth(const Dataset& dataset) {
  std::vector<Element> elements = dataset.elements();
  for (Element& e : elements) e.truth.reset();
  return Dataset(std::move(elements), dataset.alphabet());
}

PredictionSet LoadPredictions(std::span<const fs::path> paths, const LabelAlphabet& alphabet) {
  struct Row {
    std::string element;
    std::string classifier;
    Prediction prediction;
  };
  std::vector<Row> rows;
  std::vector<std::string> classifiers;
  for (const fs::path& path : paths) {
    const std::string src = path.string();
    const csv::Table table = csv::ReadFile(path);
    const size_t e_col = table.RequireColumn("element_id", src);
    const size_t c_col = table.RequireColumn("classifier_id", src);
    const size_t l_col = table.RequireColumn("label", src);
    const size_t p_col = table.RequireColumn("confidence", src);
    for (size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      const std::string where = src + ":" + std::to_string(table.line_numbers[r]);
      auto label = alphabet.Find(row[l_col]);
      Require(label.has_value(), ErrorCode::kParse,
              where + ": label '" + row[l_col] + "' is not in the alphabet");
      const double confidence = csv::ParseDouble(row[p_col], where);
      Require(confidence > 0.0 && confidence <= 1.0, ErrorCode::kParse,
              where + ": confidence " + row[p_col] + " outside (0,1]");
      Require(!row[c_col].empty(), ErrorCode::kParse, where + ": empty classifier_id");
      if (std::find(classifiers.begin(), classifiers.end(), row[c_col]) == classifiers.end()) {
        classifiers.push_back(row[c_col]);
      }
      rows.push_back({row[e_col], row[c_col], {*label, confidence}});
    }
  }
  PredictionSet set(classifiers);
  for (const Row& row : rows) {
    const int j = static_cast<int>(
        std::find(classifiers.begin(), classifiers.end(), row.classifier) - classifiers.begin());
    set.Set(j, row.element, row.prediction);
  }
  return set;
}

std::string FormatPredictions(const PredictionSet& predictions, const LabelAlphabet& alphabet) {
  std::ostringstream out;
  csv::WriteRow(out, {"element_id", "classifier_id", "label", "confidence"});
  for (const std::string& id : predictions.element_ids()) {
    for (int j = 0; j < predictions.num_classifiers(); ++j) {
      if (!predictions.Has(j, id)) continue;
      const Prediction p = predictions.Get(j, id);
      csv::WriteRow(out, {id, predictions.classifier_ids()[j], alphabet.name(p.label),
                          csv::FormatDouble(p.confidence)});
    }
  }
  return out.str();
}

std::string FormatDataset(const Dataset& dataset) {
  std::ostringstream out;
  csv::WriteRow(out, {"id", "truth", "payload_uri"});
  for (const Element& e : dataset.elements()) {
    csv::WriteRow(out, {e.id, e.truth ? dataset.alphabet().name(*e.truth) : "",
                        e.payload_uri.value_or("")});
  }
  return out.str();
}

std::string FormatFeatures(const Dataset& dataset) {
  Require(dataset.has_features(), ErrorCode::kFailedPrecondition, "dataset has no features");
  std::ostringstream out;
  std::vector<std::string> header{"id"};
  for (int k = 1; k <= dataset.feature_dim(); ++k) header.push_back("f" + std::to_string(k));
  csv::WriteRow(out, header);
  for (const Element& e : dataset.elements()) {
    std::vector<std::string> row{e.id};
    for (double v : *e.features) row.push_back(csv::FormatDouble(v));
    csv::WriteRow(out, row);
  }
  return out.str();
}

std::unordered_map<std::string, LabelId> LoadLabels(const fs::path& path,
                                                    const LabelAlphabet& alphabet) {
  const std::string src = path.string();
  const csv::Table table = csv::ReadFile(path);
  const size_t id_col = table.RequireColumn("id", src);
  auto label_col = table.Column("label");
  if (!label_col) label_col = table.Column("truth");
  Require(label_col.has_value(), ErrorCode::kParse, src + ": needs a 'label' or 'truth' column");
  std::unordered_map<std::string, LabelId> out;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row[*label_col].empty()) continue;
    const std::string where = src + ":" + std::to_string(table.line_numbers[r]);
    auto label = alphabet.Find(row[*label_col]);
    Require(label.has_value(), ErrorCode::kParse,
            where + ": label '" + row[*label_col] + "' is not in the alphabet");
    Require(out.emplace(row[id_col], *label).second, ErrorCode::kParse,
            where + ": duplicate id '" + row[id_col] + "'");
  }
  return out;
}

std::unordered_map<std::string, double> LoadScalarColumn(const fs::path& path,
                                                         const std::string& column) {
  const std::string src = path.string();
  const csv::Table table = csv::ReadFile(path);
  const size_t id_col = table.RequireColumn("id", src);
  const size_t v_col = table.RequireColumn(column, src);
  std::unordered_map<std::string, double> out;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const std::string where = src + ":" + std::to_string(table.line_numbers[r]);
    const double v = csv::ParseDouble(table.rows[r][v_col], where);
    Require(std::isfinite(v), ErrorCode::kParse, where + ": non-finite value");
    Require(out.emplace(table.rows[r][id_col], v).second, ErrorCode::kParse,
            where + ": duplicate id '" + table.rows[r][id_col] + "'");
  }
  return out;
}

OptimizationInstance ParseInstance(std::string_view text, std::string_view source) {
  const std::string src(source);
  const csv::Table table = csv::Parse(text, source);
  const size_t z_col = table.RequireColumn("z", src);
  const size_t b_col = table.RequireColumn("b", src);
  std::vector<size_t> theta_cols;
  for (int j = 1;; ++j) {
    auto col = table.Column("theta" + std::to_string(j));
    if (!col) break;
    theta_cols.push_back(*col);
  }
  Require(!theta_cols.empty(), ErrorCode::kParse, src + ": no theta1..thetan columns");
  OptimizationInstance instance(static_cast<int>(theta_cols.size()));
  std::vector<double> theta(theta_cols.size());
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = src + ":" + std::to_string(table.line_numbers[r]);
    const long long z = csv::ParseInt(row[z_col], where);
    const long long b = csv::ParseInt(row[b_col], where);
    Require((z == 0 || z == 1) && (b == 0 || b == 1), ErrorCode::kParse,
            where + ": z and b must be 0 or 1");
    for (size_t j = 0; j < theta_cols.size(); ++j) {
      theta[j] = csv::ParseDouble(row[theta_cols[j]], where);
    }
    instance.AddRow(theta, z == 1, b == 1);
  }
  instance.Validate();
  return instance;
}

OptimizationInstance LoadInstance(const fs::path& path) {
  return ParseInstance(csv::ReadText(path), path.string());
}

std::string FormatInstance(const OptimizationInstance& instance) {
  std::ostringstream out;
  std::vector<std::string> header{"z", "b"};
  for (int j = 1; j <= instance.num_classifiers(); ++j) header.push_back("theta" + std::to_string(j));
  csv::WriteRow(out, header);
  for (int i = 0; i < instance.num_rows(); ++i) {
    std::vector<std::string> row{instance.z(i) ? "1" : "0", instance.b(i) ? "1" : "0"};
    for (double t : instance.theta(i)) row.push_back(csv::FormatDouble(t));
    csv::WriteRow(out, row);
  }
  return out.str();
}

Json SolutionToJson(const MilpSolution& solution) {
  Json j;
  j["omega"] = solution.omega;
  std::vector<int> x(solution.x.begin(), solution.x.end());
  j["x"] = x;
  j["manual_count"] = solution.manual_count;
  j["lower_bound"] = solution.lower_bound;
  j["gap"] = solution.gap;
  j["status"] = std::string(MilpStatusName(solution.status));
  j["nodes"] = solution.nodes;
  j["lp_iterations"] = solution.lp_iterations;
  return j;
}

MilpSolution SolutionFromJson(const Json& json) {
  try {
    MilpSolution s;
    s.omega = json.at("omega").get<std::vector<double>>();
    for (int v : json.at("x").get<std::vector<int>>()) s.x.push_back(v ? 1 : 0);
    s.manual_count = json.at("manual_count").get<int64_t>();
    s.lower_bound = json.at("lower_bound").get<double>();
    s.gap = json.at("gap").get<double>();
    s.status = ParseMilpStatus(json.at("status").get<std::string>());
    s.nodes = json.value("nodes", int64_t{0});
    s.lp_iterations = json.value("lp_iterations", int64_t{0});
    return s;
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string("solution JSON: ") + e.what());
  }
}

Json IterationToJson(const IterationRecord& it) {
  return {{"iteration", it.iteration},
          {"omega", it.omega},
          {"milp_status", it.milp_status},
          {"milp_gap", it.milp_gap},
          {"optimization_rows", it.optimization_rows},
          {"auto_labelled", it.auto_labelled},
          {"residual", it.residual},
          {"queried", it.queried},
          {"condition1", it.condition1},
          {"condition2", it.condition2},
          {"both_conditions", it.both_conditions}};
}

IterationRecord IterationFromJson(const Json& it) {
  IterationRecord rec;
  rec.iteration = it.at("iteration").get<int>();
  rec.omega = it.at("omega").get<std::vector<double>>();
  rec.milp_status = it.at("milp_status").get<std::string>();
  rec.milp_gap = it.at("milp_gap").get<double>();
  rec.optimization_rows = it.at("optimization_rows").get<int64_t>();
  rec.auto_labelled = it.at("auto_labelled").get<int64_t>();
  rec.residual = it.at("residual").get<int64_t>();
  rec.queried = it.at("queried").get<int64_t>();
  rec.condition1 = it.value("condition1", int64_t{0});
  rec.condition2 = it.value("condition2", int64_t{0});
  rec.both_conditions = it.value("both_conditions", int64_t{0});
  return rec;
}

Json ReportToJson(const RunReport& report, ReportFormat format) {
  Json j;
  j["method"] = report.method;
  Json assignments = Json::array();
  for (const Assignment& a : report.assignments) {
    assignments.push_back(
        {{"id", a.id}, {"label", a.label}, {"source", std::string(LabelSourceName(a.source))}});
  }
  j["assignments"] = std::move(assignments);
  j["residual_manual_ids"] = report.residual_manual_ids;
  Json metrics;
  metrics["accuracy"] = report.accuracy ? Json(*report.accuracy) : Json(nullptr);
  metrics["manual_effort"] = report.manual_effort;
  j["metrics"] = std::move(metrics);
  if (format.include_timings) {
    Json timings = Json::object();
    for (const auto& [k, v] : report.timings) timings[k] = v;
    j["timings"] = std::move(timings);
  }
  Json milp;
  milp["status"] = report.milp_status;
  milp["gap"] = report.milp_gap;
  milp["omega"] = report.omega;
  milp["optimization_ids"] = report.optimization_ids;
  milp["x"] = std::vector<int>(report.optimization_x.begin(), report.optimization_x.end());
  j["milp"] = std::move(milp);
  Json iterations = Json::array();
  for (const IterationRecord& it : report.iterations) iterations.push_back(IterationToJson(it));
  j["iterations"] = std::move(iterations);
  Json details = Json::object();
  for (const auto& [k, v] : report.details) details[k] = v;
  j["details"] = std::move(details);
  j["seed"] = report.seed;
  return j;
}

RunReport ReportFromJson(const Json& json) {
  try {
    RunReport r;
    r.method = json.value("method", std::string());
    for (const auto& a : json.at("assignments")) {
      r.assignments.push_back({a.at("id").get<std::string>(), a.at("label").get<std::string>(),
                               ParseLabelSource(a.at("source").get<std::string>())});
    }
    r.residual_manual_ids = json.value("residual_manual_ids", std::vector<std::string>{});
    const Json& metrics = json.at("metrics");
    if (!metrics.at("accuracy").is_null()) r.accuracy = metrics.at("accuracy").get<double>();
    r.manual_effort = metrics.at("manual_effort").get<double>();
    if (json.contains("timings")) {
      for (const auto& [k, v] : json.at("timings").items()) r.timings[k] = v.get<double>();
    }
    if (json.contains("milp")) {
      const Json& milp = json.at("milp");
      r.milp_status = milp.value("status", std::string());
      r.milp_gap = milp.value("gap", 0.0);
      r.omega = milp.value("omega", std::vector<double>{});
      r.optimization_ids = milp.value("optimization_ids", std::vector<std::string>{});
      for (int v : milp.value("x", std::vector<int>{})) r.optimization_x.push_back(v ? 1 : 0);
    }
    if (json.contains("iterations")) {
      for (const auto& it : json.at("iterations")) r.iterations.push_back(IterationFromJson(it));
    }
    if (json.contains("details")) {
      for (const auto& [k, v] : json.at("details").items()) r.details[k] = v.get<double>();
    }
    r.seed = json.value("seed", uint64_t{0});
    return r;
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string("report JSON: ") + e.what());
  }
}

std::string DumpJson(const Json& json) { return json.dump(2) + "\n"; }

}  // namespace labelopt::io
