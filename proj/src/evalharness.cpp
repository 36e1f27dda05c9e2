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

#include "labelopt/evalharness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "labelopt/csv.hpp"
#include "labelopt/error.hpp"
#include "labelopt/io.hpp"
#include "labelopt/rng.hpp"

namespace labelopt {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

double Accuracy(const RunReport& report, const std::unordered_map<std::string, std::string>& truth) {
  Require(!report.assignments.empty(), ErrorCode::kInvalidArgument, "report has no assignments");
  size_t correct = 0;
  for (const Assignment& a : report.assignments) {
    auto it = truth.find(a.id);
    Require(it != truth.end(), ErrorCode::kInvalidArgument, "no truth for '" + a.id + "'");
    correct += it->second == a.label ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(report.assignments.size());
}

double ManualEffort(const RunReport& report) {
  if (report.assignments.empty()) return 0.0;
  const size_t manual = report.CountSource(LabelSource::kManualInitial) +
                        report.CountSource(LabelSource::kManualResidual);
  return static_cast<double>(manual) / static_cast<double>(report.assignments.size());
}

std::unordered_map<std::string, std::string> TruthTokens(const Dataset& dataset) {
  std::unordered_map<std::string, std::string> out;
  for (const Element& e : dataset.elements()) {
    if (e.truth) out.emplace(e.id, dataset.alphabet().name(*e.truth));
  }
  return out;
}

void SynthDatasetSpec::Validate() const {
  Require(class_count >= 2, ErrorCode::kConfig, "classCount must be at least 2");
  Require(size >= class_count, ErrorCode::kConfig, "size must be at least classCount");
  Require(feature_dim >= 1, ErrorCode::kConfig, "featureDim must be positive");
  Require(cluster_count >= class_count, ErrorCode::kConfig, "clusterCount must be at least classCount");
  Require(p_min >= 0.0 && p_max <= 1.0 && p_min <= p_max, ErrorCode::kConfig,
          "correctness range must lie within [0,1]");
  Require(separation >= 0.0, ErrorCode::kConfig, "separation must be non-negative");
}

SynthDatasetSpec SynthDatasetSpec::FromJson(std::string_view text) {
  try {
    const Json j = Json::parse(text);
    SynthDatasetSpec s;
    s.size = j.value("size", s.size);
    s.class_count = j.value("class_count", s.class_count);
    s.feature_dim = j.value("feature_dim", s.feature_dim);
    s.cluster_count = j.value("cluster_count", s.cluster_count);
    if (j.contains("correct_probability_range")) {
      const auto range = j.at("correct_probability_range").get<std::vector<double>>();
      Require(range.size() == 2, ErrorCode::kConfig, "correct_probability_range needs two values");
      s.p_min = range[0];
      s.p_max = range[1];
    }
    s.separation = j.value("separation", s.separation);
    s.seed = j.value("seed", s.seed);
    s.Validate();
    return s;
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kConfig, std::string("synthetic spec: ") + e.what());
  }
}

namespace {

std::string Padded(int64_t value, int64_t largest) {
  const int width = static_cast<int>(std::to_string(largest).size());
  std::string digits = std::to_string(value);
  return std::string(static_cast<size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') + digits;
}

}  // namespace

SynthData GenerateSynth(const SynthDatasetSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  const int d = spec.feature_dim;
  std::vector<std::vector<double>> means(spec.cluster_count, std::vector<double>(d, 0.0));
  for (int c = 0; c < spec.cluster_count; ++c) {
    if (c < 2 * d) {
      means[c][c % d] = c < d ? spec.separation : -spec.separation;
    } else {
      for (double& v : means[c]) v = spec.separation * rng.Normal();
    }
  }
  std::vector<std::string> labels;
  for (int k = 0; k < spec.class_count; ++k) labels.push_back("L" + Padded(k, spec.class_count - 1));
  LabelAlphabet alphabet(labels);

  SynthData out;
  std::vector<Element> elements;
  elements.reserve(static_cast<size_t>(spec.size));
  for (int64_t i = 0; i < spec.size; ++i) {
    // The first elements cover every cluster so every class is present.
    const int cluster = i < spec.cluster_count ? static_cast<int>(i)
                                               : static_cast<int>(rng.Index(spec.cluster_count));
    Element e;
    e.id = "e" + Padded(i, spec.size - 1);
    e.truth = static_cast<LabelId>(cluster % spec.class_count);
    e.payload_uri = "synth://" + e.id;
    std::vector<double> x(d);
    for (int k = 0; k < d; ++k) x[k] = means[cluster][k] + rng.Normal();
    e.features = std::move(x);
    out.correctness.emplace(e.id, rng.Uniform(spec.p_min, spec.p_max));
    elements.push_back(std::move(e));
  }
  out.dataset = std::make_shared<const Dataset>(std::move(elements), std::move(alphabet));
  return out;
}

SynthFiles WriteSynth(const SynthData& data, const fs::path& dir) {
  fs::create_directories(dir);
  SynthFiles files{dir / "dataset.csv", dir / "features.csv", dir / "correctness.csv"};
  csv::WriteText(files.dataset, io::FormatDataset(*data.dataset));
  csv::WriteText(files.features, io::FormatFeatures(*data.dataset));
  std::ostringstream out;
  csv::WriteRow(out, {"id", "p"});
  for (const Element& e : data.dataset->elements()) {
    csv::WriteRow(out, {e.id, csv::FormatDouble(data.correctness.at(e.id))});
  }
  csv::WriteText(files.correctness, out.str());
  return files;
}

void GridSpec::Validate() const {
  Require(!h_initial_values.empty() && !classifier_counts.empty() && !alpha_values.empty(),
          ErrorCode::kConfig, "grid lists must be non-empty");
  Require(repetitions >= 1, ErrorCode::kConfig, "repetitions must be at least 1");
  Require(workers >= 1, ErrorCode::kConfig, "workers must be at least 1");
  Require(beta >= 1, ErrorCode::kConfig, "beta must be at least 1");
  for (int n : classifier_counts) Require(n >= 1, ErrorCode::kConfig, "classifier counts must be positive");
  Require(providers == "synthetic" || providers == "files" || providers == "softmax", ErrorCode::kConfig,
          "providers must be synthetic, files or softmax");
  Require(baseline_classifier == "synthetic" || baseline_classifier == "files" ||
              baseline_classifier == "softmax",
          ErrorCode::kConfig, "baseline_classifier must be synthetic, files or softmax");
}

GridSpec GridSpec::FromJson(std::string_view text, const fs::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  try {
    const Json j = Json::parse(text);
    GridSpec s;
    s.dataset = resolve(j.at("dataset").get<std::string>());
    if (j.contains("features")) s.features = resolve(j.at("features").get<std::string>());
    if (j.contains("correctness")) s.correctness = resolve(j.at("correctness").get<std::string>());
    if (j.contains("predictions")) {
      for (const auto& p : j.at("predictions")) s.predictions.push_back(resolve(p.get<std::string>()));
    }
    if (j.contains("metric")) s.metric = resolve(j.at("metric").get<std::string>());
    s.metric_column = j.value("metric_column", s.metric_column);
    if (j.contains("alphabet")) s.alphabet = j.at("alphabet").get<std::vector<std::string>>();
    s.providers = j.value("providers", s.providers);
    s.synthetic_p = j.value("synthetic_p", s.synthetic_p);
    s.calibrated = j.value("calibrated", s.calibrated);
    s.baseline_classifier = j.value("baseline_classifier", s.baseline_classifier);
    s.h_initial_values = j.value("h_initial_values", s.h_initial_values);
    s.classifier_counts = j.value("classifier_counts", s.classifier_counts);
    s.alpha_values = j.value("alpha_values", s.alpha_values);
    s.repetitions = j.value("repetitions", s.repetitions);
    s.base_seed = j.value("base_seed", s.base_seed);
    s.workers = j.value("workers", s.workers);
    s.beta = j.value("beta", s.beta);
    s.effort_matched = j.value("effort_matched", s.effort_matched);
    s.s_max = j.value("s_max", s.s_max);
    if (j.contains("node_limit")) s.node_limit = j.at("node_limit").get<int64_t>();
    if (j.contains("time_limit_seconds")) s.time_limit_seconds = j.at("time_limit_seconds").get<double>();
    s.train.epochs = j.value("epochs", s.train.epochs);
    s.train.learning_rate = j.value("learning_rate", s.train.learning_rate);
    s.train.l2 = j.value("l2", s.train.l2);
    s.overfit_gap = j.value("overfit_gap", s.overfit_gap);
    s.max_iterations = j.value("max_iterations", s.max_iterations);
    if (j.contains("report_dir")) s.report_dir = resolve(j.at("report_dir").get<std::string>());
    s.report_timings = j.value("report_timings", s.report_timings);
    s.Validate();
    return s;
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kConfig, std::string("grid spec: ") + e.what());
  }
}

GridContext::GridContext(const GridSpec& spec) : spec_(spec) {
  spec_.Validate();
  LabelAlphabet alphabet;
  if (spec_.alphabet) {
    alphabet = LabelAlphabet(*spec_.alphabet);
  } else {
    std::vector<std::string> tokens = io::CollectTruthLabels(spec_.dataset);
    for (auto& t : io::CollectPredictionLabels(spec_.predictions)) tokens.push_back(std::move(t));
    alphabet = io::InferAlphabet(std::move(tokens));
  }
  dataset_ = std::make_shared<const Dataset>(io::LoadDataset(spec_.dataset, spec_.features, alphabet));
  Require(dataset_->has_truth(), ErrorCode::kFailedPrecondition,
          "grid runs simulate labelling and need truth for every element");
  if (spec_.correctness) correctness_ = io::LoadScalarColumn(*spec_.correctness, "p");
  if (!spec_.predictions.empty()) {
    file_providers_ = FileProviders(io::LoadPredictions(spec_.predictions, alphabet));
  }
  if (spec_.metric) metric_ = io::LoadScalarColumn(*spec_.metric, spec_.metric_column);
}

std::vector<ProviderSpec> GridContext::Providers(int n) const {
  std::vector<ProviderSpec> out;
  if (spec_.providers == "files") {
    Require(static_cast<int>(file_providers_.size()) >= n, ErrorCode::kConfig,
            "grid asks for " + std::to_string(n) + " classifiers but the prediction files hold " +
                std::to_string(file_providers_.size()));
    out.assign(file_providers_.begin(), file_providers_.begin() + n);
    return out;
  }
  for (int j = 1; j <= n; ++j) {
    const std::string id = "c" + std::to_string(j);
    if (spec_.providers == "softmax") {
      out.push_back(ProviderSpec::Softmax(id, spec_.train));
    } else {
      SynthConfig config;
      config.correct_probability = spec_.synthetic_p;
      config.per_element = correctness_;
      config.calibrated = spec_.calibrated;
      out.push_back(ProviderSpec::Synthetic(id, std::move(config)));
    }
  }
  return out;
}

ProviderSpec GridContext::BaselineClassifier() const {
  if (spec_.baseline_classifier == "files") {
    Require(!file_providers_.empty(), ErrorCode::kConfig, "no prediction files for the baseline");
    return file_providers_.front();
  }
  if (spec_.baseline_classifier == "synthetic") {
    SynthConfig config;
    config.correct_probability = spec_.synthetic_p;
    config.per_element = correctness_;
    config.calibrated = spec_.calibrated;
    return ProviderSpec::Synthetic("c1", std::move(config));
  }
  return ProviderSpec::Softmax("c1", spec_.train);
}

RunReport GridContext::RunCell(const GridCell& cell) const {
  GroundTruthOracle oracle = GroundTruthOracle::FromDataset(*dataset_);
  if (IsOpalMethod(cell.method)) {
    OpalConfig config;
    config.alpha = cell.alpha.value_or(1.0);
    config.split.h_initial = cell.h;
    config.split.s_max = spec_.s_max;
    config.milp.node_limit = spec_.node_limit;
    config.milp.time_limit_seconds = spec_.time_limit_seconds;
    config.providers = Providers(cell.n);
    config.seed = cell.seed;
    if (cell.method == "opal") return RunOpal(dataset_, config, oracle);
    return RunOpalAl(dataset_, ALConfig{config, spec_.beta}, oracle);
  }
  BaselineConfig config;
  config.h_total = cell.h_total.value_or(cell.h);
  config.overfit_gap = spec_.overfit_gap;
  config.max_iterations = spec_.max_iterations;
  config.seed = cell.seed;
  if (cell.method == "supervised") return RunSupervised(dataset_, BaselineClassifier(), config, oracle);
  if (cell.method == "pseudo") return RunPseudo(dataset_, spec_.train, config, oracle);
  if (cell.method == "threshold") {
    Require(spec_.metric.has_value(), ErrorCode::kConfig, "threshold baseline needs a metric file");
    return RunThresholdBaseline(dataset_, metric_, config, oracle);
  }
  Fail(ErrorCode::kConfig, "unknown method '" + cell.method + "'");
}

bool IsOpalMethod(const std::string& method) { return method == "opal" || method == "opal-al"; }

std::vector<GridCell> GridCells(const GridSpec& spec, const std::string& method) {
  Require(IsOpalMethod(method) || method == "supervised" || method == "pseudo" || method == "threshold",
          ErrorCode::kConfig, "unknown method '" + method + "'");
  std::vector<GridCell> cells;
  auto add_reps = [&](GridCell base) {
    for (int r = 0; r < spec.repetitions; ++r) {
      base.seed = spec.base_seed + static_cast<uint64_t>(r);
      cells.push_back(base);
    }
  };
  if (IsOpalMethod(method) || spec.effort_matched) {
    for (int n : spec.classifier_counts) {
      for (double h : spec.h_initial_values) {
        for (double alpha : spec.alpha_values) add_reps({method, n, h, alpha, 0, std::nullopt});
      }
    }
  } else {
    for (double h : spec.h_initial_values) add_reps({method, 1, h, std::nullopt, 0, std::nullopt});
  }
  return cells;
}

std::string ReportFileName(const GridCell& cell) {
  std::string name = cell.method + "_n" + std::to_string(cell.n) + "_h" + csv::FormatDouble(cell.h);
  if (cell.alpha) name += "_a" + csv::FormatDouble(*cell.alpha);
  name += "_s" + std::to_string(cell.seed) + ".json";
  return name;
}

namespace {

GridRow Execute(const GridContext& context, const GridCell& cell) {
  GridRow row;
  row.cell = cell;
  const auto start = std::chrono::steady_clock::now();
  try {
    const RunReport report = context.RunCell(cell);
    row.accuracy = report.accuracy;
    row.manual_effort = report.manual_effort;
    auto milp = report.timings.find("milp");
    row.milp_seconds = milp == report.timings.end() ? 0.0 : milp->second;
    row.milp_status = report.milp_status.empty() ? "none" : report.milp_status;
    row.gap = report.milp_gap;
    if (context.spec().report_dir) {
      csv::WriteText(*context.spec().report_dir / ReportFileName(cell),
                     io::DumpJson(io::ReportToJson(report, {context.spec().report_timings})));
    }
  } catch (const std::exception& e) {
    row.milp_status = "error";
    row.error = e.what();
  }
  row.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<GridRow> ExecuteAll(const GridContext& context, const std::vector<GridCell>& cells) {
  std::vector<GridRow> rows(cells.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < cells.size(); k = next++) rows[k] = Execute(context, cells[k]);
  };
  const int count = std::max(1, std::min<int>(context.spec().workers, static_cast<int>(cells.size())));
  std::vector<std::thread> threads;
  for (int t = 1; t < count; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (const GridRow& row : rows) {
    if (!row.error.empty()) {
      std::cerr << "grid cell " << ReportFileName(row.cell) << " failed: " << row.error << "\n";
    }
  }
  return rows;
}

}  // namespace

std::vector<GridRow> RunGrid(const GridSpec& spec, const std::string& method) {
  const GridContext context(spec);
  std::vector<GridCell> cells = GridCells(spec, method);
  if (IsOpalMethod(method) || !spec.effort_matched) return ExecuteAll(context, cells);

  // Budget matching: OPAL first, then each baseline cell at the mean OPAL
  // effort of its (n, hInitial, alpha) group.
  std::vector<GridCell> opal_cells = GridCells(spec, "opal");
  std::vector<GridRow> rows = ExecuteAll(context, opal_cells);
  std::map<std::tuple<int, double, double>, std::pair<double, int>> effort;
  for (const GridRow& row : rows) {
    if (!row.error.empty()) continue;
    auto& [sum, count] = effort[{row.cell.n, row.cell.h, *row.cell.alpha}];
    sum += row.manual_effort;
    ++count;
  }
  for (GridCell& cell : cells) {
    auto it = effort.find({cell.n, cell.h, *cell.alpha});
    if (it != effort.end()) cell.h_total = it->second.first / it->second.second;
  }
  std::vector<GridRow> baseline = ExecuteAll(context, cells);
  rows.insert(rows.end(), baseline.begin(), baseline.end());
  return rows;
}

std::string FormatGridCsv(const std::vector<GridRow>& rows) {
  std::ostringstream out;
  csv::WriteRow(out, {"method", "n", "hInitial", "alpha", "seed", "accuracy", "manual_effort",
                      "milp_seconds", "total_seconds", "milp_status", "gap"});
  auto fixed = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  for (const GridRow& row : rows) {
    const bool ok = row.error.empty();
    csv::WriteRow(out, {row.cell.method, std::to_string(row.cell.n), csv::FormatDouble(row.cell.h),
                        row.cell.alpha ? csv::FormatDouble(*row.cell.alpha) : "",
                        std::to_string(row.cell.seed),
                        ok && row.accuracy ? csv::FormatDouble(*row.accuracy) : "",
                        ok ? csv::FormatDouble(row.manual_effort) : "", fixed(row.milp_seconds),
                        fixed(row.total_seconds), row.milp_status,
                        ok ? csv::FormatDouble(row.gap) : ""});
  }
  return out.str();
}

}  // namespace labelopt
