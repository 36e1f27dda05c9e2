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

#ifndef LABELOPT_EVALHARNESS_HPP_
#define LABELOPT_EVALHARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "labelopt/core.hpp"
#include "labelopt/pipeline.hpp"

namespace labelopt {

// Fraction of elements whose final label equals `truth` (id -> label token).
double Accuracy(const RunReport& report, const std::unordered_map<std::string, std::string>& truth);
double ManualEffort(const RunReport& report);
std::unordered_map<std::string, std::string> TruthTokens(const Dataset& dataset);

struct SynthDatasetSpec {
  int64_t size = 1000;
  int class_count = 2;
  int feature_dim = 2;
  int cluster_count = 2;
  double p_min = 0.6;
  double p_max = 1.0;
  double separation = 8.0;  // distance of cluster means from the origin
  uint64_t seed = 0;

  void Validate() const;
  static SynthDatasetSpec FromJson(std::string_view text);
};

struct SynthData {
  std::shared_ptr<const Dataset> dataset;
  std::unordered_map<std::string, double> correctness;
};

// Gaussian clusters (unit variance) around means on the axes; cluster c
// carries class c mod K; per-element correctness probability uniform in
// [p_min, p_max).
SynthData GenerateSynth(const SynthDatasetSpec& spec);

struct SynthFiles {
  std::filesystem::path dataset, features, correctness;
};

// Writes dataset.csv, features.csv and correctness.csv (id,p) into `dir`.
SynthFiles WriteSynth(const SynthData& data, const std::filesystem::path& dir);

struct GridSpec {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> features;
  std::optional<std::filesystem::path> correctness;  // id,p for synthetic providers
  std::vector<std::filesystem::path> predictions;    // file providers
  std::optional<std::filesystem::path> metric;       // threshold baseline
  std::string metric_column = "metric";
  std::optional<std::vector<std::string>> alphabet;

  std::string providers = "synthetic";  // synthetic | files | softmax
  double synthetic_p = 0.8;             // when no correctness file
  bool calibrated = true;
  std::string baseline_classifier = "softmax";  // softmax | synthetic | files

  std::vector<double> h_initial_values{0.01, 0.05, 0.15, 0.25, 0.35, 0.45};
  std::vector<int> classifier_counts{1, 2, 3};
  std::vector<double> alpha_values{1.0};
  int repetitions = 5;
  uint64_t base_seed = 0;
  int workers = 1;
  int beta = 50;
  bool effort_matched = false;
  int64_t s_max = 1000;
  std::optional<int64_t> node_limit;
  std::optional<double> time_limit_seconds;
  TrainConfig train;
  double overfit_gap = 0.05;
  int max_iterations = 10;
  std::optional<std::filesystem::path> report_dir;
  bool report_timings = false;

  void Validate() const;
  // Relative paths resolve against `base_dir`.
  static GridSpec FromJson(std::string_view text, const std::filesystem::path& base_dir);
};

struct GridCell {
  std::string method;
  int n = 1;
  double h = 0.0;
  std::optional<double> alpha;
  uint64_t seed = 0;
  std::optional<double> h_total;  // effort-matched budget for baselines
};

struct GridRow {
  GridCell cell;
  std::optional<double> accuracy;
  double manual_effort = 0.0;
  double milp_seconds = 0.0;
  double total_seconds = 0.0;
  std::string milp_status;
  double gap = 0.0;
  std::string error;
};

// Loaded inputs shared (read-only) by all cells of a grid.
class GridContext {
 public:
  explicit GridContext(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  std::shared_ptr<const Dataset> dataset() const { return dataset_; }
  RunReport RunCell(const GridCell& cell) const;

 private:
  std::vector<ProviderSpec> Providers(int n) const;
  ProviderSpec BaselineClassifier() const;

  GridSpec spec_;
  std::shared_ptr<const Dataset> dataset_;
  std::unordered_map<std::string, double> correctness_;
  std::vector<ProviderSpec> file_providers_;
  std::unordered_map<std::string, double> metric_;
};

bool IsOpalMethod(const std::string& method);

// Cells in output order for `method`.
std::vector<GridCell> GridCells(const GridSpec& spec, const std::string& method);

// Rows in deterministic cell order; failures become rows with status
// "error".
std::vector<GridRow> RunGrid(const GridSpec& spec, const std::string& method);

std::string FormatGridCsv(const std::vector<GridRow>& rows);
std::string ReportFileName(const GridCell& cell);

}  // namespace labelopt

#endif  // LABELOPT_EVALHARNESS_HPP_
