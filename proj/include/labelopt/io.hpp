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

#ifndef LABELOPT_IO_HPP_
#define LABELOPT_IO_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "labelopt/core.hpp"
#include "labelopt/milp.hpp"

namespace labelopt::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Truth tokens in `id,truth,payload_uri` (truth may be empty).
std::vector<std::string> CollectTruthLabels(const fs::path& dataset_path);
std::vector<std::string> CollectPredictionLabels(std::span<const fs::path> prediction_paths);

// Sorted, de-duplicated union of the given tokens.
LabelAlphabet InferAlphabet(std::vector<std::string> tokens);

// Loads `id,truth,payload_uri` and optionally `id,f1..fd`. The feature file
// must cover exactly the dataset ids.
Dataset LoadDataset(const fs::path& dataset_path, const std::optional<fs::path>& features_path,
                    const LabelAlphabet& alphabet, bool read_truth = true);

// Same dataset with every truth label removed.
Dataset StripTruth(const Dataset& dataset);

// Rows `element_id,classifier_id,label,confidence`; classifiers are numbered
// in order of first appearance across the files.
PredictionSet LoadPredictions(std::span<const fs::path> paths, const LabelAlphabet& alphabet);
std::string FormatPredictions(const PredictionSet& predictions, const LabelAlphabet& alphabet);

std::string FormatDataset(const Dataset& dataset);
std::string FormatFeatures(const Dataset& dataset);

// `id,<label column>`; the label column may be called label or truth.
std::unordered_map<std::string, LabelId> LoadLabels(const fs::path& path,
                                                    const LabelAlphabet& alphabet);

// `id,<column>` with real values.
std::unordered_map<std::string, double> LoadScalarColumn(const fs::path& path,
                                                         const std::string& column);

// `z,b,theta1..thetan`.
OptimizationInstance LoadInstance(const fs::path& path);
OptimizationInstance ParseInstance(std::string_view text, std::string_view source);
std::string FormatInstance(const OptimizationInstance& instance);

Json SolutionToJson(const MilpSolution& solution);
MilpSolution SolutionFromJson(const Json& json);

Json IterationToJson(const IterationRecord& record);
IterationRecord IterationFromJson(const Json& json);

struct ReportFormat {
  bool include_timings = true;
};

Json ReportToJson(const RunReport& report, ReportFormat format = {});
RunReport ReportFromJson(const Json& json);
std::string DumpJson(const Json& json);

}  // namespace labelopt::io

#endif  // LABELOPT_IO_HPP_
