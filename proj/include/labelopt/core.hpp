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

#ifndef LABELOPT_CORE_HPP_
#define LABELOPT_CORE_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace labelopt {

using LabelId = int32_t;

// Ordered set of K >= 2 distinct label tokens. Order matters: it breaks
// argmax ties and maps digit keys in the labelling console.
class LabelAlphabet {
 public:
  LabelAlphabet() = default;
  explicit LabelAlphabet(std::vector<std::string> labels);

  size_t size() const { return labels_.size(); }
  const std::string& name(LabelId id) const { return labels_.at(id); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<LabelId> Find(std::string_view token) const;
  // Throws kInvalidArgument for tokens outside the alphabet.
  LabelId Index(std::string_view token) const;
  bool Contains(LabelId id) const { return id >= 0 && static_cast<size_t>(id) < labels_.size(); }

  bool operator==(const LabelAlphabet& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, LabelId> index_;
};

struct Element {
  std::string id;
  std::optional<std::vector<double>> features;
  std::optional<std::string> payload_uri;
  std::optional<LabelId> truth;  // known in simulation, or once a human answered
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Element> elements, LabelAlphabet alphabet);

  size_t size() const { return elements_.size(); }
  const Element& element(size_t index) const { return elements_[index]; }
  const std::vector<Element>& elements() const { return elements_; }
  const LabelAlphabet& alphabet() const { return alphabet_; }
  std::optional<size_t> Find(std::string_view id) const;
  size_t IndexOf(std::string_view id) const;  // throws kNotFound

  bool has_features() const { return feature_dim_ > 0; }
  int feature_dim() const { return feature_dim_; }
  bool has_truth() const;

 private:
  std::vector<Element> elements_;
  LabelAlphabet alphabet_;
  std::unordered_map<std::string, size_t> index_;
  int feature_dim_ = 0;  // 0 unless every element carries features
};

struct Prediction {
  LabelId label = -1;
  double confidence = 0.0;
};

// What all n classifiers said about one element.
struct ElementPredictions {
  std::vector<LabelId> labels;
  std::vector<double> confidences;
};

// Complete matrix (classifier x element id) of predictions.
class PredictionSet {
 public:
  PredictionSet() = default;
  explicit PredictionSet(std::vector<std::string> classifier_ids);

  int num_classifiers() const { return static_cast<int>(classifier_ids_.size()); }
  const std::vector<std::string>& classifier_ids() const { return classifier_ids_; }
  const std::vector<std::string>& element_ids() const { return element_ids_; }

  // Throws kInvalidArgument on a duplicate pair or a confidence outside (0,1].
  void Set(int classifier, std::string_view element_id, Prediction prediction);
  bool Has(int classifier, std::string_view element_id) const;
  // Throws kIncompletePrediction when the pair is missing.
  Prediction Get(int classifier, std::string_view element_id) const;
  ElementPredictions ForElement(std::string_view element_id) const;
  // Throws kIncompletePrediction naming the first missing (classifier, id).
  void RequireComplete(std::span<const std::string> element_ids) const;

  // Columns of `other` appended after ours (same element ids not required).
  void Append(const PredictionSet& other);

 private:
  size_t RowFor(std::string_view element_id);
  std::vector<std::string> classifier_ids_;
  std::vector<std::string> element_ids_;
  std::unordered_map<std::string, size_t> row_;
  std::vector<std::vector<Prediction>> cells_;  // [row][classifier]
};

struct LabelDecision {
  enum class Kind { kAuto, kManual };
  Kind kind = Kind::kManual;
  LabelId label = -1;

  static LabelDecision Auto(LabelId label) { return {Kind::kAuto, label}; }
  static LabelDecision Manual() { return {}; }
  bool is_auto() const { return kind == Kind::kAuto; }
  bool operator==(const LabelDecision&) const = default;
};

// 1 iff every classifier predicted the same label.
bool ComputeZ(const PredictionSet& predictions, std::string_view element_id);
bool ComputeZ(const ElementPredictions& predictions);
// 1 iff the classifiers agree and the shared label is `truth`.
bool ComputeB(const PredictionSet& predictions, std::string_view element_id, LabelId truth);
bool ComputeB(const ElementPredictions& predictions, LabelId truth);

// Auto(shared label) iff the labels agree and sum_j w_j * theta_j > 1.
LabelDecision Decide(std::span<const double> weights, const ElementPredictions& predictions);

enum class LabelSource { kManualInitial, kManualResidual, kAuto };

std::string_view LabelSourceName(LabelSource source);
LabelSource ParseLabelSource(std::string_view name);

struct Assignment {
  std::string id;
  std::string label;
  LabelSource source = LabelSource::kManualInitial;
};

struct IterationRecord {
  int iteration = 0;
  std::vector<double> omega;
  std::string milp_status;
  double milp_gap = 0.0;
  int64_t optimization_rows = 0;
  int64_t auto_labelled = 0;
  int64_t residual = 0;
  int64_t queried = 0;
  // Over the elements decided in this iteration.
  int64_t condition1 = 0;
  int64_t condition2 = 0;
  int64_t both_conditions = 0;
};

struct RunReport {
  std::string method;
  std::vector<Assignment> assignments;  // dataset order
  std::vector<std::string> residual_manual_ids;
  std::optional<double> accuracy;
  double manual_effort = 0.0;
  std::map<std::string, double> timings;
  std::string milp_status;
  double milp_gap = 0.0;
  std::vector<double> omega;
  uint64_t seed = 0;
  // Diagnostics of the (last) optimization step.
  std::vector<std::string> optimization_ids;
  std::vector<uint8_t> optimization_x;
  std::vector<IterationRecord> iterations;
  std::map<std::string, double> details;

  size_t CountSource(LabelSource source) const;
};

}  // namespace labelopt

#endif  // LABELOPT_CORE_HPP_
