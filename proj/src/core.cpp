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

#include "labelopt/core.hpp"

#include <cmath>

#include "labelopt/error.hpp"

namespace labelopt {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kIncompletePrediction: return "incomplete_prediction";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kConfig: return "config_error";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kFailedPrecondition: return "failed_precondition";
    case ErrorCode::kOracle: return "oracle_error";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

LabelAlphabet::LabelAlphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  Require(labels_.size() >= 2, ErrorCode::kInvalidArgument, "alphabet needs at least two labels");
  for (size_t i = 0; i < labels_.size(); ++i) {
    Require(!labels_[i].empty(), ErrorCode::kInvalidArgument, "empty label token");
    const bool inserted = index_.emplace(labels_[i], static_cast<LabelId>(i)).second;
    Require(inserted, ErrorCode::kInvalidArgument, "duplicate label '" + labels_[i] + "'");
  }
}

std::optional<LabelId> LabelAlphabet::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

LabelId LabelAlphabet::Index(std::string_view token) const {
  auto found = Find(token);
  Require(found.has_value(), ErrorCode::kInvalidArgument,
          "label '" + std::string(token) + "' is not in the alphabet");
  return *found;
}

Dataset::Dataset(std::vector<Element> elements, LabelAlphabet alphabet)
    : elements_(std::move(elements)), alphabet_(std::move(alphabet)) {
  Require(!elements_.empty(), ErrorCode::kInvalidArgument, "dataset is empty");
  Require(alphabet_.size() >= 2, ErrorCode::kInvalidArgument, "dataset alphabet needs K >= 2");
  int dim = -1;
  bool all_features = true;
  for (size_t i = 0; i < elements_.size(); ++i) {
    const Element& e = elements_[i];
    Require(!e.id.empty(), ErrorCode::kInvalidArgument, "element with empty id");
    Require(index_.emplace(e.id, i).second, ErrorCode::kInvalidArgument,
            "duplicate element id '" + e.id + "'");
    if (e.truth) {
      Require(alphabet_.Contains(*e.truth), ErrorCode::kInvalidArgument,
              "truth of '" + e.id + "' is outside the alphabet");
    }
    if (e.features) {
      const int d = static_cast<int>(e.features->size());
      Require(dim < 0 || d == dim, ErrorCode::kDimensionMismatch,
              "element '" + e.id + "' has feature dimension " + std::to_string(d));
      dim = d;
      for (double v : *e.features) {
        Require(std::isfinite(v), ErrorCode::kInvalidArgument,
                "non-finite feature for '" + e.id + "'");
      }
    } else {
      all_features = false;
    }
  }
  feature_dim_ = all_features && dim > 0 ? dim : 0;
}

std::optional<size_t> Dataset::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

size_t Dataset::IndexOf(std::string_view id) const {
  auto found = Find(id);
  Require(found.has_value(), ErrorCode::kNotFound, "unknown element '" + std::string(id) + "'");
  return *found;
}

bool Dataset::has_truth() const {
  for (const Element& e : elements_) {
    if (!e.truth) return false;
  }
  return true;
}

PredictionSet::PredictionSet(std::vector<std::string> classifier_ids)
    : classifier_ids_(std::move(classifier_ids)) {}

size_t PredictionSet::RowFor(std::string_view element_id) {
  auto it = row_.find(std::string(element_id));
  if (it != row_.end()) return it->second;
  const size_t row = element_ids_.size();
  element_ids_.emplace_back(element_id);
  row_.emplace(std::string(element_id), row);
  cells_.emplace_back(classifier_ids_.size());
  return row;
}

void PredictionSet::Set(int classifier, std::string_view element_id, Prediction prediction) {
  Require(classifier >= 0 && classifier < num_classifiers(), ErrorCode::kInvalidArgument,
          "classifier index out of range");
  Require(prediction.label >= 0, ErrorCode::kInvalidArgument, "prediction without a label");
  Require(prediction.confidence > 0.0 && prediction.confidence <= 1.0, ErrorCode::kInvalidArgument,
          "confidence for '" + std::string(element_id) + "' must lie in (0,1]");
  Prediction& cell = cells_[RowFor(element_id)][classifier];
  Require(cell.label < 0, ErrorCode::kInvalidArgument,
          "duplicate prediction for '" + std::string(element_id) + "' by classifier '" +
              classifier_ids_[classifier] + "'");
  cell = prediction;
}

bool PredictionSet::Has(int classifier, std::string_view element_id) const {
  auto it = row_.find(std::string(element_id));
  return it != row_.end() && classifier >= 0 && classifier < num_classifiers() &&
         cells_[it->second][classifier].label >= 0;
}

Prediction PredictionSet::Get(int classifier, std::string_view element_id) const {
  Require(Has(classifier, element_id), ErrorCode::kIncompletePrediction,
          "missing prediction for '" + std::string(element_id) + "' by classifier " +
              (classifier >= 0 && classifier < num_classifiers() ? "'" + classifier_ids_[classifier] + "'"
                                                                 : std::to_string(classifier)));
  return cells_[row_.at(std::string(element_id))][classifier];
}

ElementPredictions PredictionSet::ForElement(std::string_view element_id) const {
  ElementPredictions out;
  out.labels.reserve(num_classifiers());
  out.confidences.reserve(num_classifiers());
  for (int j = 0; j < num_classifiers(); ++j) {
    const Prediction p = Get(j, element_id);
    out.labels.push_back(p.label);
    out.confidences.push_back(p.confidence);
  }
  return out;
}

void PredictionSet::RequireComplete(std::span<const std::string> element_ids) const {
  Require(num_classifiers() >= 1, ErrorCode::kIncompletePrediction, "no classifiers");
  for (const std::string& id : element_ids) {
    for (int j = 0; j < num_classifiers(); ++j) Get(j, id);
  }
}

void PredictionSet::Append(const PredictionSet& other) {
  const int offset = num_classifiers();
  for (const auto& cid : other.classifier_ids_) {
    for (const auto& mine : classifier_ids_) {
      Require(mine != cid, ErrorCode::kInvalidArgument, "classifier '" + cid + "' appears twice");
    }
    classifier_ids_.push_back(cid);
  }
  for (auto& row : cells_) row.resize(classifier_ids_.size());
  for (size_t r = 0; r < other.element_ids_.size(); ++r) {
    const size_t mine = RowFor(other.element_ids_[r]);
    for (int j = 0; j < other.num_classifiers(); ++j) {
      cells_[mine][offset + j] = other.cells_[r][j];
    }
  }
}

bool ComputeZ(const ElementPredictions& predictions) {
  const auto& labels = predictions.labels;
  for (size_t j = 1; j < labels.size(); ++j) {
    if (labels[j] != labels[0]) return false;
  }
  return !labels.empty();
}

bool ComputeZ(const PredictionSet& predictions, std::string_view element_id) {
  return ComputeZ(predictions.ForElement(element_id));
}

bool ComputeB(const ElementPredictions& predictions, LabelId truth) {
  return ComputeZ(predictions) && predictions.labels[0] == truth;
}

bool ComputeB(const PredictionSet& predictions, std::string_view element_id, LabelId truth) {
  return ComputeB(predictions.ForElement(element_id), truth);
}

LabelDecision Decide(std::span<const double> weights, const ElementPredictions& predictions) {
  Require(weights.size() == predictions.labels.size() &&
              weights.size() == predictions.confidences.size(),
          ErrorCode::kDimensionMismatch,
          "got " + std::to_string(weights.size()) + " weights for " +
              std::to_string(predictions.labels.size()) + " classifiers");
  if (!ComputeZ(predictions)) return LabelDecision::Manual();
  double sum = 0.0;
  for (size_t j = 0; j < weights.size(); ++j) sum += weights[j] * predictions.confidences[j];
  if (sum > 1.0) return LabelDecision::Auto(predictions.labels[0]);
  return LabelDecision::Manual();
}

std::string_view LabelSourceName(LabelSource source) {
  switch (source) {
    case LabelSource::kManualInitial: return "manual-initial";
    case LabelSource::kManualResidual: return "manual-residual";
    case LabelSource::kAuto: return "auto";
  }
  return "unknown";
}

LabelSource ParseLabelSource(std::string_view name) {
  if (name == "manual-initial") return LabelSource::kManualInitial;
  if (name == "manual-residual") return LabelSource::kManualResidual;
  if (name == "auto") return LabelSource::kAuto;
  Fail(ErrorCode::kParse, "unknown label source '" + std::string(name) + "'");
}

size_t RunReport::CountSource(LabelSource source) const {
  size_t count = 0;
  for (const Assignment& a : assignments) count += a.source == source ? 1 : 0;
  return count;
}

}  // namespace labelopt
