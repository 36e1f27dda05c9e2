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

#ifndef LABELOPT_PREDICTORS_HPP_
#define LABELOPT_PREDICTORS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "labelopt/core.hpp"

namespace labelopt {

// Multinomial logistic regression: p = softmax(W x + b).
class SoftmaxModel {
 public:
  SoftmaxModel() = default;
  SoftmaxModel(LabelAlphabet alphabet, int feature_dim);
  SoftmaxModel(LabelAlphabet alphabet, int feature_dim, std::vector<double> weights,
               std::vector<double> bias);

  const LabelAlphabet& alphabet() const { return alphabet_; }
  int num_labels() const { return static_cast<int>(alphabet_.size()); }
  int feature_dim() const { return feature_dim_; }
  // Row-major K x d.
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& mutable_weights() { return weights_; }
  const std::vector<double>& bias() const { return bias_; }
  std::vector<double>& mutable_bias() { return bias_; }

  std::vector<double> Probabilities(std::span<const double> features) const;
  // Argmax label (lowest alphabet index on ties) and its probability.
  Prediction Predict(std::span<const double> features) const;

  std::string ToJson() const;
  static SoftmaxModel FromJson(std::string_view text);

 private:
  LabelAlphabet alphabet_;
  int feature_dim_ = 0;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

struct TrainConfig {
  int epochs = 20;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  uint64_t seed = 0;  // initialization is all zeros; kept for reproducible records

  void Validate() const;
};

struct TrainingSet {
  std::vector<std::vector<double>> features;
  std::vector<LabelId> labels;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> grad_weights;  // K x d
  std::vector<double> grad_bias;     // K
};

// Mean cross-entropy plus l2 * ||W||^2 (bias not penalized).
LossAndGradient SoftmaxLoss(const SoftmaxModel& model, const TrainingSet& data, double l2);

struct TrainLog {
  std::vector<double> losses;  // loss before each epoch, then the final loss
  int learning_rate_halvings = 0;
  double final_learning_rate = 0.0;
};

// Full-batch gradient descent from `initial` (zeros when absent). A step that
// increases the loss is undone and the learning rate halved.
SoftmaxModel TrainSoftmax(const TrainingSet& data, const LabelAlphabet& alphabet,
                          const TrainConfig& config, TrainLog* log = nullptr,
                          const SoftmaxModel* initial = nullptr);

struct SynthConfig {
  double correct_probability = 1.0;
  // Per-element override of correct_probability.
  std::unordered_map<std::string, double> per_element;
  bool calibrated = true;
  uint64_t seed = 0;

  double ProbabilityFor(const std::string& id) const;
  void Validate() const;
};

// Noisy oracle: each classifier emits the truth with probability p, otherwise
// a uniformly random wrong label. Classifier j draws from its own stream.
PredictionSet SynthPredictions(const Dataset& dataset, int num_classifiers,
                               const SynthConfig& config,
                               const std::vector<std::string>& classifier_ids = {});

}  // namespace labelopt

#endif  // LABELOPT_PREDICTORS_HPP_
