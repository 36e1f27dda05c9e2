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

#include "labelopt/predictors.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "labelopt/error.hpp"
#include "labelopt/rng.hpp"

namespace labelopt {

SoftmaxModel::SoftmaxModel(LabelAlphabet alphabet, int feature_dim)
    : alphabet_(std::move(alphabet)), feature_dim_(feature_dim) {
  Require(feature_dim_ >= 1, ErrorCode::kInvalidArgument, "feature dimension must be positive");
  weights_.assign(alphabet_.size() * static_cast<size_t>(feature_dim_), 0.0);
  bias_.assign(alphabet_.size(), 0.0);
}

SoftmaxModel::SoftmaxModel(LabelAlphabet alphabet, int feature_dim, std::vector<double> weights,
                           std::vector<double> bias)
    : alphabet_(std::move(alphabet)),
      feature_dim_(feature_dim),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  Require(feature_dim_ >= 1, ErrorCode::kInvalidArgument, "feature dimension must be positive");
  Require(weights_.size() == alphabet_.size() * static_cast<size_t>(feature_dim_) &&
              bias_.size() == alphabet_.size(),
          ErrorCode::kDimensionMismatch, "softmax parameters do not match K x d");
  for (double v : weights_) Require(std::isfinite(v), ErrorCode::kInvalidArgument, "non-finite weight");
  for (double v : bias_) Require(std::isfinite(v), ErrorCode::kInvalidArgument, "non-finite bias");
}

std::vector<double> SoftmaxModel::Probabilities(std::span<const double> features) const {
  Require(static_cast<int>(features.size()) == feature_dim_, ErrorCode::kDimensionMismatch,
          "feature dimension " + std::to_string(features.size()) + " does not match model dimension " +
              std::to_string(feature_dim_));
  const size_t k_count = alphabet_.size();
  std::vector<double> logits(k_count);
  for (size_t k = 0; k < k_count; ++k) {
    double s = bias_[k];
    const double* w = weights_.data() + k * feature_dim_;
    for (int f = 0; f < feature_dim_; ++f) s += w[f] * features[f];
    logits[k] = s;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& v : logits) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : logits) v /= total;
  return logits;
}

Prediction SoftmaxModel::Predict(std::span<const double> features) const {
  const std::vector<double> p = Probabilities(features);
  size_t best = 0;
  for (size_t k = 1; k < p.size(); ++k) {
    if (p[k] > p[best]) best = k;
  }
  return {static_cast<LabelId>(best), p[best]};
}

std::string SoftmaxModel::ToJson() const {
  nlohmann::ordered_json j;
  j["alphabet"] = alphabet_.labels();
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (size_t k = 0; k < alphabet_.size(); ++k) {
    rows.push_back(std::vector<double>(weights_.begin() + k * feature_dim_,
                                       weights_.begin() + (k + 1) * feature_dim_));
  }
  j["weights"] = std::move(rows);
  j["bias"] = bias_;
  return j.dump(2) + "\n";
}

SoftmaxModel SoftmaxModel::FromJson(std::string_view text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
    LabelAlphabet alphabet(j.at("alphabet").get<std::vector<std::string>>());
    const auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
    Require(rows.size() == alphabet.size(), ErrorCode::kParse, "model: one weight row per label");
    const int d = rows.empty() ? 0 : static_cast<int>(rows[0].size());
    std::vector<double> weights;
    for (const auto& row : rows) {
      Require(static_cast<int>(row.size()) == d, ErrorCode::kParse, "model: ragged weight rows");
      weights.insert(weights.end(), row.begin(), row.end());
    }
    return SoftmaxModel(std::move(alphabet), d, std::move(weights),
                        j.at("bias").get<std::vector<double>>());
  } catch (const nlohmann::ordered_json::exception& e) {
    Fail(ErrorCode::kParse, std::string("model JSON: ") + e.what());
  }
}

void TrainConfig::Validate() const {
  Require(epochs >= 1, ErrorCode::kConfig, "epochs must be at least 1");
  Require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorCode::kConfig,
          "learning rate must be positive");
  Require(l2 >= 0.0 && std::isfinite(l2), ErrorCode::kConfig, "l2 must be non-negative");
}

LossAndGradient SoftmaxLoss(const SoftmaxModel& model, const TrainingSet& data, double l2) {
  const int k_count = model.num_labels();
  const int d = model.feature_dim();
  LossAndGradient out;
  out.grad_weights.assign(model.weights().size(), 0.0);
  out.grad_bias.assign(k_count, 0.0);
  const double inv_n = 1.0 / static_cast<double>(data.features.size());
  double loss = 0.0;
  for (size_t i = 0; i < data.features.size(); ++i) {
    const auto& x = data.features[i];
    std::vector<double> p = model.Probabilities(x);
    const LabelId y = data.labels[i];
    loss -= std::log(std::max(p[y], 1e-300));
    p[y] -= 1.0;
    for (int k = 0; k < k_count; ++k) {
      double* g = out.grad_weights.data() + static_cast<size_t>(k) * d;
      for (int f = 0; f < d; ++f) g[f] += p[k] * x[f];
      out.grad_bias[k] += p[k];
    }
  }
  double norm = 0.0;
  const auto& w = model.weights();
  for (size_t t = 0; t < w.size(); ++t) {
    norm += w[t] * w[t];
    out.grad_weights[t] = out.grad_weights[t] * inv_n + 2.0 * l2 * w[t];
  }
  for (double& g : out.grad_bias) g *= inv_n;
  out.loss = loss * inv_n + l2 * norm;
  return out;
}

SoftmaxModel TrainSoftmax(const TrainingSet& data, const LabelAlphabet& alphabet,
                          const TrainConfig& config, TrainLog* log, const SoftmaxModel* initial) {
  config.Validate();
  Require(!data.features.empty(), ErrorCode::kInvalidArgument, "empty training set");
  Require(data.features.size() == data.labels.size(), ErrorCode::kDimensionMismatch,
          "features and labels differ in length");
  const int d = static_cast<int>(data.features[0].size());
  std::vector<int> counts(alphabet.size(), 0);
  for (size_t i = 0; i < data.features.size(); ++i) {
    Require(static_cast<int>(data.features[i].size()) == d, ErrorCode::kDimensionMismatch,
            "training features have inconsistent dimension");
    for (double v : data.features[i]) {
      Require(std::isfinite(v), ErrorCode::kInvalidArgument, "NaN or infinite training feature");
    }
    Require(alphabet.Contains(data.labels[i]), ErrorCode::kInvalidArgument,
            "training label outside the alphabet");
    ++counts[data.labels[i]];
  }
  for (size_t k = 0; k < counts.size(); ++k) {
    Require(counts[k] > 0, ErrorCode::kInvalidArgument,
            "class '" + alphabet.name(static_cast<LabelId>(k)) + "' is absent from the training labels");
  }

  SoftmaxModel model = initial ? *initial : SoftmaxModel(alphabet, d);
  Require(model.alphabet() == alphabet && model.feature_dim() == d, ErrorCode::kDimensionMismatch,
          "initial model does not match the training data");
  double lr = config.learning_rate;
  LossAndGradient current = SoftmaxLoss(model, data, config.l2);
  TrainLog local;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    local.losses.push_back(current.loss);
    SoftmaxModel next = model;
    for (size_t t = 0; t < next.weights().size(); ++t) {
      next.mutable_weights()[t] -= lr * current.grad_weights[t];
    }
    for (size_t k = 0; k < next.bias().size(); ++k) next.mutable_bias()[k] -= lr * current.grad_bias[k];
    LossAndGradient evaluated = SoftmaxLoss(next, data, config.l2);
    if (evaluated.loss > current.loss + 1e-9) {
      lr *= 0.5;
      ++local.learning_rate_halvings;
      continue;
    }
    model = std::move(next);
    current = std::move(evaluated);
  }
  local.losses.push_back(current.loss);
  local.final_learning_rate = lr;
  if (log) *log = std::move(local);
  return model;
}

double SynthConfig::ProbabilityFor(const std::string& id) const {
  auto it = per_element.find(id);
  return it == per_element.end() ? correct_probability : it->second;
}

void SynthConfig::Validate() const {
  auto check = [&](double p) {
    Require(p >= 0.0 && p <= 1.0, ErrorCode::kConfig, "correct probability outside [0,1]");
    // A calibrated confidence of 0 is not a valid prediction confidence.
    Require(!calibrated || p > 0.0, ErrorCode::kConfig,
            "calibrated synthetic predictions need correct probability > 0");
  };
  check(correct_probability);
  for (const auto& [id, p] : per_element) check(p);
}

PredictionSet SynthPredictions(const Dataset& dataset, int num_classifiers,
                               const SynthConfig& config,
                               const std::vector<std::string>& classifier_ids) {
  config.Validate();
  Require(num_classifiers >= 1, ErrorCode::kInvalidArgument, "need at least one classifier");
  std::vector<std::string> ids = classifier_ids;
  if (ids.empty()) {
    for (int j = 1; j <= num_classifiers; ++j) ids.push_back("c" + std::to_string(j));
  }
  Require(static_cast<int>(ids.size()) == num_classifiers, ErrorCode::kInvalidArgument,
          "classifier id count does not match n");
  const int k_count = static_cast<int>(dataset.alphabet().size());
  PredictionSet set(ids);
  for (int j = 0; j < num_classifiers; ++j) {
    Rng rng(MixSeed(config.seed, static_cast<uint64_t>(j)));
    for (const Element& e : dataset.elements()) {
      Require(e.truth.has_value(), ErrorCode::kInvalidArgument,
              "synthetic predictions need truth for '" + e.id + "'");
      const double p = config.ProbabilityFor(e.id);
      LabelId label = *e.truth;
      if (!(rng.Uniform01() < p)) {
        // Uniform over the K-1 wrong labels.
        const auto r = static_cast<LabelId>(rng.Index(static_cast<size_t>(k_count - 1)));
        label = r < *e.truth ? r : r + 1;
      }
      const double confidence = config.calibrated ? p : 1.0 - 0.5 * rng.Uniform01();
      set.Set(j, e.id, {label, confidence});
    }
  }
  return set;
}

}  // namespace labelopt
