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

#ifndef LABELOPT_PIPELINE_HPP_
#define LABELOPT_PIPELINE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "labelopt/core.hpp"
#include "labelopt/milp.hpp"
#include "labelopt/predictors.hpp"
#include "labelopt/splitter.hpp"

namespace labelopt {

// One classifier c_j: precomputed predictions from a file, a synthetic noisy
// oracle, or a softmax model trained on the fine-tuning subset.
struct ProviderSpec {
  enum class Kind { kFile, kSynthetic, kSoftmax };
  Kind kind = Kind::kFile;
  std::string id;
  std::shared_ptr<const PredictionSet> file;  // kFile: single column
  SynthConfig synth;                          // kSynthetic (seed derived per run)
  TrainConfig train;                          // kSoftmax

  static ProviderSpec File(std::string id, std::shared_ptr<const PredictionSet> predictions);
  static ProviderSpec Synthetic(std::string id, SynthConfig config);
  static ProviderSpec Softmax(std::string id, TrainConfig config);
};

// One provider per classifier column of `predictions`.
std::vector<ProviderSpec> FileProviders(const PredictionSet& predictions);

// Predictions of one provider for every dataset element. `labelled` holds
// the fine-tuning subset (dataset index, label).
PredictionSet ProvidePredictions(const ProviderSpec& spec, const Dataset& dataset,
                                 const std::vector<std::pair<size_t, LabelId>>& labelled,
                                 uint64_t seed, int provider_index);

struct OpalConfig {
  double alpha = 1.0;
  SplitConfig split;  // seed is derived from `seed`
  MilpConfig milp;    // alpha is taken from `alpha`
  std::vector<ProviderSpec> providers;
  uint64_t seed = 0;

  void Validate() const;
};

struct ALConfig {
  OpalConfig base;
  int beta = 50;
};

class Oracle {
 public:
  virtual ~Oracle() = default;
  // Throws kOracle when the id cannot be answered.
  virtual LabelId Answer(const std::string& id) = 0;
};

class GroundTruthOracle : public Oracle {
 public:
  explicit GroundTruthOracle(std::unordered_map<std::string, LabelId> truth)
      : truth_(std::move(truth)) {}
  static GroundTruthOracle FromDataset(const Dataset& dataset);
  LabelId Answer(const std::string& id) override;
  size_t queries() const { return queries_; }

 private:
  std::unordered_map<std::string, LabelId> truth_;
  size_t queries_ = 0;
};

enum class Phase {
  kAwaitingInitialLabels,
  kOptimizing,
  kAwaitingResidualLabels,
  kAwaitingIterationLabels,
  kDone,
};

std::string_view PhaseName(Phase phase);
Phase ParsePhase(std::string_view name);

enum class SubmitOutcome { kAccepted, kUnchanged };

// Step-wise execution of the labelling procedure. The caller answers the
// queue (human or oracle) and calls Advance; without `beta` a single
// optimization is followed by one residual queue, with `beta` the residual
// set is drained in rounds of at most beta elements.
class OpalRun {
 public:
  OpalRun(std::shared_ptr<const Dataset> dataset, OpalConfig config, std::optional<int> beta);

  Phase phase() const { return phase_; }
  int iteration() const { return iteration_; }
  bool active_learning() const { return beta_.has_value(); }
  std::optional<int> beta() const { return beta_; }
  const Dataset& dataset() const { return *dataset_; }
  const OpalConfig& config() const { return config_; }

  // Queued ids still waiting for a label, in queue order.
  std::vector<std::string> Pending() const;
  size_t remaining() const;
  size_t queue_size() const { return queue_.size(); }

  SubmitOutcome Submit(const std::string& id, LabelId label);
  // Atomic: on error the run is left unchanged.
  void Advance();

  size_t manual_count() const;
  std::optional<LabelId> label(size_t index) const;
  std::optional<LabelSource> source(size_t index) const;
  const std::vector<double>& omega() const { return omega_; }
  const std::string& milp_status() const { return milp_status_; }
  double milp_gap() const { return milp_gap_; }
  const std::vector<IterationRecord>& iterations() const { return iterations_; }

  // Final once phase() == kDone; before that it covers the labelled elements.
  RunReport Report() const;

  nlohmann::ordered_json SaveState() const;
  static OpalRun Restore(std::shared_ptr<const Dataset> dataset, OpalConfig config,
                         std::optional<int> beta, const nlohmann::ordered_json& state);

 private:
  struct RestoreTag {};
  OpalRun(RestoreTag, std::shared_ptr<const Dataset> dataset, OpalConfig config,
          std::optional<int> beta);
  void AdvanceInPlace();
  void AfterDecide(std::vector<size_t> residual);
  void Optimize();
  void Enqueue(std::vector<size_t> items, LabelSource source);

  std::shared_ptr<const Dataset> dataset_;
  OpalConfig config_;
  std::optional<int> beta_;

  Phase phase_ = Phase::kAwaitingInitialLabels;
  int iteration_ = 0;
  std::vector<size_t> d_t_, d_o_, d_prime_;
  std::vector<size_t> queue_;
  LabelSource queue_source_ = LabelSource::kManualInitial;
  std::vector<LabelId> labels_;       // -1 when unlabelled
  std::vector<uint8_t> sources_;      // LabelSource + 1, 0 when unlabelled
  std::vector<uint8_t> queued_;       // ever sent to a human
  std::vector<double> omega_;
  std::string milp_status_;
  double milp_gap_ = 0.0;
  std::vector<size_t> optimization_rows_;
  std::vector<uint8_t> optimization_x_;
  std::vector<IterationRecord> iterations_;
  std::map<std::string, double> timings_;
  std::map<std::string, double> details_;
};

RunReport RunOpal(std::shared_ptr<const Dataset> dataset, const OpalConfig& config, Oracle& oracle);
RunReport RunOpalAl(std::shared_ptr<const Dataset> dataset, const ALConfig& config, Oracle& oracle);

struct BaselineConfig {
  double h_total = 0.15;
  std::optional<int64_t> v;  // validation size; default 15% of the manual labels
  double overfit_gap = 0.05;
  int max_iterations = 10;
  std::optional<double> time_limit_seconds;
  std::optional<double> dbscan_eps;
  int dbscan_min_pts = 4;
  uint64_t seed = 0;

  void Validate() const;
};

// Supervised baseline: label hTotal, train, predict the rest.
RunReport RunSupervised(std::shared_ptr<const Dataset> dataset, const ProviderSpec& classifier,
                        const BaselineConfig& config, Oracle& oracle);
// Pseudo-labelling baseline with a softmax classifier.
RunReport RunPseudo(std::shared_ptr<const Dataset> dataset, const TrainConfig& train,
                    const BaselineConfig& config, Oracle& oracle);

struct ThresholdRule {
  double threshold = 0.0;  // may be +-infinity
  bool above_is_second = true;  // metric > threshold -> alphabet[1]
  double training_accuracy = 0.0;

  LabelId Apply(double metric) const {
    return (metric > threshold) == above_is_second ? 1 : 0;
  }
};

// Exhaustive scan: thresholds -inf, midpoints of consecutive distinct values,
// +inf; for each, both polarities. First best in that order wins.
ThresholdRule FitThreshold(const std::vector<double>& metric, const std::vector<LabelId>& labels);

RunReport RunThresholdBaseline(std::shared_ptr<const Dataset> dataset,
                               const std::unordered_map<std::string, double>& metric,
                               const BaselineConfig& config, Oracle& oracle);

}  // namespace labelopt

#endif  // LABELOPT_PIPELINE_HPP_
