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

#include "labelopt/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "labelopt/error.hpp"
#include "labelopt/io.hpp"
#include "labelopt/rng.hpp"

namespace labelopt {

namespace {

using Clock = std::chrono::steady_clock;
using Json = nlohmann::ordered_json;

// Sub-stream tags for MixSeed.
constexpr uint64_t kSplitStream = 11;
constexpr uint64_t kBaselineSampleStream = 21;
constexpr uint64_t kValidationStream = 22;
constexpr uint64_t kProviderStream = 100;
constexpr uint64_t kDrawStream = 1000;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

size_t RoundHalfUp(double value) { return static_cast<size_t>(std::floor(value + 0.5 + 1e-9)); }

TrainingSet Gather(const Dataset& dataset, const std::vector<std::pair<size_t, LabelId>>& items) {
  TrainingSet set;
  set.features.reserve(items.size());
  set.labels.reserve(items.size());
  for (const auto& [index, label] : items) {
    const Element& e = dataset.element(index);
    Require(e.features.has_value(), ErrorCode::kFailedPrecondition,
            "softmax classifier needs features for '" + e.id + "'");
    set.features.push_back(*e.features);
    set.labels.push_back(label);
  }
  return set;
}

}  // namespace

ProviderSpec ProviderSpec::File(std::string id, std::shared_ptr<const PredictionSet> predictions) {
  Require(predictions && predictions->num_classifiers() == 1, ErrorCode::kInvalidArgument,
          "file provider needs exactly one classifier column");
  ProviderSpec spec;
  spec.kind = Kind::kFile;
  spec.id = std::move(id);
  spec.file = std::move(predictions);
  return spec;
}

ProviderSpec ProviderSpec::Synthetic(std::string id, SynthConfig config) {
  ProviderSpec spec;
  spec.kind = Kind::kSynthetic;
  spec.id = std::move(id);
  spec.synth = std::move(config);
  return spec;
}

ProviderSpec ProviderSpec::Softmax(std::string id, TrainConfig config) {
  ProviderSpec spec;
  spec.kind = Kind::kSoftmax;
  spec.id = std::move(id);
  spec.train = config;
  return spec;
}

std::vector<ProviderSpec> FileProviders(const PredictionSet& predictions) {
  std::vector<ProviderSpec> out;
  for (int j = 0; j < predictions.num_classifiers(); ++j) {
    auto column = std::make_shared<PredictionSet>(
        std::vector<std::string>{predictions.classifier_ids()[j]});
    for (const std::string& id : predictions.element_ids()) {
      if (predictions.Has(j, id)) column->Set(0, id, predictions.Get(j, id));
    }
    out.push_back(ProviderSpec::File(predictions.classifier_ids()[j], std::move(column)));
  }
  return out;
}

PredictionSet ProvidePredictions(const ProviderSpec& spec, const Dataset& dataset,
                                 const std::vector<std::pair<size_t, LabelId>>& labelled,
                                 uint64_t seed, int provider_index) {
  switch (spec.kind) {
    case ProviderSpec::Kind::kFile: {
      Require(spec.file != nullptr, ErrorCode::kInvalidArgument, "file provider without predictions");
      PredictionSet out(std::vector<std::string>{spec.id});
      for (const Element& e : dataset.elements()) {
        if (spec.file->Has(0, e.id)) {
          const Prediction p = spec.file->Get(0, e.id);
          Require(dataset.alphabet().Contains(p.label), ErrorCode::kInvalidArgument,
                  "prediction label outside the alphabet");
          out.Set(0, e.id, p);
        }
      }
      return out;
    }
    case ProviderSpec::Kind::kSynthetic: {
      SynthConfig config = spec.synth;
      config.seed = MixSeed(seed, kProviderStream + static_cast<uint64_t>(provider_index));
      return SynthPredictions(dataset, 1, config, {spec.id});
    }
    case ProviderSpec::Kind::kSoftmax: {
      Require(dataset.has_features(), ErrorCode::kFailedPrecondition,
              "softmax classifier '" + spec.id + "' needs a feature file");
      const SoftmaxModel model = TrainSoftmax(Gather(dataset, labelled), dataset.alphabet(), spec.train);
      PredictionSet out(std::vector<std::string>{spec.id});
      for (const Element& e : dataset.elements()) out.Set(0, e.id, model.Predict(*e.features));
      return out;
    }
  }
  Fail(ErrorCode::kInvalidArgument, "unknown provider kind");
}

void OpalConfig::Validate() const {
  Require(alpha > 0.0 && alpha <= 1.0, ErrorCode::kConfig, "alpha must lie in (0,1]");
  Require(!providers.empty(), ErrorCode::kConfig, "at least one classifier is required");
  split.Validate();
  for (size_t j = 0; j < providers.size(); ++j) {
    for (size_t k = 0; k < j; ++k) {
      Require(providers[j].id != providers[k].id, ErrorCode::kConfig,
              "classifier id '" + providers[j].id + "' is used twice");
    }
  }
}

GroundTruthOracle GroundTruthOracle::FromDataset(const Dataset& dataset) {
  std::unordered_map<std::string, LabelId> truth;
  for (const Element& e : dataset.elements()) {
    if (e.truth) truth.emplace(e.id, *e.truth);
  }
  return GroundTruthOracle(std::move(truth));
}

LabelId GroundTruthOracle::Answer(const std::string& id) {
  auto it = truth_.find(id);
  Require(it != truth_.end(), ErrorCode::kOracle, "oracle cannot answer '" + id + "'");
  ++queries_;
  return it->second;
}

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kAwaitingInitialLabels: return "AwaitingInitialLabels";
    case Phase::kOptimizing: return "Optimizing";
    case Phase::kAwaitingResidualLabels: return "AwaitingResidualLabels";
    case Phase::kAwaitingIterationLabels: return "AwaitingIterationLabels";
    case Phase::kDone: return "Done";
  }
  return "Unknown";
}

Phase ParsePhase(std::string_view name) {
  for (Phase p : {Phase::kAwaitingInitialLabels, Phase::kOptimizing, Phase::kAwaitingResidualLabels,
                  Phase::kAwaitingIterationLabels, Phase::kDone}) {
    if (PhaseName(p) == name) return p;
  }
  Fail(ErrorCode::kParse, "unknown phase '" + std::string(name) + "'");
}

OpalRun::OpalRun(RestoreTag, std::shared_ptr<const Dataset> dataset, OpalConfig config,
                 std::optional<int> beta)
    : dataset_(std::move(dataset)), config_(std::move(config)), beta_(beta) {
  Require(dataset_ != nullptr, ErrorCode::kInvalidArgument, "no dataset");
  config_.Validate();
  Require(!beta_ || *beta_ >= 1, ErrorCode::kConfig, "beta must be at least 1");
  config_.split.seed = MixSeed(config_.seed, kSplitStream);
  config_.milp.alpha = config_.alpha;
  labels_.assign(dataset_->size(), -1);
  sources_.assign(dataset_->size(), 0);
  queued_.assign(dataset_->size(), 0);
}

OpalRun::OpalRun(std::shared_ptr<const Dataset> dataset, OpalConfig config, std::optional<int> beta)
    : OpalRun(RestoreTag{}, std::move(dataset), std::move(config), beta) {
  const auto start = Clock::now();
  const Partition partition = Split(*dataset_, config_.split);
  for (const auto& id : partition.d_t) d_t_.push_back(dataset_->IndexOf(id));
  for (const auto& id : partition.d_o) d_o_.push_back(dataset_->IndexOf(id));
  for (const auto& id : partition.d_prime) d_prime_.push_back(dataset_->IndexOf(id));
  std::vector<size_t> initial = d_t_;
  initial.insert(initial.end(), d_o_.begin(), d_o_.end());
  std::sort(initial.begin(), initial.end());
  Enqueue(std::move(initial), LabelSource::kManualInitial);
  timings_["split"] = SecondsSince(start);
  timings_["finetune"] = 0.0;
  timings_["milp"] = 0.0;
  timings_["label"] = 0.0;
  details_["fine_tuning_size"] = static_cast<double>(d_t_.size());
  details_["optimization_size"] = static_cast<double>(d_o_.size());
}

void OpalRun::Enqueue(std::vector<size_t> items, LabelSource source) {
  queue_ = std::move(items);
  queue_source_ = source;
  for (size_t i : queue_) queued_[i] = 1;
}

std::vector<std::string> OpalRun::Pending() const {
  std::vector<std::string> out;
  for (size_t i : queue_) {
    if (labels_[i] < 0) out.push_back(dataset_->element(i).id);
  }
  return out;
}

size_t OpalRun::remaining() const {
  size_t count = 0;
  for (size_t i : queue_) count += labels_[i] < 0 ? 1 : 0;
  return count;
}

SubmitOutcome OpalRun::Submit(const std::string& id, LabelId label) {
  const size_t i = dataset_->IndexOf(id);
  Require(dataset_->alphabet().Contains(label), ErrorCode::kInvalidArgument,
          "label for '" + id + "' is outside the alphabet");
  Require(queued_[i] != 0, ErrorCode::kNotFound, "'" + id + "' is not queued for manual labelling");
  if (labels_[i] >= 0) {
    Require(labels_[i] == label, ErrorCode::kConflict,
            "'" + id + "' was already labelled '" + dataset_->alphabet().name(labels_[i]) + "'");
    return SubmitOutcome::kUnchanged;
  }
  labels_[i] = label;
  sources_[i] = static_cast<uint8_t>(queue_source_) + 1;
  return SubmitOutcome::kAccepted;
}

size_t OpalRun::manual_count() const {
  size_t count = 0;
  for (uint8_t s : sources_) {
    count += (s == static_cast<uint8_t>(LabelSource::kManualInitial) + 1 ||
              s == static_cast<uint8_t>(LabelSource::kManualResidual) + 1)
                 ? 1
                 : 0;
  }
  return count;
}

std::optional<LabelId> OpalRun::label(size_t index) const {
  if (labels_[index] < 0) return std::nullopt;
  return labels_[index];
}

std::optional<LabelSource> OpalRun::source(size_t index) const {
  if (sources_[index] == 0) return std::nullopt;
  return static_cast<LabelSource>(sources_[index] - 1);
}

void OpalRun::Advance() {
  Require(phase_ != Phase::kDone, ErrorCode::kFailedPrecondition, "the run is already done");
  const size_t left = remaining();
  Require(left == 0, ErrorCode::kFailedPrecondition,
          std::to_string(left) + " queued elements still need labels");
  OpalRun next = *this;
  next.AdvanceInPlace();
  *this = std::move(next);
}

void OpalRun::AdvanceInPlace() {
  switch (phase_) {
    case Phase::kAwaitingInitialLabels:
      Optimize();
      return;
    case Phase::kAwaitingResidualLabels:
      queue_.clear();
      phase_ = Phase::kDone;
      return;
    case Phase::kAwaitingIterationLabels: {
      // The queue was drawn in random order: its first half (rounded up)
      // joins D_t, the rest D_o.
      const size_t to_t = (queue_.size() + 1) / 2;
      d_t_.insert(d_t_.end(), queue_.begin(), queue_.begin() + static_cast<long>(to_t));
      d_o_.insert(d_o_.end(), queue_.begin() + static_cast<long>(to_t), queue_.end());
      queue_.clear();
      if (d_prime_.empty()) {
        phase_ = Phase::kDone;
        return;
      }
      Optimize();
      return;
    }
    case Phase::kOptimizing:
    case Phase::kDone:
      break;
  }
  Fail(ErrorCode::kFailedPrecondition, "cannot advance from phase " + std::string(PhaseName(phase_)));
}

void OpalRun::Optimize() {
  phase_ = Phase::kOptimizing;
  const Dataset& data = *dataset_;
  const int n = static_cast<int>(config_.providers.size());

  auto start = Clock::now();
  std::vector<std::pair<size_t, LabelId>> labelled;
  labelled.reserve(d_t_.size());
  for (size_t i : d_t_) labelled.emplace_back(i, labels_[i]);
  PredictionSet predictions(std::vector<std::string>{});
  for (int j = 0; j < n; ++j) {
    predictions.Append(ProvidePredictions(config_.providers[j], data, labelled, config_.seed, j));
  }
  timings_["finetune"] += SecondsSince(start);

  start = Clock::now();
  OptimizationInstance instance(n);
  for (size_t i : d_o_) {
    const ElementPredictions ep = predictions.ForElement(data.element(i).id);
    instance.AddRow(ep.confidences, ComputeZ(ep), ComputeB(ep, labels_[i]));
  }
  config_.milp.Validate(instance);
  const MilpSolution solution = n == 1 ? Solve1D(instance, config_.milp)
                                       : SolveBranchAndBound(Formulate(instance, config_.milp));
  timings_["milp"] += SecondsSince(start);

  omega_ = solution.omega;
  milp_status_ = std::string(MilpStatusName(solution.status));
  milp_gap_ = solution.gap;
  optimization_rows_ = d_o_;
  optimization_x_ = solution.x;
  details_["milp_manual_count"] = static_cast<double>(solution.manual_count);
  details_["milp_lower_bound"] = solution.lower_bound;
  details_["milp_nodes"] = static_cast<double>(solution.nodes);
  details_["milp_lp_iterations"] = static_cast<double>(solution.lp_iterations);

  start = Clock::now();
  IterationRecord record;
  record.iteration = iteration_;
  record.omega = omega_;
  record.milp_status = milp_status_;
  record.milp_gap = milp_gap_;
  record.optimization_rows = static_cast<int64_t>(d_o_.size());
  std::vector<size_t> residual;
  for (size_t i : d_prime_) {
    const ElementPredictions ep = predictions.ForElement(data.element(i).id);
    const bool c1 = ComputeZ(ep);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += omega_[j] * ep.confidences[j];
    const bool c2 = sum > 1.0;
    record.condition1 += c1 ? 1 : 0;
    record.condition2 += c2 ? 1 : 0;
    record.both_conditions += c1 && c2 ? 1 : 0;
    const LabelDecision decision = Decide(omega_, ep);
    if (decision.is_auto()) {
      labels_[i] = decision.label;
      sources_[i] = static_cast<uint8_t>(LabelSource::kAuto) + 1;
      ++record.auto_labelled;
    } else {
      residual.push_back(i);
    }
  }
  record.residual = static_cast<int64_t>(residual.size());
  iterations_.push_back(std::move(record));
  timings_["label"] += SecondsSince(start);
  AfterDecide(std::move(residual));
}

void OpalRun::AfterDecide(std::vector<size_t> residual) {
  if (!beta_) {
    d_prime_.clear();
    if (residual.empty()) {
      phase_ = Phase::kDone;
      return;
    }
    Enqueue(std::move(residual), LabelSource::kManualResidual);
    phase_ = Phase::kAwaitingResidualLabels;
    return;
  }
  d_prime_ = std::move(residual);
  if (d_prime_.empty()) {
    phase_ = Phase::kDone;
    return;
  }
  ++iteration_;
  std::vector<size_t> order = d_prime_;
  Rng rng(MixSeed(config_.seed, kDrawStream + static_cast<uint64_t>(iteration_)));
  rng.Shuffle(std::span<size_t>(order));
  const size_t take = std::min(order.size(), static_cast<size_t>(*beta_));
  std::vector<size_t> draw(order.begin(), order.begin() + static_cast<long>(take));
  std::vector<uint8_t> drawn(dataset_->size(), 0);
  for (size_t i : draw) drawn[i] = 1;
  std::erase_if(d_prime_, [&](size_t i) { return drawn[i] != 0; });
  iterations_.back().queried = static_cast<int64_t>(draw.size());
  Enqueue(std::move(draw), LabelSource::kManualResidual);
  phase_ = Phase::kAwaitingIterationLabels;
}

RunReport OpalRun::Report() const {
  const Dataset& data = *dataset_;
  RunReport report;
  report.method = beta_ ? "opal-al" : "opal";
  size_t labelled = 0, correct = 0;
  bool truth = true;
  for (size_t i = 0; i < data.size(); ++i) {
    if (labels_[i] < 0) continue;
    const Element& e = data.element(i);
    const auto src = static_cast<LabelSource>(sources_[i] - 1);
    report.assignments.push_back({e.id, data.alphabet().name(labels_[i]), src});
    if (src == LabelSource::kManualResidual) report.residual_manual_ids.push_back(e.id);
    ++labelled;
    if (e.truth) {
      correct += *e.truth == labels_[i] ? 1 : 0;
    } else {
      truth = false;
    }
  }
  if (truth && labelled > 0) {
    report.accuracy = static_cast<double>(correct) / static_cast<double>(labelled);
  }
  report.manual_effort = static_cast<double>(manual_count()) / static_cast<double>(data.size());
  report.timings = timings_;
  report.milp_status = milp_status_;
  report.milp_gap = milp_gap_;
  report.omega = omega_;
  for (size_t i : optimization_rows_) report.optimization_ids.push_back(data.element(i).id);
  report.optimization_x = optimization_x_;
  report.iterations = iterations_;
  report.details = details_;
  report.details["alpha"] = config_.alpha;
  report.details["h_initial"] = config_.split.h_initial;
  report.details["classifiers"] = static_cast<double>(config_.providers.size());
  if (beta_) report.details["beta"] = *beta_;
  report.seed = config_.seed;
  return report;
}

Json OpalRun::SaveState() const {
  const Dataset& data = *dataset_;
  auto ids = [&](const std::vector<size_t>& indices) {
    Json out = Json::array();
    for (size_t i : indices) out.push_back(data.element(i).id);
    return out;
  };
  Json j;
  j["version"] = 1;
  j["phase"] = std::string(PhaseName(phase_));
  j["iteration"] = iteration_;
  j["d_t"] = ids(d_t_);
  j["d_o"] = ids(d_o_);
  j["d_prime"] = ids(d_prime_);
  j["queue"] = ids(queue_);
  j["queue_source"] = std::string(LabelSourceName(queue_source_));
  Json labels = Json::array();
  for (size_t i = 0; i < data.size(); ++i) {
    if (labels_[i] < 0 && !queued_[i]) continue;
    labels.push_back({{"id", data.element(i).id},
                      {"label", labels_[i] >= 0 ? Json(data.alphabet().name(labels_[i])) : Json(nullptr)},
                      {"source", sources_[i] ? Json(std::string(LabelSourceName(
                                                   static_cast<LabelSource>(sources_[i] - 1))))
                                             : Json(nullptr)},
                      {"queued", queued_[i] != 0}});
  }
  j["labels"] = std::move(labels);
  j["omega"] = omega_;
  j["milp_status"] = milp_status_;
  j["milp_gap"] = milp_gap_;
  j["optimization_ids"] = ids(optimization_rows_);
  j["optimization_x"] = std::vector<int>(optimization_x_.begin(), optimization_x_.end());
  Json iterations = Json::array();
  for (const auto& it : iterations_) iterations.push_back(io::IterationToJson(it));
  j["iterations"] = std::move(iterations);
  j["timings"] = timings_;
  j["details"] = details_;
  return j;
}

OpalRun OpalRun::Restore(std::shared_ptr<const Dataset> dataset, OpalConfig config,
                         std::optional<int> beta, const Json& state) {
  OpalRun run(RestoreTag{}, std::move(dataset), std::move(config), beta);
  const Dataset& data = *run.dataset_;
  try {
    Require(state.at("version").get<int>() == 1, ErrorCode::kParse, "unsupported state version");
    auto indices = [&](const Json& list) {
      std::vector<size_t> out;
      for (const auto& id : list) out.push_back(data.IndexOf(id.get<std::string>()));
      return out;
    };
    run.phase_ = ParsePhase(state.at("phase").get<std::string>());
    run.iteration_ = state.at("iteration").get<int>();
    run.d_t_ = indices(state.at("d_t"));
    run.d_o_ = indices(state.at("d_o"));
    run.d_prime_ = indices(state.at("d_prime"));
    run.queue_ = indices(state.at("queue"));
    run.queue_source_ = ParseLabelSource(state.at("queue_source").get<std::string>());
    for (const auto& entry : state.at("labels")) {
      const size_t i = data.IndexOf(entry.at("id").get<std::string>());
      if (!entry.at("label").is_null()) {
        run.labels_[i] = data.alphabet().Index(entry.at("label").get<std::string>());
        run.sources_[i] =
            static_cast<uint8_t>(ParseLabelSource(entry.at("source").get<std::string>())) + 1;
      }
      run.queued_[i] = entry.at("queued").get<bool>() ? 1 : 0;
    }
    run.omega_ = state.at("omega").get<std::vector<double>>();
    run.milp_status_ = state.at("milp_status").get<std::string>();
    run.milp_gap_ = state.at("milp_gap").get<double>();
    run.optimization_rows_ = indices(state.at("optimization_ids"));
    for (int v : state.at("optimization_x").get<std::vector<int>>()) {
      run.optimization_x_.push_back(v ? 1 : 0);
    }
    for (const auto& it : state.at("iterations")) run.iterations_.push_back(io::IterationFromJson(it));
    run.timings_ = state.at("timings").get<std::map<std::string, double>>();
    run.details_ = state.at("details").get<std::map<std::string, double>>();
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string("run state: ") + e.what());
  }
  return run;
}

namespace {

RunReport Drive(OpalRun run, Oracle& oracle) {
  while (run.phase() != Phase::kDone) {
    for (const std::string& id : run.Pending()) run.Submit(id, oracle.Answer(id));
    run.Advance();
  }
  return run.Report();
}

}  // namespace

RunReport RunOpal(std::shared_ptr<const Dataset> dataset, const OpalConfig& config, Oracle& oracle) {
  return Drive(OpalRun(std::move(dataset), config, std::nullopt), oracle);
}

RunReport RunOpalAl(std::shared_ptr<const Dataset> dataset, const ALConfig& config, Oracle& oracle) {
  return Drive(OpalRun(std::move(dataset), config.base, config.beta), oracle);
}

void BaselineConfig::Validate() const {
  Require(h_total > 0.0 && h_total <= 1.0, ErrorCode::kConfig, "hTotal must lie in (0,1]");
  Require(overfit_gap >= 0.0, ErrorCode::kConfig, "overfitGap must be non-negative");
  Require(max_iterations >= 1, ErrorCode::kConfig, "maxIterations must be at least 1");
  Require(!v || *v >= 1, ErrorCode::kConfig, "v must be at least 1");
  Require(dbscan_min_pts >= 1, ErrorCode::kConfig, "dbscanMinPts must be at least 1");
}

namespace {

struct BaselineStart {
  std::vector<size_t> sample;   // manually labelled, ascending
  std::vector<size_t> rest;     // D', ascending
  std::vector<LabelId> labels;  // -1 outside the sample
  double split_seconds = 0.0;
};

BaselineStart LabelBaselineSample(const Dataset& data, const BaselineConfig& config, Oracle& oracle) {
  config.Validate();
  const auto start = Clock::now();
  const size_t count = std::min(RoundHalfUp(config.h_total * static_cast<double>(data.size())), data.size());
  Require(count >= 1, ErrorCode::kConfig, "hTotal leaves the manually labelled subset empty");
  SplitConfig split;
  split.dbscan_eps = config.dbscan_eps;
  split.dbscan_min_pts = config.dbscan_min_pts;
  const Clustering clustering = ClusterDataset(data, split);
  BaselineStart out;
  out.sample = DiversifiedSample(clustering, count, MixSeed(config.seed, kBaselineSampleStream));
  std::vector<uint8_t> in_sample(data.size(), 0);
  for (size_t i : out.sample) in_sample[i] = 1;
  for (size_t i = 0; i < data.size(); ++i) {
    if (!in_sample[i]) out.rest.push_back(i);
  }
  out.split_seconds = SecondsSince(start);
  out.labels.assign(data.size(), -1);
  for (size_t i : out.sample) out.labels[i] = oracle.Answer(data.element(i).id);
  return out;
}

RunReport BaselineReport(const Dataset& data, const std::string& method, const BaselineStart& start,
                         const std::vector<LabelId>& final_labels, uint64_t seed) {
  RunReport report;
  report.method = method;
  std::vector<uint8_t> manual(data.size(), 0);
  for (size_t i : start.sample) manual[i] = 1;
  size_t correct = 0;
  bool truth = data.has_truth();
  for (size_t i = 0; i < data.size(); ++i) {
    const Element& e = data.element(i);
    report.assignments.push_back({e.id, data.alphabet().name(final_labels[i]),
                                  manual[i] ? LabelSource::kManualInitial : LabelSource::kAuto});
    if (truth) correct += *e.truth == final_labels[i] ? 1 : 0;
  }
  if (truth) report.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  report.manual_effort = static_cast<double>(start.sample.size()) / static_cast<double>(data.size());
  report.timings["split"] = start.split_seconds;
  report.timings["finetune"] = 0.0;
  report.timings["milp"] = 0.0;
  report.timings["label"] = 0.0;
  report.seed = seed;
  return report;
}

}  // namespace

RunReport RunSupervised(std::shared_ptr<const Dataset> dataset, const ProviderSpec& classifier,
                        const BaselineConfig& config, Oracle& oracle) {
  const Dataset& data = *dataset;
  BaselineStart start = LabelBaselineSample(data, config, oracle);
  auto t = Clock::now();
  std::vector<std::pair<size_t, LabelId>> labelled;
  for (size_t i : start.sample) labelled.emplace_back(i, start.labels[i]);
  const PredictionSet predictions = ProvidePredictions(classifier, data, labelled, config.seed, 0);
  const double finetune = SecondsSince(t);
  t = Clock::now();
  std::vector<LabelId> final_labels = start.labels;
  for (size_t i : start.rest) final_labels[i] = predictions.Get(0, data.element(i).id).label;
  RunReport report = BaselineReport(data, "supervised", start, final_labels, config.seed);
  report.timings["finetune"] = finetune;
  report.timings["label"] = SecondsSince(t);
  report.details["h_total"] = config.h_total;
  return report;
}

RunReport RunPseudo(std::shared_ptr<const Dataset> dataset, const TrainConfig& train,
                    const BaselineConfig& config, Oracle& oracle) {
  const Dataset& data = *dataset;
  Require(data.has_features(), ErrorCode::kFailedPrecondition, "pseudo-labelling needs features");
  config.Validate();
  const size_t count = std::min(RoundHalfUp(config.h_total * static_cast<double>(data.size())), data.size());
  const size_t v = config.v ? static_cast<size_t>(*config.v) : RoundHalfUp(0.15 * static_cast<double>(count));
  Require(v >= 1 && v < count, ErrorCode::kConfig,
          "validation size " + std::to_string(v) + " must lie in [1, " + std::to_string(count) + ")");
  BaselineStart start = LabelBaselineSample(data, config, oracle);

  const auto loop_start = Clock::now();
  std::vector<size_t> order = start.sample;
  Rng rng(MixSeed(config.seed, kValidationStream));
  rng.Shuffle(std::span<size_t>(order));
  std::vector<size_t> d_v(order.begin(), order.begin() + static_cast<long>(v));
  std::vector<size_t> d_t(order.begin() + static_cast<long>(v), order.end());
  std::sort(d_v.begin(), d_v.end());
  std::sort(d_t.begin(), d_t.end());

  auto build = [&](const std::vector<size_t>& items, const std::vector<LabelId>& labels) {
    TrainingSet set;
    for (size_t i : items) {
      set.features.push_back(*data.element(i).features);
      set.labels.push_back(labels[i]);
    }
    return set;
  };
  auto accuracy = [&](const SoftmaxModel& model, const std::vector<size_t>& items) {
    size_t ok = 0;
    for (size_t i : items) ok += model.Predict(*data.element(i).features).label == start.labels[i] ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(items.size());
  };

  SoftmaxModel model = TrainSoftmax(build(d_t, start.labels), data.alphabet(), train);
  std::vector<LabelId> working = start.labels;
  int iterations = 0;
  double stop_reason = 2.0;  // 1 overfitting, 2 iteration budget, 3 time budget
  double gap = 0.0;
  while (iterations < config.max_iterations) {
    for (size_t i : start.rest) working[i] = model.Predict(*data.element(i).features).label;
    std::vector<size_t> combined = d_t;
    combined.insert(combined.end(), start.rest.begin(), start.rest.end());
    model = TrainSoftmax(build(combined, working), data.alphabet(), train, nullptr, &model);
    ++iterations;
    gap = accuracy(model, d_t) - accuracy(model, d_v);
    if (gap > config.overfit_gap) {
      stop_reason = 1.0;
      break;
    }
    if (config.time_limit_seconds && SecondsSince(loop_start) > *config.time_limit_seconds) {
      stop_reason = 3.0;
      break;
    }
  }
  const double finetune = SecondsSince(loop_start);
  const auto t = Clock::now();
  std::vector<LabelId> final_labels = start.labels;
  for (size_t i : start.rest) final_labels[i] = model.Predict(*data.element(i).features).label;
  RunReport report = BaselineReport(data, "pseudo", start, final_labels, config.seed);
  report.timings["finetune"] = finetune;
  report.timings["label"] = SecondsSince(t);
  report.details["h_total"] = config.h_total;
  report.details["validation_size"] = static_cast<double>(v);
  report.details["iterations"] = iterations;
  report.details["stop_reason"] = stop_reason;
  report.details["last_gap"] = gap;
  return report;
}

ThresholdRule FitThreshold(const std::vector<double>& metric, const std::vector<LabelId>& labels) {
  Require(!metric.empty() && metric.size() == labels.size(), ErrorCode::kInvalidArgument,
          "threshold fit needs matching, non-empty metric and label lists");
  std::vector<size_t> order(metric.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return metric[a] < metric[b]; });
  size_t total_second = 0;
  for (LabelId l : labels) total_second += l == 1 ? 1 : 0;
  const size_t total = labels.size();

  ThresholdRule best;
  size_t best_correct = 0;
  bool have = false;
  // `below` elements sit at or below the threshold; of them `below_second`
  // carry alphabet[1].
  auto consider = [&](double threshold, size_t below, size_t below_second) {
    const size_t above = total - below;
    const size_t above_second = total_second - below_second;
    // Polarity 1: above -> second label, at-or-below -> first label.
    const size_t p1 = above_second + (below - below_second);
    const size_t p0 = (above - above_second) + below_second;
    if (!have || p1 > best_correct) {
      best = {threshold, true, 0.0};
      best_correct = p1;
      have = true;
    }
    if (p0 > best_correct) {
      best = {threshold, false, 0.0};
      best_correct = p0;
    }
  };
  consider(-std::numeric_limits<double>::infinity(), 0, 0);
  size_t below = 0, below_second = 0;
  for (size_t k = 0; k < order.size();) {
    const double value = metric[order[k]];
    while (k < order.size() && metric[order[k]] == value) {
      below_second += labels[order[k]] == 1 ? 1 : 0;
      ++below;
      ++k;
    }
    if (k < order.size()) consider(value + (metric[order[k]] - value) / 2.0, below, below_second);
  }
  consider(std::numeric_limits<double>::infinity(), total, total_second);
  best.training_accuracy = static_cast<double>(best_correct) / static_cast<double>(total);
  return best;
}

RunReport RunThresholdBaseline(std::shared_ptr<const Dataset> dataset,
                               const std::unordered_map<std::string, double>& metric,
                               const BaselineConfig& config, Oracle& oracle) {
  const Dataset& data = *dataset;
  Require(data.alphabet().size() == 2, ErrorCode::kInvalidArgument,
          "the threshold baseline needs a binary alphabet");
  std::vector<double> values(data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    auto it = metric.find(data.element(i).id);
    Require(it != metric.end(), ErrorCode::kInvalidArgument,
            "metric value missing for '" + data.element(i).id + "'");
    values[i] = it->second;
  }
  BaselineStart start = LabelBaselineSample(data, config, oracle);
  auto t = Clock::now();
  std::vector<double> train_metric;
  std::vector<LabelId> train_labels;
  for (size_t i : start.sample) {
    train_metric.push_back(values[i]);
    train_labels.push_back(start.labels[i]);
  }
  const ThresholdRule rule = FitThreshold(train_metric, train_labels);
  const double fit = SecondsSince(t);
  t = Clock::now();
  std::vector<LabelId> final_labels = start.labels;
  for (size_t i : start.rest) final_labels[i] = rule.Apply(values[i]);
  RunReport report = BaselineReport(data, "threshold", start, final_labels, config.seed);
  report.timings["finetune"] = fit;
  report.timings["label"] = SecondsSince(t);
  report.details["h_total"] = config.h_total;
  if (std::isfinite(rule.threshold)) {
    report.details["threshold"] = rule.threshold;
  } else {
    report.details["threshold_infinite"] = rule.threshold > 0 ? 1.0 : -1.0;
  }
  report.details["above_is_second"] = rule.above_is_second ? 1.0 : 0.0;
  report.details["training_accuracy"] = rule.training_accuracy;
  return report;
}

}  // namespace labelopt
