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

// Step-by-step re-execution of a single-round labelling run with synthetic
// classifiers, written against the building blocks rather than OpalRun. The
// weights come from the run under test; the replay certifies them (feasible
// on the optimization subset, objective equal to an exact optimum) and then
// recomputes every label, the effort and the accuracy on its own.

#ifndef LABELOPT_TESTS_REPLAY_HPP_
#define LABELOPT_TESTS_REPLAY_HPP_

#include <optional>
#include <string>
#include <vector>

#include "labelopt/core.hpp"
#include "labelopt/milp.hpp"
#include "labelopt/predictors.hpp"
#include "labelopt/rng.hpp"
#include "labelopt/splitter.hpp"
#include "support.hpp"

namespace labelopt::testing {

struct ReplayInput {
  const Dataset* dataset = nullptr;
  SynthConfig synth;  // seed ignored
  int classifiers = 3;
  double alpha = 1.0;
  double h_initial = 0.15;
  int64_t s_max = 1000;
  uint64_t seed = 0;
};

struct ReplayResult {
  std::vector<std::string> d_o;
  std::vector<std::string> residual;
  std::vector<std::string> final_labels;  // dataset order
  std::vector<LabelSource> sources;
  double manual_effort = 0.0;
  double accuracy = 0.0;
  int64_t auto_count = 0;
  int64_t optimum = -1;     // exact optimum on D_o when certifiable
  int64_t run_manual = -1;  // manual count implied by the run's weights on D_o
  bool weights_feasible = false;
  std::vector<uint8_t> x;
};

inline ReplayResult Replay(const ReplayInput& in, const std::vector<double>& omega) {
  const Dataset& data = *in.dataset;
  const LabelAlphabet& ab = data.alphabet();
  ReplayResult out;

  SplitConfig split;
  split.h_initial = in.h_initial;
  split.s_max = in.s_max;
  split.seed = MixSeed(in.seed, 11);
  const Partition part = Split(data, split);
  out.d_o = part.d_o;

  std::vector<PredictionSet> columns;
  for (int j = 0; j < in.classifiers; ++j) {
    SynthConfig cfg = in.synth;
    cfg.seed = MixSeed(in.seed, 100 + static_cast<uint64_t>(j));
    columns.push_back(SynthPredictions(data, 1, cfg, {"c" + std::to_string(j + 1)}));
  }
  auto labels_of = [&](const std::string& id) {
    std::vector<LabelId> l;
    for (const auto& c : columns) l.push_back(c.Get(0, id).label);
    return l;
  };
  auto sum_of = [&](const std::string& id) {
    double s = 0.0;
    for (int j = 0; j < in.classifiers; ++j) s += omega[j] * columns[j].Get(0, id).confidence;
    return s;
  };
  auto agree = [](const std::vector<LabelId>& l) {
    for (LabelId v : l) {
      if (v != l.front()) return false;
    }
    return true;
  };

  // Optimization subset in dataset order.
  OptimizationInstance inst(in.classifiers);
  OptimizationInstance flat(1);
  bool shared_confidence = true;
  for (const std::string& id : part.d_o) {
    const auto l = labels_of(id);
    const LabelId truth = *data.element(data.IndexOf(id)).truth;
    const bool z = agree(l);
    const bool b = z && l.front() == truth;
    std::vector<double> theta;
    for (const auto& c : columns) theta.push_back(c.Get(0, id).confidence);
    for (double t : theta) shared_confidence = shared_confidence && t == theta.front();
    inst.AddRow(theta, z, b);
    const double t0[1] = {theta.front()};
    flat.AddRow(t0, z, b);
  }
  MilpConfig cfg;
  cfg.alpha = in.alpha;
  MilpSolution mine;
  mine.omega = omega;
  int64_t manual = 0;
  for (int i = 0; i < inst.num_rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < in.classifiers; ++j) s += omega[j] * inst.theta(i)[j];
    mine.x.push_back(s > 1.0 ? 1 : 0);
    manual += (s > 1.0 && inst.z(i)) ? 0 : 1;
  }
  mine.manual_count = manual;
  out.x = mine.x;
  out.run_manual = manual;
  out.weights_feasible = Verify(mine, inst, cfg).ok;
  if (inst.num_rows() <= 14) {
    out.optimum = BruteForce(inst, cfg).manual_count;
  } else if (shared_confidence) {
    // Equal confidences across classifiers collapse to one direction.
    out.optimum = SortedSweepManual(flat, in.alpha);
  }

  std::vector<uint8_t> in_prime(data.size(), 0);
  for (const auto& id : part.d_prime) in_prime[data.IndexOf(id)] = 1;
  std::vector<uint8_t> initial(data.size(), 0);
  for (const auto& id : part.d_t) initial[data.IndexOf(id)] = 1;
  for (const auto& id : part.d_o) initial[data.IndexOf(id)] = 1;
  size_t correct = 0, manual_total = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const Element& e = data.element(i);
    LabelId label = *e.truth;
    LabelSource src = LabelSource::kManualInitial;
    if (in_prime[i]) {
      const auto l = labels_of(e.id);
      if (agree(l) && sum_of(e.id) > 1.0) {
        label = l.front();
        src = LabelSource::kAuto;
        ++out.auto_count;
      } else {
        src = LabelSource::kManualResidual;
        out.residual.push_back(e.id);
      }
    }
    if (src != LabelSource::kAuto) ++manual_total;
    correct += label == *e.truth ? 1 : 0;
    out.final_labels.push_back(ab.name(label));
    out.sources.push_back(src);
  }
  out.manual_effort = static_cast<double>(manual_total) / static_cast<double>(data.size());
  out.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return out;
}

}  // namespace labelopt::testing

#endif  // LABELOPT_TESTS_REPLAY_HPP_
