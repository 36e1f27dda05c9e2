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

#ifndef LABELOPT_MILP_HPP_
#define LABELOPT_MILP_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace labelopt {

// The optimization subset: per element the confidences of the n classifiers,
// whether they agree (z) and whether they agree on the true label (b).
class OptimizationInstance {
 public:
  OptimizationInstance() = default;
  explicit OptimizationInstance(int num_classifiers) : num_classifiers_(num_classifiers) {}

  void AddRow(std::span<const double> theta, bool z, bool b);

  int num_classifiers() const { return num_classifiers_; }
  int num_rows() const { return static_cast<int>(z_.size()); }
  std::span<const double> theta(int row) const {
    return {theta_.data() + static_cast<size_t>(row) * num_classifiers_,
            static_cast<size_t>(num_classifiers_)};
  }
  bool z(int row) const { return z_[row] != 0; }
  bool b(int row) const { return b_[row] != 0; }
  double max_theta() const;

  // Throws kInvalidArgument unless b <= z, theta in (0,1] and m >= 1.
  void Validate() const;

 private:
  int num_classifiers_ = 0;
  std::vector<double> theta_;
  std::vector<uint8_t> z_;
  std::vector<uint8_t> b_;
};

struct MilpConfig {
  double alpha = 1.0;
  double big_m = 1e6;
  double epsilon = 1e-6;
  double omega_lower = 0.0;
  // Defaults to (big_m - 1) / n.
  std::optional<double> omega_upper;
  std::optional<int64_t> node_limit;
  std::optional<double> time_limit_seconds;

  double OmegaUpper(int num_classifiers) const {
    return omega_upper.value_or((big_m - 1.0) / num_classifiers);
  }
  // Number of agreed-but-wrong rows the accuracy row tolerates.
  int64_t ErrorBudget(int num_rows) const;
  // Throws kConfig when the bounds break big-M validity for this instance.
  void Validate(const OptimizationInstance& instance) const;
};

enum class ConstraintSense { kLessEqual, kGreaterEqual, kEqual };

struct MilpVariable {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  bool integer = false;
};

struct MilpConstraint {
  std::string name;
  std::vector<std::pair<int, double>> terms;
  ConstraintSense sense = ConstraintSense::kLessEqual;
  double rhs = 0.0;
};

// The linearized program: variables W_1..W_n then X_1..X_m; constraint ACC
// followed by LNK_LE_i / LNK_GE_i for every row.
struct MilpModel {
  std::vector<MilpVariable> variables;
  std::vector<MilpConstraint> constraints;
  std::vector<double> objective;  // minimized, one entry per variable
  double objective_constant = 0.0;
  int num_classifiers = 0;
  int num_rows = 0;
  // Copy of the instance and config the model was formulated from; the
  // branch-and-bound exploits the row structure directly.
  OptimizationInstance source;
  MilpConfig config;
};

enum class MilpStatus { kOptimal, kIncumbent, kTrivialFallback };

std::string_view MilpStatusName(MilpStatus status);
MilpStatus ParseMilpStatus(std::string_view name);

struct MilpSolution {
  std::vector<double> omega;
  std::vector<uint8_t> x;
  int64_t manual_count = 0;
  double lower_bound = 0.0;
  double gap = 0.0;
  MilpStatus status = MilpStatus::kTrivialFallback;
  int64_t nodes = 0;
  int64_t lp_iterations = 0;
  double seconds = 0.0;
};

MilpModel Formulate(const OptimizationInstance& instance, const MilpConfig& config);

// Branch-and-bound over the indicators with an LP-relaxation bound.
MilpSolution SolveBranchAndBound(const MilpModel& model);

// Exact optimum for a single classifier by sweeping sorted thresholds.
MilpSolution Solve1D(const OptimizationInstance& instance, const MilpConfig& config);

// Oracle: enumerates indicator vectors, m <= 20.
MilpSolution BruteForce(const OptimizationInstance& instance, const MilpConfig& config);

// The all-manual solution (omega = 0, x = 0).
MilpSolution FallbackSolution(const OptimizationInstance& instance);

struct VerifyReport {
  bool ok = true;
  std::vector<int> bad_rows;
  std::vector<std::string> failures;
};

VerifyReport Verify(const MilpSolution& solution, const OptimizationInstance& instance,
                    const MilpConfig& config);

std::string ExportMps(const MilpModel& model);
// Parses text produced by ExportMps (or any free-format MPS file using the
// same sections). The returned model has no source instance attached.
MilpModel ParseMps(std::string_view text);

namespace internal {

struct SweepResult {
  double scale = 0.0;          // multiplier applied to the scores
  int64_t manual_count = 0;
  std::vector<uint8_t> x;
};

// Best threshold along one direction: row i is auto when scale*scores[i] >
// 1 (with the epsilon band honored). Exact for a single classifier.
SweepResult SweepScores(std::span<const double> scores, const OptimizationInstance& instance,
                        int64_t error_budget, double epsilon, double scale_lower,
                        double scale_upper);

// Exact feasibility of { lower <= w <= upper, a_k . w <= 1 for x_k = 0,
// a_k . w >= 1 + eps for x_k = 1 } by vertex enumeration. Independent of
// the simplex code; intended for small n.
std::optional<std::vector<double>> RealizeByVertices(
    const OptimizationInstance& instance, std::span<const int> rows,
    std::span<const uint8_t> x, const MilpConfig& config);

}  // namespace internal

}  // namespace labelopt

#endif  // LABELOPT_MILP_HPP_
