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

#ifndef LABELOPT_LP_HPP_
#define LABELOPT_LP_HPP_

#include <limits>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace labelopt::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Entry {
  int row;
  double value;
};

// A linear program in bounded form:
//   minimize    c'x
//   subject to  row_lo <= Ax <= row_hi,  col_lo <= x <= col_hi.
// Columns are stored sparsely; rows are added with their coefficients.
class LinearProgram {
 public:
  int AddColumn(double cost, double lower, double upper);
  int AddRow(double lower, double upper,
             std::span<const std::pair<int, double>> coefficients);

  int num_rows() const { return static_cast<int>(row_lower_.size()); }
  int num_columns() const { return static_cast<int>(cost_.size()); }

  double cost(int col) const { return cost_[col]; }
  double column_lower(int col) const { return column_lower_[col]; }
  double column_upper(int col) const { return column_upper_[col]; }
  double row_lower(int row) const { return row_lower_[row]; }
  double row_upper(int row) const { return row_upper_[row]; }
  std::span<const Entry> column(int col) const { return columns_[col]; }

  void set_column_bounds(int col, double lower, double upper) {
    column_lower_[col] = lower;
    column_upper_[col] = upper;
  }

 private:
  std::vector<double> cost_;
  std::vector<double> column_lower_;
  std::vector<double> column_upper_;
  std::vector<double> row_lower_;
  std::vector<double> row_upper_;
  std::vector<std::vector<Entry>> columns_;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit, kNumerical };

std::string_view LpStatusName(LpStatus status);

struct SimplexOptions {
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-9;
  double pivot_tolerance = 1e-9;
  int max_iterations = 200000;
  // Basis inverse is recomputed from scratch this often.
  int refactor_interval = 100;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int degenerate_pivots_before_bland = 10;
};

struct LpSolution {
  LpStatus status = LpStatus::kNumerical;
  double objective = 0.0;
  std::vector<double> values;
  std::vector<double> row_activity;
  int iterations = 0;
};

// Bounded-variable primal simplex (two phases, composite phase 1 minimizing
// the sum of infeasibilities). Dantzig pricing, falling back to Bland's rule
// while pivots stay degenerate.
LpSolution SolveLp(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace labelopt::lp

#endif  // LABELOPT_LP_HPP_
