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

#include "labelopt/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "labelopt/error.hpp"

namespace labelopt::lp {

int LinearProgram::AddColumn(double cost, double lower, double upper) {
  Require(lower <= upper, ErrorCode::kInvalidArgument, "column bounds crossed");
  cost_.push_back(cost);
  column_lower_.push_back(lower);
  column_upper_.push_back(upper);
  columns_.emplace_back();
  return num_columns() - 1;
}

int LinearProgram::AddRow(double lower, double upper,
                          std::span<const std::pair<int, double>> coefficients) {
  Require(lower <= upper, ErrorCode::kInvalidArgument, "row bounds crossed");
  const int row = num_rows();
  row_lower_.push_back(lower);
  row_upper_.push_back(upper);
  for (const auto& [col, value] : coefficients) {
    Require(col >= 0 && col < num_columns(), ErrorCode::kInvalidArgument,
            "row references unknown column");
    if (value != 0.0) columns_[col].push_back({row, value});
  }
  return row;
}

std::string_view LpStatusName(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration_limit";
    case LpStatus::kNumerical: return "numerical";
  }
  return "unknown";
}

namespace {

enum class VarState : uint8_t { kBasic, kAtLower, kAtUpper, kFreeZero };

// Variables 0..n-1 are structural; n..n+m-1 are the row logicals r_k with
// A x - r = 0, so logical k has column -e_k and the row bounds as its bounds.
class BoundedSimplex {
 public:
  BoundedSimplex(const LinearProgram& lp, const SimplexOptions& options)
      : lp_(lp),
        options_(options),
        n_(lp.num_columns()),
        m_(lp.num_rows()),
        lower_(n_ + m_),
        upper_(n_ + m_),
        cost_(n_ + m_, 0.0),
        value_(n_ + m_, 0.0),
        state_(n_ + m_),
        head_(m_),
        binv_(static_cast<size_t>(m_) * m_, 0.0) {
    for (int j = 0; j < n_; ++j) {
      lower_[j] = lp.column_lower(j);
      upper_[j] = lp.column_upper(j);
      cost_[j] = lp.cost(j);
    }
    for (int k = 0; k < m_; ++k) {
      lower_[n_ + k] = lp.row_lower(k);
      upper_[n_ + k] = lp.row_upper(k);
    }
  }

  LpSolution Run() {
    LpSolution out;
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lower_[j])) {
        state_[j] = VarState::kAtLower;
        value_[j] = lower_[j];
      } else if (std::isfinite(upper_[j])) {
        state_[j] = VarState::kAtUpper;
        value_[j] = upper_[j];
      } else {
        state_[j] = VarState::kFreeZero;
        value_[j] = 0.0;
      }
    }
    for (int k = 0; k < m_; ++k) {
      head_[k] = n_ + k;
      state_[n_ + k] = VarState::kBasic;
    }
    if (!Refactor()) return Finish(out, LpStatus::kNumerical);

    int degenerate_run = 0;
    int since_refactor = 0;
    bool verified_optimal = false;
    for (int iter = 0; iter < options_.max_iterations; ++iter) {
      out.iterations = iter;
      if (since_refactor >= options_.refactor_interval) {
        if (!Refactor()) return Finish(out, LpStatus::kNumerical);
        since_refactor = 0;
      }
      const bool phase_one = ComputePhaseCosts();
      ComputeDuals();
      const bool bland = degenerate_run >= options_.degenerate_pivots_before_bland;
      const int entering = ChooseEntering(bland);
      if (entering < 0) {
        // Confirm on a fresh factorization before declaring the outcome.
        if (!verified_optimal && since_refactor > 0) {
          if (!Refactor()) return Finish(out, LpStatus::kNumerical);
          since_refactor = 0;
          verified_optimal = true;
          continue;
        }
        return Finish(out, phase_one ? LpStatus::kInfeasible : LpStatus::kOptimal);
      }
      verified_optimal = false;
      const double direction = EnteringDirection(entering);
      Ftran(entering);
      const Step step = RatioTest(entering, direction, bland);
      if (step.leaving_pos < 0 && !step.bound_flip) {
        if (phase_one) return Finish(out, LpStatus::kNumerical);
        return Finish(out, LpStatus::kUnbounded);
      }
      Apply(entering, direction, step);
      ++since_refactor;
      degenerate_run = step.length <= 1e-12 ? degenerate_run + 1 : 0;
    }
    return Finish(out, LpStatus::kIterationLimit);
  }

 private:
  struct Step {
    double length = 0.0;
    int leaving_pos = -1;
    bool leaving_to_upper = false;
    bool bound_flip = false;
  };

  double& Binv(int i, int k) { return binv_[static_cast<size_t>(i) * m_ + k]; }

  // Rebuilds B^-1 by Gauss-Jordan elimination and recomputes basic values.
  bool Refactor() {
    std::vector<double> dense(static_cast<size_t>(m_) * m_, 0.0);
    for (int pos = 0; pos < m_; ++pos) {
      const int var = head_[pos];
      if (var >= n_) {
        dense[static_cast<size_t>(var - n_) * m_ + pos] = -1.0;
      } else {
        for (const Entry& e : lp_.column(var)) {
          dense[static_cast<size_t>(e.row) * m_ + pos] = e.value;
        }
      }
    }
    std::fill(binv_.begin(), binv_.end(), 0.0);
    for (int i = 0; i < m_; ++i) Binv(i, i) = 1.0;
    // Row operations on [dense | binv] turn dense into the identity, leaving
    // binv = B^-1 with basis positions as rows.
    std::vector<int> row_of_pos(m_);
    std::vector<bool> used(m_, false);
    std::vector<double> rowbuf;
    for (int pos = 0; pos < m_; ++pos) {
      int pivot = -1;
      double best = options_.pivot_tolerance;
      for (int r = 0; r < m_; ++r) {
        if (used[r]) continue;
        const double v = std::abs(dense[static_cast<size_t>(r) * m_ + pos]);
        if (v > best) {
          best = v;
          pivot = r;
        }
      }
      if (pivot < 0) return false;
      used[pivot] = true;
      row_of_pos[pos] = pivot;
      const double inv = 1.0 / dense[static_cast<size_t>(pivot) * m_ + pos];
      double* prow = &dense[static_cast<size_t>(pivot) * m_];
      double* pinv = &binv_[static_cast<size_t>(pivot) * m_];
      for (int c = 0; c < m_; ++c) {
        prow[c] *= inv;
        pinv[c] *= inv;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == pivot) continue;
        const double f = dense[static_cast<size_t>(r) * m_ + pos];
        if (f == 0.0) continue;
        double* drow = &dense[static_cast<size_t>(r) * m_];
        double* irow = &binv_[static_cast<size_t>(r) * m_];
        for (int c = 0; c < m_; ++c) {
          drow[c] -= f * prow[c];
          irow[c] -= f * pinv[c];
        }
      }
    }
    // Reorder rows so that row `pos` of binv corresponds to basis position pos.
    std::vector<double> ordered(binv_.size());
    for (int pos = 0; pos < m_; ++pos) {
      std::copy_n(&binv_[static_cast<size_t>(row_of_pos[pos]) * m_], m_,
                  &ordered[static_cast<size_t>(pos) * m_]);
    }
    binv_.swap(ordered);
    RecomputeBasicValues();
    return true;
  }

  void RecomputeBasicValues() {
    // B x_B = -N x_N.
    std::vector<double> rhs(m_, 0.0);
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::kBasic || value_[j] == 0.0) continue;
      if (j >= n_) {
        rhs[j - n_] += value_[j];
      } else {
        for (const Entry& e : lp_.column(j)) rhs[e.row] -= e.value * value_[j];
      }
    }
    for (int pos = 0; pos < m_; ++pos) {
      double sum = 0.0;
      const double* row = &binv_[static_cast<size_t>(pos) * m_];
      for (int k = 0; k < m_; ++k) sum += row[k] * rhs[k];
      value_[head_[pos]] = sum;
    }
  }

  // Fills basic_cost_ for the current phase; returns true in phase one.
  bool ComputePhaseCosts() {
    basic_cost_.assign(m_, 0.0);
    bool infeasible = false;
    const double tol = options_.primal_tolerance;
    for (int pos = 0; pos < m_; ++pos) {
      const int var = head_[pos];
      if (value_[var] < lower_[var] - tol) {
        basic_cost_[pos] = -1.0;
        infeasible = true;
      } else if (value_[var] > upper_[var] + tol) {
        basic_cost_[pos] = 1.0;
        infeasible = true;
      }
    }
    phase_one_ = infeasible;
    if (!infeasible) {
      for (int pos = 0; pos < m_; ++pos) basic_cost_[pos] = cost_[head_[pos]];
    }
    return infeasible;
  }

  void ComputeDuals() {
    dual_.assign(m_, 0.0);
    for (int pos = 0; pos < m_; ++pos) {
      const double c = basic_cost_[pos];
      if (c == 0.0) continue;
      const double* row = &binv_[static_cast<size_t>(pos) * m_];
      for (int k = 0; k < m_; ++k) dual_[k] += c * row[k];
    }
  }

  double ReducedCost(int j) const {
    if (j >= n_) return dual_[j - n_];
    double d = phase_one_ ? 0.0 : cost_[j];
    for (const Entry& e : lp_.column(j)) d -= dual_[e.row] * e.value;
    return d;
  }

  int ChooseEntering(bool bland) {
    const double tol = options_.dual_tolerance;
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < n_ + m_; ++j) {
      const VarState s = state_[j];
      if (s == VarState::kBasic || lower_[j] == upper_[j]) continue;
      const double d = ReducedCost(j);
      double score = 0.0;
      if (s == VarState::kAtLower && d < -tol) score = -d;
      else if (s == VarState::kAtUpper && d > tol) score = d;
      else if (s == VarState::kFreeZero && std::abs(d) > tol) score = std::abs(d);
      if (score == 0.0) continue;
      if (bland) {
        entering_reduced_cost_ = d;
        return j;
      }
      if (score > best_score) {
        best_score = score;
        best = j;
        entering_reduced_cost_ = d;
      }
    }
    return best;
  }

  double EnteringDirection(int j) const {
    switch (state_[j]) {
      case VarState::kAtLower: return 1.0;
      case VarState::kAtUpper: return -1.0;
      default: return entering_reduced_cost_ < 0.0 ? 1.0 : -1.0;
    }
  }

  // alpha = B^-1 a_j.
  void Ftran(int j) {
    alpha_.assign(m_, 0.0);
    if (j >= n_) {
      const int k = j - n_;
      for (int pos = 0; pos < m_; ++pos) alpha_[pos] = -binv_[static_cast<size_t>(pos) * m_ + k];
      return;
    }
    for (const Entry& e : lp_.column(j)) {
      for (int pos = 0; pos < m_; ++pos) {
        alpha_[pos] += binv_[static_cast<size_t>(pos) * m_ + e.row] * e.value;
      }
    }
  }

  // Basic variables move at rate -direction*alpha per unit step. In phase one
  // every bound crossing is a breakpoint of the infeasibility sum, so the step
  // stops at the first one and the sum decreases strictly when nondegenerate.
  Step RatioTest(int entering, double direction, bool bland) {
    Step step;
    double best = kInfinity;
    if (std::isfinite(lower_[entering]) && std::isfinite(upper_[entering])) {
      best = upper_[entering] - lower_[entering];
      step.bound_flip = true;
    }
    const double tol = options_.primal_tolerance;
    double best_pivot = 0.0;
    int best_var = -1;
    for (int pos = 0; pos < m_; ++pos) {
      const double a = alpha_[pos];
      if (std::abs(a) <= options_.pivot_tolerance) continue;
      const double rate = -direction * a;
      const int var = head_[pos];
      const double x = value_[var];
      double limit = kInfinity;
      bool to_upper = false;
      if (rate < 0.0) {
        if (x > upper_[var] + tol) {
          limit = (x - upper_[var]) / -rate;
          to_upper = true;
        } else if (x >= lower_[var] - tol && std::isfinite(lower_[var])) {
          limit = std::max(0.0, x - lower_[var]) / -rate;
        }
      } else {
        if (x < lower_[var] - tol) {
          limit = (lower_[var] - x) / rate;
        } else if (x <= upper_[var] + tol && std::isfinite(upper_[var])) {
          limit = std::max(0.0, upper_[var] - x) / rate;
          to_upper = true;
        }
      }
      if (!std::isfinite(limit)) continue;
      bool take = false;
      if (limit < best - 1e-12) {
        take = true;
      } else if (limit <= best + 1e-12 && step.leaving_pos >= 0) {
        take = bland ? var < best_var : std::abs(a) > best_pivot;
      } else if (limit <= best + 1e-12 && step.bound_flip) {
        take = false;
      }
      if (take) {
        best = limit;
        best_pivot = std::abs(a);
        best_var = var;
        step.leaving_pos = pos;
        step.leaving_to_upper = to_upper;
        step.bound_flip = false;
      }
    }
    step.length = std::isfinite(best) ? best : 0.0;
    if (!std::isfinite(best)) {
      step.leaving_pos = -1;
      step.bound_flip = false;
    }
    return step;
  }

  void Apply(int entering, double direction, const Step& step) {
    const double t = step.length;
    if (t != 0.0) {
      for (int pos = 0; pos < m_; ++pos) {
        if (alpha_[pos] != 0.0) value_[head_[pos]] -= direction * t * alpha_[pos];
      }
      value_[entering] += direction * t;
    }
    if (step.bound_flip) {
      if (direction > 0) {
        state_[entering] = VarState::kAtUpper;
        value_[entering] = upper_[entering];
      } else {
        state_[entering] = VarState::kAtLower;
        value_[entering] = lower_[entering];
      }
      return;
    }
    const int r = step.leaving_pos;
    const int leaving = head_[r];
    if (step.leaving_to_upper) {
      state_[leaving] = VarState::kAtUpper;
      value_[leaving] = upper_[leaving];
    } else {
      state_[leaving] = VarState::kAtLower;
      value_[leaving] = lower_[leaving];
    }
    head_[r] = entering;
    state_[entering] = VarState::kBasic;

    // Product-form update of the explicit inverse.
    const double pivot = alpha_[r];
    double* prow = &binv_[static_cast<size_t>(r) * m_];
    for (int k = 0; k < m_; ++k) prow[k] /= pivot;
    for (int pos = 0; pos < m_; ++pos) {
      if (pos == r) continue;
      const double f = alpha_[pos];
      if (f == 0.0) continue;
      double* row = &binv_[static_cast<size_t>(pos) * m_];
      for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
    }
  }

  LpSolution& Finish(LpSolution& out, LpStatus status) {
    out.status = status;
    out.values.assign(value_.begin(), value_.begin() + n_);
    out.row_activity.assign(value_.begin() + n_, value_.end());
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += cost_[j] * value_[j];
    out.objective = obj;
    return out;
  }

  const LinearProgram& lp_;
  const SimplexOptions& options_;
  const int n_;
  const int m_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<double> value_;
  std::vector<VarState> state_;
  std::vector<int> head_;
  std::vector<double> binv_;
  std::vector<double> basic_cost_;
  std::vector<double> dual_;
  std::vector<double> alpha_;
  double entering_reduced_cost_ = 0.0;
  bool phase_one_ = false;
};

}  // namespace

LpSolution SolveLp(const LinearProgram& lp, const SimplexOptions& options) {
  if (lp.num_rows() == 0) {
    // Bounds only: each column sits at whichever bound minimizes its cost.
    LpSolution out;
    out.status = LpStatus::kOptimal;
    out.values.resize(lp.num_columns());
    for (int j = 0; j < lp.num_columns(); ++j) {
      const double c = lp.cost(j);
      double v;
      if (c > 0) v = lp.column_lower(j);
      else if (c < 0) v = lp.column_upper(j);
      else v = std::isfinite(lp.column_lower(j)) ? lp.column_lower(j)
               : std::isfinite(lp.column_upper(j)) ? lp.column_upper(j) : 0.0;
      if (!std::isfinite(v)) {
        out.status = LpStatus::kUnbounded;
        v = 0.0;
      }
      out.values[j] = v;
      out.objective += c * v;
    }
    return out;
  }
  BoundedSimplex simplex(lp, options);
  return simplex.Run();
}

}  // namespace labelopt::lp
