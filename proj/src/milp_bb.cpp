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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "labelopt/error.hpp"
#include "labelopt/lp.hpp"
#include "labelopt/milp.hpp"

namespace labelopt {
namespace {

constexpr double kTol = 1e-9;
constexpr double kIntegralityTol = 1e-6;

enum : int8_t { kFree = -1, kZero = 0, kOne = 1 };

// Depth-first branch-and-bound over the indicators x_i.
//
// Node relaxations use the linking rows with big-M coefficients tightened to
// the node's omega box: for a free row, s - 1 <= (smax - 1) x and
// s - 1 >= -(1 + eps - smin)(1 - x) + eps are valid for both integer values
// of x and give the same integer feasible set as the user's M. Rows whose
// value is decided by the box, by dominance (omega >= 0 and componentwise
// larger confidences), or by an exhausted error budget are fixed before the
// LP is built.
class BranchAndBound {
 public:
  explicit BranchAndBound(const MilpModel& model)
      : inst_(model.source),
        cfg_(model.config),
        n_(inst_.num_classifiers()),
        m_(inst_.num_rows()),
        budget_(cfg_.ErrorBudget(m_)),
        lower_(cfg_.omega_lower),
        upper_(cfg_.OmegaUpper(n_)),
        eps_(cfg_.epsilon),
        active_(m_, 0) {
    for (int i = 0; i < m_; ++i) active_[i] = inst_.z(i) ? 1 : 0;
  }

  MilpSolution Run() {
    start_ = std::chrono::steady_clock::now();
    best_ = FallbackSolution(inst_);
    best_is_fallback_ = true;

    std::vector<double> dir(n_, 1.0);
    TryDirection(dir);
    for (int j = 0; j < n_ && n_ > 1; ++j) {
      std::fill(dir.begin(), dir.end(), 0.0);
      dir[j] = 1.0;
      TryDirection(dir);
    }

    std::vector<Node> stack;
    stack.push_back({std::vector<int8_t>(m_, kFree), 0.0});
    bool stopped = false;
    double open_bound = kInfinityBound;
    while (!stack.empty()) {
      if (LimitReached()) {
        stopped = true;
        break;
      }
      Node node = std::move(stack.back());
      stack.pop_back();
      if (std::ceil(node.bound - 1e-6) >= static_cast<double>(best_.manual_count)) continue;
      ++nodes_;
      Process(std::move(node), stack);
    }
    MilpSolution out = best_;
    out.nodes = nodes_;
    out.lp_iterations = lp_iterations_;
    if (!stopped) {
      out.status = MilpStatus::kOptimal;
      out.lower_bound = static_cast<double>(best_.manual_count);
      out.gap = 0.0;
    } else {
      for (const Node& node : stack) open_bound = std::min(open_bound, node.bound);
      out.lower_bound = std::min(open_bound, static_cast<double>(best_.manual_count));
      out.gap = static_cast<double>(best_.manual_count) - std::ceil(out.lower_bound - 1e-6);
      if (out.gap <= 0.0) {
        out.gap = 0.0;
        out.status = MilpStatus::kOptimal;
        out.lower_bound = static_cast<double>(best_.manual_count);
      } else {
        out.status = best_is_fallback_ ? MilpStatus::kTrivialFallback : MilpStatus::kIncumbent;
      }
    }
    out.seconds = Elapsed();
    return out;
  }

 private:
  static constexpr double kInfinityBound = 1e300;

  struct Node {
    std::vector<int8_t> fix;
    double bound;  // lower bound on manual count inherited from the parent
  };

  double Elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  bool LimitReached() const {
    if (cfg_.node_limit && nodes_ >= *cfg_.node_limit) return true;
    if (cfg_.time_limit_seconds && Elapsed() >= *cfg_.time_limit_seconds) return true;
    return false;
  }

  double Score(int row, std::span<const double> w) const {
    const auto theta = inst_.theta(row);
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += theta[j] * w[j];
    return s;
  }

  void Offer(MilpSolution candidate) {
    if (candidate.manual_count >= best_.manual_count) return;
    if (!Verify(candidate, inst_, cfg_).ok) return;
    best_ = std::move(candidate);
    best_is_fallback_ = false;
  }

  // Rounds along the ray through `dir`: the best threshold on the projected
  // scores is found exactly by the one-dimensional sweep.
  void TryDirection(std::span<const double> dir) {
    double scale_upper = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int j = 0; j < n_; ++j) {
      if (dir[j] < 0.0) return;
      if (dir[j] > 0.0) {
        any = true;
        scale_upper = std::min(scale_upper, upper_ / dir[j]);
      }
    }
    if (!any) return;
    std::vector<double> scores(m_);
    for (int i = 0; i < m_; ++i) scores[i] = Score(i, dir);
    auto sweep = internal::SweepScores(scores, inst_, budget_, eps_, 0.0, scale_upper);
    if (sweep.manual_count >= best_.manual_count) return;
    MilpSolution cand;
    cand.omega.resize(n_);
    for (int j = 0; j < n_; ++j) cand.omega[j] = sweep.scale * dir[j];
    cand.x = std::move(sweep.x);
    cand.manual_count = sweep.manual_count;
    Offer(std::move(cand));
  }

  // Fixes implied indicators and tightens the omega box; false if infeasible.
  bool Propagate(std::vector<int8_t>& fix, std::vector<double>& wlo, std::vector<double>& whi) {
    wlo.assign(n_, lower_);
    whi.assign(n_, upper_);
    const bool nonnegative = lower_ >= 0.0;
    for (int round = 0; round < 50; ++round) {
      bool changed = false;
      int64_t wrong_on = 0;
      for (int i = 0; i < m_; ++i) {
        if (active_[i] && fix[i] == kOne && inst_.z(i) && !inst_.b(i)) ++wrong_on;
      }
      if (wrong_on > budget_) return false;
      if (wrong_on == budget_) {
        for (int i = 0; i < m_; ++i) {
          if (active_[i] && fix[i] == kFree && inst_.z(i) && !inst_.b(i)) {
            fix[i] = kZero;
            changed = true;
          }
        }
      }
      // Box tightening from fixed rows.
      for (int i = 0; i < m_; ++i) {
        if (!active_[i] || fix[i] == kFree) continue;
        const auto a = inst_.theta(i);
        if (fix[i] == kZero) {
          double base = 0.0;
          for (int j = 0; j < n_; ++j) base += a[j] * wlo[j];
          for (int j = 0; j < n_; ++j) {
            const double cap = (1.0 - (base - a[j] * wlo[j])) / a[j];
            if (cap < whi[j] - kTol) {
              whi[j] = cap;
              changed = true;
            }
          }
        } else {
          double base = 0.0;
          for (int j = 0; j < n_; ++j) base += a[j] * whi[j];
          for (int j = 0; j < n_; ++j) {
            const double floor = (1.0 + eps_ - (base - a[j] * whi[j])) / a[j];
            if (floor > wlo[j] + kTol) {
              wlo[j] = floor;
              changed = true;
            }
          }
        }
      }
      for (int j = 0; j < n_; ++j) {
        if (wlo[j] > whi[j] + kTol) return false;
        if (wlo[j] > whi[j]) whi[j] = wlo[j];
      }
      for (int i = 0; i < m_; ++i) {
        if (!active_[i]) continue;
        const auto a = inst_.theta(i);
        double smin = 0.0, smax = 0.0;
        for (int j = 0; j < n_; ++j) {
          smin += a[j] * wlo[j];
          smax += a[j] * whi[j];
        }
        const bool can_be_one = smax >= 1.0 + eps_ - kTol;
        const bool can_be_zero = smin <= 1.0 + kTol;
        if (!can_be_one && !can_be_zero) return false;
        if (fix[i] == kOne && !can_be_one) return false;
        if (fix[i] == kZero && !can_be_zero) return false;
        if (fix[i] == kFree) {
          if (!can_be_one) {
            fix[i] = kZero;
            changed = true;
          } else if (!can_be_zero) {
            fix[i] = kOne;
            changed = true;
          }
        }
      }
      if (nonnegative) changed |= PropagateDominance(fix);
      if (!changed) break;
    }
    return true;
  }

  // With omega >= 0, a row dominating an auto row is auto, and a row dominated
  // by a manual row is manual.
  bool PropagateDominance(std::vector<int8_t>& fix) {
    std::vector<int> ones, zeros;
    for (int i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      if (fix[i] == kOne) ones.push_back(i);
      else if (fix[i] == kZero) zeros.push_back(i);
    }
    if (ones.empty() && zeros.empty()) return false;
    bool changed = false;
    for (int i = 0; i < m_; ++i) {
      if (!active_[i] || fix[i] != kFree) continue;
      const auto a = inst_.theta(i);
      for (int k : ones) {
        const auto t = inst_.theta(k);
        bool dominates = true;
        for (int j = 0; j < n_ && dominates; ++j) dominates = a[j] >= t[j];
        if (dominates) {
          fix[i] = kOne;
          changed = true;
          break;
        }
      }
      if (fix[i] != kFree) continue;
      for (int k : zeros) {
        const auto t = inst_.theta(k);
        bool dominated = true;
        for (int j = 0; j < n_ && dominated; ++j) dominated = a[j] <= t[j];
        if (dominated) {
          fix[i] = kZero;
          changed = true;
          break;
        }
      }
    }
    return changed;
  }

  void Process(Node node, std::vector<Node>& stack) {
    std::vector<double> wlo, whi;
    if (!Propagate(node.fix, wlo, whi)) return;

    // Counting bound before paying for an LP.
    int64_t auto_fixed = 0, free_good = 0, free_wrong = 0, wrong_on = 0;
    for (int i = 0; i < m_; ++i) {
      if (!active_[i] || !inst_.z(i)) continue;
      if (node.fix[i] == kOne) {
        ++auto_fixed;
        if (!inst_.b(i)) ++wrong_on;
      } else if (node.fix[i] == kFree) {
        (inst_.b(i) ? free_good : free_wrong)++;
      }
    }
    const int64_t optimistic =
        m_ - auto_fixed - free_good - std::min(free_wrong, budget_ - wrong_on);
    if (optimistic >= best_.manual_count) return;

    while (true) {
      lp::LinearProgram lp;
      for (int j = 0; j < n_; ++j) lp.AddColumn(0.0, wlo[j], whi[j]);
      std::vector<int> col_of(m_, -1);
      std::vector<std::pair<int, double>> terms;
      std::vector<std::pair<int, double>> acc_terms;
      for (int i = 0; i < m_; ++i) {
        if (!active_[i]) continue;
        const auto a = inst_.theta(i);
        double smin = 0.0, smax = 0.0;
        for (int j = 0; j < n_; ++j) {
          smin += a[j] * wlo[j];
          smax += a[j] * whi[j];
        }
        terms.clear();
        for (int j = 0; j < n_; ++j) terms.emplace_back(j, a[j]);
        if (node.fix[i] == kFree) {
          const int col = lp.AddColumn(inst_.z(i) ? -1.0 : 0.0, 0.0, 1.0);
          col_of[i] = col;
          const double m_hi = std::max(smax - 1.0, eps_);
          const double m_lo = std::max(1.0 + eps_ - smin, eps_);
          terms.emplace_back(col, -m_hi);
          lp.AddRow(-lp::kInfinity, 1.0, terms);
          terms.back().second = -m_lo;
          lp.AddRow(1.0 + eps_ - m_lo, lp::kInfinity, terms);
          if (inst_.z(i) && !inst_.b(i)) acc_terms.emplace_back(col, 1.0);
        } else if (node.fix[i] == kZero && smax > 1.0) {
          lp.AddRow(-lp::kInfinity, 1.0, terms);
        } else if (node.fix[i] == kOne && smin < 1.0 + eps_) {
          lp.AddRow(1.0 + eps_, lp::kInfinity, terms);
        }
      }
      if (static_cast<int64_t>(acc_terms.size()) > budget_ - wrong_on) {
        lp.AddRow(-lp::kInfinity, static_cast<double>(budget_ - wrong_on), acc_terms);
      }
      const lp::LpSolution sol = lp::SolveLp(lp);
      lp_iterations_ += sol.iterations;
      if (sol.status == lp::LpStatus::kInfeasible) return;

      std::vector<double> w(n_);
      double bound = node.bound;
      bool usable = sol.status == lp::LpStatus::kOptimal;
      if (usable) {
        for (int j = 0; j < n_; ++j) w[j] = std::clamp(sol.values[j], wlo[j], whi[j]);
        bound = std::max(bound, static_cast<double>(m_ - auto_fixed) + sol.objective);
        if (std::ceil(bound - 1e-6) >= static_cast<double>(best_.manual_count)) return;
        TryDirection(w);
        if (std::ceil(bound - 1e-6) >= static_cast<double>(best_.manual_count)) return;
      }

      // Pick the branching row: fractional LP value (or a value inconsistent
      // with the LP omega), closest to one half, lowest index on ties.
      int branch = -1;
      double branch_value = 0.0;
      double best_distance = 2.0;
      for (int i = 0; i < m_; ++i) {
        if (col_of[i] < 0) continue;
        double v = usable ? sol.values[col_of[i]] : 0.5;
        const double rounded = std::round(v);
        bool integral = std::abs(v - rounded) <= kIntegralityTol;
        if (integral) {
          const double s = Score(i, w);
          integral = rounded > 0.5 ? s >= 1.0 + 0.5 * eps_ : s <= 1.0 + 0.5 * eps_;
          if (!integral) v = 0.5;
        }
        if (integral) continue;
        const double distance = std::abs(v - 0.5);
        if (distance < best_distance) {
          best_distance = distance;
          branch = i;
          branch_value = v;
        }
      }
      if (branch >= 0) {
        const int8_t first = branch_value >= 0.5 ? kOne : kZero;
        Node other{node.fix, bound};
        other.fix[branch] = static_cast<int8_t>(1 - first);
        node.fix[branch] = first;
        node.bound = bound;
        stack.push_back(std::move(other));
        stack.push_back(std::move(node));
        return;
      }

      // Integral relaxation: complete x from omega for the rows left out of
      // the LP. A disagreeing row caught in the epsilon band joins the model.
      MilpSolution cand;
      cand.omega = w;
      cand.x.assign(m_, 0);
      bool activated = false;
      int64_t agreed_auto = 0;
      for (int i = 0; i < m_; ++i) {
        uint8_t xi;
        if (active_[i]) {
          xi = node.fix[i] == kFree ? static_cast<uint8_t>(std::round(sol.values[col_of[i]]))
                                    : static_cast<uint8_t>(node.fix[i]);
        } else {
          const double s = Score(i, w);
          if (s > 1.0 + kTol && s < 1.0 + eps_ - kTol) {
            active_[i] = 1;
            activated = true;
            continue;
          }
          xi = s > 1.0 + 0.5 * eps_ ? 1 : 0;
        }
        cand.x[i] = xi;
        if (xi && inst_.z(i)) ++agreed_auto;
      }
      if (activated) continue;
      cand.manual_count = m_ - agreed_auto;
      Offer(std::move(cand));
      return;
    }
  }

  const OptimizationInstance& inst_;
  const MilpConfig& cfg_;
  const int n_;
  const int m_;
  const int64_t budget_;
  const double lower_;
  const double upper_;
  const double eps_;
  std::vector<uint8_t> active_;
  MilpSolution best_;
  bool best_is_fallback_ = true;
  int64_t nodes_ = 0;
  int64_t lp_iterations_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

MilpSolution SolveBranchAndBound(const MilpModel& model) {
  const OptimizationInstance& inst = model.source;
  Require(inst.num_rows() == model.num_rows && inst.num_classifiers() == model.num_classifiers &&
              static_cast<int>(model.variables.size()) == model.num_classifiers + model.num_rows &&
              static_cast<int>(model.constraints.size()) == 2 * model.num_rows + 1,
          ErrorCode::kInvalidArgument, "model is not a formulated labelling program");
  inst.Validate();
  model.config.Validate(inst);
  BranchAndBound solver(model);
  return solver.Run();
}

}  // namespace labelopt
