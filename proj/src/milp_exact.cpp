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

// Exact routes for small or one-dimensional instances: the sorted-threshold
// sweep and the enumeration oracle.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "labelopt/error.hpp"
#include "labelopt/milp.hpp"

namespace labelopt {
namespace internal {

SweepResult SweepScores(std::span<const double> scores, const OptimizationInstance& instance,
                        int64_t error_budget, double epsilon, double scale_lower,
                        double scale_upper) {
  const int m = instance.num_rows();
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });

  SweepResult best;
  best.scale = scale_lower;
  best.manual_count = m;
  int best_prefix = 0;
  // The empty prefix needs scale * max_score <= 1.
  if (m > 0 && scores[order[0]] > 0 && scale_lower * scores[order[0]] > 1.0) {
    best.manual_count = m + 1;  // marks "not yet feasible"
  }

  int64_t agreed = 0;
  int64_t wrong = 0;
  int pos = 0;
  while (pos < m) {
    const double value = scores[order[pos]];
    if (value <= 0.0) break;  // never above the threshold
    int end = pos;
    while (end < m && scores[order[end]] == value) {
      const int row = order[end];
      if (instance.z(row)) {
        ++agreed;
        if (!instance.b(row)) ++wrong;
      }
      ++end;
    }
    if (wrong > error_budget) break;
    const double next = end < m ? scores[order[end]] : 0.0;
    // Included rows need scale*value >= 1+eps; excluded ones scale*next <= 1.
    const double lo = std::max(scale_lower, (1.0 + epsilon) / value);
    const double hi = next > 0.0 ? std::min(scale_upper, 1.0 / next) : scale_upper;
    if (lo <= hi && m - agreed < best.manual_count) {
      const double preferred = next > 0.0 ? 2.0 / (value + next) : 2.0 / value;
      double scale;
      if (preferred >= lo && preferred <= hi) {
        scale = preferred;
      } else if (std::isfinite(hi)) {
        scale = 0.5 * (lo + hi);
      } else {
        scale = lo;
      }
      best.scale = scale;
      best.manual_count = m - agreed;
      best_prefix = end;
    }
    pos = end;
  }
  if (best.manual_count > m) {
    // No threshold fits the scale bounds; the caller keeps its own fallback.
    best.manual_count = m;
    best.scale = 0.0;
    best_prefix = 0;
  }
  best.x.assign(m, 0);
  for (int k = 0; k < best_prefix; ++k) best.x[order[k]] = 1;
  return best;
}

namespace {

// Solves the dense n x n system in place; false when (near) singular.
bool SolveSquare(std::vector<double>& a, std::vector<double>& rhs, int n) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (std::abs(a[piv * n + col]) < 1e-12) return false;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(rhs[piv], rhs[col]);
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int r = 0; r < n; ++r) rhs[r] /= a[r * n + r];
  return true;
}

}  // namespace

std::optional<std::vector<double>> RealizeByVertices(
    const OptimizationInstance& instance, std::span<const int> rows,
    std::span<const uint8_t> x, const MilpConfig& config) {
  const int n = instance.num_classifiers();
  const double lower = config.omega_lower;
  const double upper = config.OmegaUpper(n);
  const double eps = config.epsilon;
  constexpr double kTol = 1e-9;

  // Hyperplanes: every row constraint at its bound, then the box faces.
  struct Plane {
    std::vector<double> a;
    double rhs;
  };
  std::vector<Plane> planes;
  for (size_t k = 0; k < rows.size(); ++k) {
    const auto theta = instance.theta(rows[k]);
    planes.push_back({{theta.begin(), theta.end()}, x[k] ? 1.0 + eps : 1.0});
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    planes.push_back({e, lower});
    planes.push_back({e, upper});
  }
  auto feasible = [&](const std::vector<double>& w) {
    for (int j = 0; j < n; ++j) {
      if (w[j] < lower - kTol || w[j] > upper + kTol) return false;
    }
    for (size_t k = 0; k < rows.size(); ++k) {
      const auto theta = instance.theta(rows[k]);
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += theta[j] * w[j];
      if (x[k] ? s < 1.0 + eps - kTol : s > 1.0 + kTol) return false;
    }
    return true;
  };

  const int p = static_cast<int>(planes.size());
  // Odometer over strictly increasing n-subsets of the planes.
  std::vector<int> pick(n);
  std::iota(pick.begin(), pick.end(), 0);
  if (n > p) return std::nullopt;
  std::vector<double> a(static_cast<size_t>(n) * n);
  std::vector<double> rhs(n);
  while (true) {
    for (int r = 0; r < n; ++r) {
      std::copy(planes[pick[r]].a.begin(), planes[pick[r]].a.end(), a.begin() + r * n);
      rhs[r] = planes[pick[r]].rhs;
    }
    if (SolveSquare(a, rhs, n) && feasible(rhs)) return rhs;
    int k = n - 1;
    while (k >= 0 && pick[k] == p - n + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int r = k + 1; r < n; ++r) pick[r] = pick[r - 1] + 1;
  }
  return std::nullopt;
}

}  // namespace internal

MilpSolution Solve1D(const OptimizationInstance& instance, const MilpConfig& config) {
  Require(instance.num_classifiers() == 1, ErrorCode::kInvalidArgument,
          "the threshold sweep needs exactly one classifier");
  instance.Validate();
  config.Validate(instance);
  const int m = instance.num_rows();
  std::vector<double> scores(m);
  for (int i = 0; i < m; ++i) scores[i] = instance.theta(i)[0];
  auto sweep = internal::SweepScores(scores, instance, config.ErrorBudget(m), config.epsilon,
                                     std::max(0.0, config.omega_lower), config.OmegaUpper(1));
  MilpSolution out;
  out.omega = {sweep.scale};
  out.x = std::move(sweep.x);
  out.manual_count = sweep.manual_count;
  out.lower_bound = static_cast<double>(sweep.manual_count);
  out.gap = 0.0;
  out.status = MilpStatus::kOptimal;
  return out;
}

MilpSolution BruteForce(const OptimizationInstance& instance, const MilpConfig& config) {
  instance.Validate();
  config.Validate(instance);
  const int m = instance.num_rows();
  Require(m <= 20, ErrorCode::kInvalidArgument, "brute force refuses m > 20");
  const int64_t budget = config.ErrorBudget(m);

  std::vector<int> agreed_rows;
  std::vector<int> other_rows;
  for (int i = 0; i < m; ++i) (instance.z(i) ? agreed_rows : other_rows).push_back(i);
  const int pa = static_cast<int>(agreed_rows.size());
  const int po = static_cast<int>(other_rows.size());

  // Candidate assignments of the agreed rows, best objective first.
  struct Candidate {
    int count;
    uint32_t mask;
  };
  std::vector<Candidate> candidates;
  for (uint32_t mask = 0; mask < (1u << pa); ++mask) {
    int count = 0;
    int64_t wrong = 0;
    for (int k = 0; k < pa; ++k) {
      if (mask >> k & 1u) {
        ++count;
        if (!instance.b(agreed_rows[k])) ++wrong;
      }
    }
    if (wrong <= budget) candidates.push_back({count, mask});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.count > b.count; });

  std::vector<int> all_rows(m);
  std::iota(all_rows.begin(), all_rows.end(), 0);
  for (const Candidate& cand : candidates) {
    std::vector<uint8_t> xa(pa);
    for (int k = 0; k < pa; ++k) xa[k] = (cand.mask >> k) & 1u;
    auto witness = internal::RealizeByVertices(instance, agreed_rows, xa, config);
    if (!witness) continue;
    std::vector<uint8_t> x(m, 0);
    for (int k = 0; k < pa; ++k) x[agreed_rows[k]] = xa[k];
    // The disagreeing rows only need some consistent value; try the one the
    // witness implies, then every other assignment.
    bool dead_zone = false;
    for (int i : other_rows) {
      double s = 0.0;
      const auto theta = instance.theta(i);
      for (int j = 0; j < instance.num_classifiers(); ++j) s += theta[j] * (*witness)[j];
      if (s > 1.0 && s < 1.0 + config.epsilon) dead_zone = true;
      x[i] = s > 1.0 ? 1 : 0;
    }
    std::optional<std::vector<double>> found;
    if (!dead_zone) {
      found = witness;
    } else {
      for (uint32_t omask = 0; omask < (1u << po) && !found; ++omask) {
        for (int k = 0; k < po; ++k) x[other_rows[k]] = (omask >> k) & 1u;
        found = internal::RealizeByVertices(instance, all_rows, x, config);
      }
    }
    if (!found) continue;
    MilpSolution out;
    out.omega = std::move(*found);
    out.x = std::move(x);
    out.manual_count = m - cand.count;
    out.lower_bound = static_cast<double>(out.manual_count);
    out.status = MilpStatus::kOptimal;
    return out;
  }
  // Unreachable while the all-manual assignment stays realizable.
  Fail(ErrorCode::kFailedPrecondition, "no realizable indicator vector found");
}

}  // namespace labelopt
