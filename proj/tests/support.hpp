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

// Helpers and reference implementations shared by the tests. The oracles
// here are deliberately naive and share no code with the library.

#ifndef LABELOPT_TESTS_SUPPORT_HPP_
#define LABELOPT_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "labelopt/core.hpp"
#include "labelopt/milp.hpp"
#include "labelopt/rng.hpp"

namespace labelopt::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("labelopt-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string Id(size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "e%04zu", i);
  return buf;
}

// Dataset with ids e0000.. and the given truth labels (indices into the
// alphabet); features optional.
inline std::shared_ptr<const Dataset> MakeDataset(const std::vector<LabelId>& truth,
                                                  const LabelAlphabet& alphabet,
                                                  const std::vector<std::vector<double>>& features = {}) {
  std::vector<Element> elements;
  for (size_t i = 0; i < truth.size(); ++i) {
    Element e;
    e.id = Id(i);
    if (!features.empty()) e.features = features[i];
    if (truth[i] >= 0) e.truth = truth[i];
    elements.push_back(std::move(e));
  }
  return std::make_shared<const Dataset>(std::move(elements), alphabet);
}

inline LabelAlphabet AB() { return LabelAlphabet({"A", "B"}); }

// Random optimization instance: z with probability pz, b given z with
// probability pb, confidences uniform in (0,1].
inline OptimizationInstance RandomInstance(Rng& rng, int n, int m, double pz = 0.7,
                                           double pb = 0.8) {
  OptimizationInstance instance(n);
  std::vector<double> theta(n);
  for (int i = 0; i < m; ++i) {
    for (double& t : theta) t = 1.0 - rng.Uniform01();
    const bool z = rng.Uniform01() < pz;
    const bool b = z && rng.Uniform01() < pb;
    instance.AddRow(theta, z, b);
  }
  return instance;
}

// Rows with the given single-classifier confidences.
inline OptimizationInstance Instance1D(const std::vector<double>& theta, const std::vector<int>& z,
                                       const std::vector<int>& b) {
  OptimizationInstance instance(1);
  for (size_t i = 0; i < theta.size(); ++i) {
    const double t[1] = {theta[i]};
    instance.AddRow(t, z[i] != 0, b[i] != 0);
  }
  return instance;
}

// Single classifier: the auto set for any weight is a prefix of the rows
// sorted by confidence (ties together). A prefix whose smallest value is a
// and the next value c is realizable iff a >= (1+eps) c and the weight
// (1+eps)/a fits under the upper bound.
inline int64_t SortedSweepManual(const OptimizationInstance& instance, double alpha,
                                 double big_m = 1e6, double eps = 1e-6) {
  const int m = instance.num_rows();
  const double upper = big_m - 1.0;
  const auto budget = static_cast<int64_t>(std::floor(m * (1.0 - alpha) + 1e-9));
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return instance.theta(a)[0] > instance.theta(b)[0]; });
  int64_t best = m;
  int64_t covered = 0, errors = 0;
  int k = 0;
  while (k < m) {
    int end = k;
    const double value = instance.theta(order[k])[0];
    while (end < m && instance.theta(order[end])[0] == value) {
      covered += instance.z(order[end]) ? 1 : 0;
      errors += (instance.z(order[end]) && !instance.b(order[end])) ? 1 : 0;
      ++end;
    }
    k = end;
    if (errors > budget) break;
    const bool separated = k == m || value >= (1.0 + eps) * instance.theta(order[k])[0];
    const bool fits = (1.0 + eps) / value <= upper;
    if (separated && fits) best = std::min(best, m - covered);
  }
  return best;
}

// O(m^2) DBSCAN straight from the definition: core points are expanded
// breadth first in input order; border points join the first cluster
// reaching them.
inline std::vector<int> NaiveDbscan(const std::vector<std::vector<double>>& points, double eps,
                                    int min_pts) {
  const size_t m = points.size();
  auto close = [&](size_t a, size_t b) {
    double s = 0.0;
    for (size_t d = 0; d < points[a].size(); ++d) {
      const double diff = points[a][d] - points[b][d];
      s += diff * diff;
    }
    return s <= eps * eps;
  };
  std::vector<std::vector<size_t>> neighbours(m);
  for (size_t a = 0; a < m; ++a) {
    for (size_t b = 0; b < m; ++b) {
      if (close(a, b)) neighbours[a].push_back(b);
    }
  }
  std::vector<int> label(m, -2);  // -2 unvisited, -1 noise
  int cluster = 0;
  for (size_t p = 0; p < m; ++p) {
    if (label[p] != -2) continue;
    if (static_cast<int>(neighbours[p].size()) < min_pts) {
      label[p] = -1;
      continue;
    }
    label[p] = cluster;
    std::vector<size_t> frontier(neighbours[p]);
    for (size_t f = 0; f < frontier.size(); ++f) {
      const size_t q = frontier[f];
      if (label[q] == -1) label[q] = cluster;
      if (label[q] != -2) continue;
      label[q] = cluster;
      if (static_cast<int>(neighbours[q].size()) >= min_pts) {
        for (size_t r : neighbours[q]) frontier.push_back(r);
      }
    }
    ++cluster;
  }
  return label;
}

// Renumbers clusters by first appearance so two labelings can be compared
// up to relabeling; noise stays -1.
inline std::vector<int> Canonical(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  for (int l : labels) {
    if (l < 0) {
      out.push_back(-1);
      continue;
    }
    auto it = remap.find(l);
    if (it == remap.end()) it = remap.emplace(l, static_cast<int>(remap.size())).first;
    out.push_back(it->second);
  }
  return out;
}

// Distance to the k-th nearest other point for every point, by full scan,
// then the 90th percentile with linear interpolation between ranks.
inline double ExhaustiveEps(const std::vector<std::vector<double>>& points, int k) {
  std::vector<double> kth;
  for (size_t a = 0; a < points.size(); ++a) {
    std::vector<double> d;
    for (size_t b = 0; b < points.size(); ++b) {
      if (a == b) continue;
      double s = 0.0;
      for (size_t j = 0; j < points[a].size(); ++j) s += (points[a][j] - points[b][j]) * (points[a][j] - points[b][j]);
      d.push_back(std::sqrt(s));
    }
    std::sort(d.begin(), d.end());
    kth.push_back(d[std::min<size_t>(k, d.size()) - 1]);
  }
  std::sort(kth.begin(), kth.end());
  const double rank = 0.9 * static_cast<double>(kth.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(rank));
  const size_t hi = std::min(lo + 1, kth.size() - 1);
  return kth[lo] + (rank - static_cast<double>(lo)) * (kth[hi] - kth[lo]);
}

}  // namespace labelopt::testing

#endif  // LABELOPT_TESTS_SUPPORT_HPP_
