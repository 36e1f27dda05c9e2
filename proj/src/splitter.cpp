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

#include "labelopt/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "labelopt/error.hpp"
#include "labelopt/rng.hpp"

namespace labelopt {

namespace {

constexpr size_t kLeafSize = 16;

void CheckPoints(const Points& points) {
  if (points.empty()) return;
  const size_t d = points[0].size();
  Require(d > 0, ErrorCode::kDimensionMismatch, "points have no coordinates");
  for (size_t i = 0; i < points.size(); ++i) {
    Require(points[i].size() == d, ErrorCode::kDimensionMismatch,
            "point " + std::to_string(i) + " has dimension " + std::to_string(points[i].size()) +
                ", expected " + std::to_string(d));
    for (double v : points[i]) {
      Require(std::isfinite(v), ErrorCode::kInvalidArgument, "non-finite coordinate");
    }
  }
}

}  // namespace

size_t Clustering::noise_count() const {
  return static_cast<size_t>(std::count(assignment.begin(), assignment.end(), kNoise));
}

std::vector<std::vector<size_t>> Clustering::Groups() const {
  std::vector<std::vector<size_t>> groups(num_clusters);
  std::vector<size_t> noise;
  for (size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == kNoise) {
      noise.push_back(i);
    } else {
      groups[assignment[i]].push_back(i);
    }
  }
  if (!noise.empty()) groups.push_back(std::move(noise));
  return groups;
}

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return sum;
}

KdTree::KdTree(const Points& points) : points_(points) {
  CheckPoints(points);
  dim_ = points.empty() ? 0 : points[0].size();
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), size_t{0});
  if (!points.empty()) Build(0, points.size(), 0);
}

int KdTree::Build(size_t begin, size_t end, int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;
  // Split on the axis of largest spread.
  size_t axis = 0;
  double best_spread = -1.0;
  for (size_t k = 0; k < dim_; ++k) {
    double lo = points_[order_[begin]][k], hi = lo;
    for (size_t i = begin + 1; i < end; ++i) {
      lo = std::min(lo, points_[order_[i]][k]);
      hi = std::max(hi, points_[order_[i]][k]);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      axis = k;
    }
  }
  if (best_spread <= 0.0) return id;  // all points identical
  const size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](size_t a, size_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];
  // Left holds coordinates <= split on the axis, right holds >= split.
  nodes_[id].axis = static_cast<int>(axis);
  nodes_[id].split = split;
  const int left = Build(begin, mid, depth + 1);
  const int right = Build(mid, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<size_t> KdTree::Radius(size_t query, double radius) const {
  std::vector<size_t> out;
  if (points_.empty()) return out;
  const auto& q = points_[query];
  const double r2 = radius * radius;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.axis < 0) {
      for (size_t i = node.begin; i < node.end; ++i) {
        if (SquaredDistance(q, points_[order_[i]]) <= r2) out.push_back(order_[i]);
      }
      continue;
    }
    // A term of the squared distance never exceeds the whole sum, and
    // rounding is monotone, so pruning on one axis is exact.
    const double diff = q[node.axis] - node.split;
    if (diff <= 0.0 || diff * diff <= r2) stack.push_back(node.left);
    if (diff >= 0.0 || diff * diff <= r2) stack.push_back(node.right);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double KdTree::KthNeighborDistance(size_t query, int k) const {
  Require(k >= 1 && static_cast<size_t>(k) < points_.size(), ErrorCode::kInvalidArgument,
          "need more than k points");
  const auto& q = points_[query];
  std::priority_queue<double> best;  // k smallest squared distances
  std::vector<int> stack{0};
  auto bound = [&] {
    return best.size() < static_cast<size_t>(k) ? std::numeric_limits<double>::infinity()
                                                 : best.top();
  };
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.axis < 0) {
      for (size_t i = node.begin; i < node.end; ++i) {
        if (order_[i] == query) continue;
        const double d2 = SquaredDistance(q, points_[order_[i]]);
        if (best.size() < static_cast<size_t>(k)) {
          best.push(d2);
        } else if (d2 < best.top()) {
          best.pop();
          best.push(d2);
        }
      }
      continue;
    }
    const double diff = q[node.axis] - node.split;
    const int near = diff <= 0.0 ? node.left : node.right;
    const int far = diff <= 0.0 ? node.right : node.left;
    // Far side first on the stack so the near side is explored first.
    if (diff * diff <= bound()) stack.push_back(far);
    stack.push_back(near);
  }
  return std::sqrt(best.top());
}

Clustering Dbscan(const Points& points, double eps, int min_pts) {
  Require(eps > 0.0, ErrorCode::kInvalidArgument, "eps must be positive");
  Require(min_pts >= 1, ErrorCode::kInvalidArgument, "minPts must be positive");
  Clustering result;
  if (points.empty()) return result;
  const KdTree tree(points);
  constexpr int kUnvisited = -2;
  result.assignment.assign(points.size(), kUnvisited);
  for (size_t p = 0; p < points.size(); ++p) {
    if (result.assignment[p] != kUnvisited) continue;
    const std::vector<size_t> seeds = tree.Radius(p, eps);
    if (seeds.size() < static_cast<size_t>(min_pts)) {
      result.assignment[p] = kNoise;
      continue;
    }
    const int cluster = result.num_clusters++;
    result.assignment[p] = cluster;
    std::queue<size_t> frontier;
    for (size_t q : seeds) frontier.push(q);
    while (!frontier.empty()) {
      const size_t q = frontier.front();
      frontier.pop();
      if (result.assignment[q] == kNoise) result.assignment[q] = cluster;
      if (result.assignment[q] != kUnvisited) continue;
      result.assignment[q] = cluster;
      const std::vector<size_t> reach = tree.Radius(q, eps);
      if (reach.size() >= static_cast<size_t>(min_pts)) {
        for (size_t r : reach) {
          if (result.assignment[r] == kUnvisited || result.assignment[r] == kNoise) frontier.push(r);
        }
      }
    }
  }
  return result;
}

double EstimateEps(const Points& points, int k) {
  Require(k >= 1, ErrorCode::kInvalidArgument, "k must be positive");
  Require(points.size() > static_cast<size_t>(k), ErrorCode::kInvalidArgument,
          "estimate_eps needs more than k = " + std::to_string(k) + " points");
  const KdTree tree(points);
  std::vector<double> dist(points.size());
  for (size_t i = 0; i < points.size(); ++i) dist[i] = tree.KthNeighborDistance(i, k);
  std::sort(dist.begin(), dist.end());
  const double pos = 0.9 * static_cast<double>(dist.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, dist.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  const double eps = dist[lo] + frac * (dist[hi] - dist[lo]);
  Require(eps > 0.0, ErrorCode::kInvalidArgument,
          "k-distance percentile is zero (too many duplicate points); set eps explicitly");
  return eps;
}

std::vector<size_t> DiversifiedSample(const Clustering& clustering, size_t count, uint64_t seed) {
  Require(count <= clustering.assignment.size(), ErrorCode::kInvalidArgument,
          "sample of " + std::to_string(count) + " exceeds population of " +
              std::to_string(clustering.assignment.size()));
  std::vector<std::vector<size_t>> groups = clustering.Groups();
  Rng rng(seed);
  for (auto& group : groups) rng.Shuffle(std::span<size_t>(group));
  std::vector<size_t> out;
  out.reserve(count);
  for (size_t pass = 0; out.size() < count; ++pass) {
    for (const auto& group : groups) {
      if (out.size() == count) break;
      if (pass < group.size()) out.push_back(group[pass]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void SplitConfig::Validate() const {
  Require(h_initial > 0.0 && h_initial < 1.0, ErrorCode::kConfig, "hInitial must lie in (0,1)");
  Require(s_max >= 1, ErrorCode::kConfig, "sMax must be at least 1");
  Require(dbscan_min_pts >= 1, ErrorCode::kConfig, "dbscanMinPts must be at least 1");
  Require(!dbscan_eps || *dbscan_eps > 0.0, ErrorCode::kConfig, "dbscanEps must be positive");
}

SplitCounts ComputeSplitCounts(size_t dataset_size, double h, int64_t s_max) {
  // The small tolerance keeps products such as 0.15 * 1000 = 150.00000000000003
  // or 0.29 * 100 = 28.999999999999996 on their intended integer.
  const double target = h * static_cast<double>(dataset_size);
  SplitCounts counts;
  counts.sample = static_cast<size_t>(std::floor(target + 0.5 + 1e-9));
  const auto half = static_cast<int64_t>(std::floor(target / 2.0 + 1e-9));
  counts.s = static_cast<size_t>(std::min(s_max, half));
  counts.sample = std::min(counts.sample, dataset_size);
  return counts;
}

Clustering ClusterDataset(const Dataset& dataset, const SplitConfig& config) {
  Clustering single;
  single.assignment.assign(dataset.size(), 0);
  single.num_clusters = 1;
  if (!dataset.has_features() || dataset.size() <= static_cast<size_t>(config.dbscan_min_pts)) {
    return single;
  }
  Points points;
  points.reserve(dataset.size());
  for (const Element& e : dataset.elements()) points.push_back(*e.features);
  const double eps = config.dbscan_eps ? *config.dbscan_eps
                                       : EstimateEps(points, config.dbscan_min_pts);
  return Dbscan(points, eps, config.dbscan_min_pts);
}

Partition Split(const Dataset& dataset, const SplitConfig& config) {
  config.Validate();
  const SplitCounts counts = ComputeSplitCounts(dataset.size(), config.h_initial, config.s_max);
  Require(counts.s >= 1, ErrorCode::kConfig,
          "hInitial " + std::to_string(config.h_initial) + " is too small for " +
              std::to_string(dataset.size()) + " elements (s = 0)");
  const Clustering clustering = ClusterDataset(dataset, config);
  const std::vector<size_t> sample =
      DiversifiedSample(clustering, counts.sample, MixSeed(config.seed, 1));

  std::vector<size_t> shuffled = sample;
  Rng rng(MixSeed(config.seed, 2));
  rng.Shuffle(std::span<size_t>(shuffled));
  std::vector<uint8_t> role(dataset.size(), 0);  // 0 = D', 1 = D_t, 2 = D_o
  for (size_t k = 0; k < shuffled.size(); ++k) role[shuffled[k]] = k < counts.s ? 2 : 1;

  Partition partition;
  for (size_t i = 0; i < dataset.size(); ++i) {
    const std::string& id = dataset.element(i).id;
    if (role[i] == 1) {
      partition.d_t.push_back(id);
    } else if (role[i] == 2) {
      partition.d_o.push_back(id);
    } else {
      partition.d_prime.push_back(id);
    }
  }
  return partition;
}

}  // namespace labelopt
