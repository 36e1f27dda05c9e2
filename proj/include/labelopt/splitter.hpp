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

#ifndef LABELOPT_SPLITTER_HPP_
#define LABELOPT_SPLITTER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "labelopt/core.hpp"

namespace labelopt {

using Points = std::vector<std::vector<double>>;

inline constexpr int kNoise = -1;

// Cluster index per point, in input order; kNoise for noise points.
struct Clustering {
  std::vector<int> assignment;
  int num_clusters = 0;

  size_t noise_count() const;
  // Members per cluster (ascending index), with noise as a trailing group
  // when present.
  std::vector<std::vector<size_t>> Groups() const;
};

// Static k-d tree over a point set; queries return indices in ascending
// order so callers see the same sequence as an exhaustive scan.
class KdTree {
 public:
  explicit KdTree(const Points& points);

  // Indices with squared distance <= radius^2, the query point included.
  std::vector<size_t> Radius(size_t query, double radius) const;
  // Distance from point `query` to its k-th nearest other point.
  double KthNeighborDistance(size_t query, int k) const;

 private:
  struct Node {
    size_t begin = 0, end = 0;  // range in order_
    int axis = -1;              // -1 for leaves
    double split = 0.0;
    int left = -1, right = -1;
  };
  int Build(size_t begin, size_t end, int depth);

  const Points& points_;
  size_t dim_ = 0;
  std::vector<size_t> order_;
  std::vector<Node> nodes_;
};

double SquaredDistance(std::span<const double> a, std::span<const double> b);

// Core points have at least min_pts points (themselves included) within
// distance eps. Points are visited in input order; a border point joins the
// first cluster that reaches it.
Clustering Dbscan(const Points& points, double eps, int min_pts);

// 90th percentile (linear interpolation) of the distance from each point to
// its k-th nearest neighbour.
double EstimateEps(const Points& points, int k);

// Round-robin over clusters (noise as one pseudo-cluster), one uniformly
// random unseen member per cluster per pass. Returns point indices, sorted.
std::vector<size_t> DiversifiedSample(const Clustering& clustering, size_t count, uint64_t seed);

struct SplitConfig {
  double h_initial = 0.15;
  int64_t s_max = 1000;
  uint64_t seed = 0;
  std::optional<double> dbscan_eps;
  int dbscan_min_pts = 4;

  void Validate() const;
};

struct SplitCounts {
  size_t sample = 0;  // |dT u dO|
  size_t s = 0;       // |dO|
};

// |dT u dO| = round-half-up(h |D|), s = min(s_max, floor(h |D| / 2)).
SplitCounts ComputeSplitCounts(size_t dataset_size, double h, int64_t s_max);

struct Partition {
  std::vector<std::string> d_t;
  std::vector<std::string> d_o;
  std::vector<std::string> d_prime;
};

// Clustering used by Split: DBSCAN on the features when every element has
// them and there are more than min_pts points, otherwise one cluster.
Clustering ClusterDataset(const Dataset& dataset, const SplitConfig& config);

// Ids in every set follow dataset order.
Partition Split(const Dataset& dataset, const SplitConfig& config);

}  // namespace labelopt

#endif  // LABELOPT_SPLITTER_HPP_
