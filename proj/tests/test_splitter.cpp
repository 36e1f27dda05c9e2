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
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "labelopt/error.hpp"
#include "labelopt/rng.hpp"
#include "labelopt/splitter.hpp"
#include "support.hpp"

using namespace labelopt;
using labelopt::testing::Canonical;

namespace {

Points Blob(Rng& rng, double cx, double cy, double spread, int count) {
  Points p;
  for (int i = 0; i < count; ++i) p.push_back({cx + rng.Uniform(-spread, spread), cy + rng.Uniform(-spread, spread)});
  return p;
}

Clustering Sized(const std::vector<int>& sizes) {
  Clustering c;
  for (size_t k = 0; k < sizes.size(); ++k) {
    for (int i = 0; i < sizes[k]; ++i) c.assignment.push_back(static_cast<int>(k));
  }
  c.num_clusters = static_cast<int>(sizes.size());
  return c;
}

std::map<int, int> PerCluster(const Clustering& c, const std::vector<size_t>& sample) {
  std::map<int, int> out;
  for (size_t i : sample) ++out[c.assignment[i]];
  return out;
}

std::shared_ptr<const Dataset> Plain(size_t size) {
  return testing::MakeDataset(std::vector<LabelId>(size, 0), testing::AB());
}

}  // namespace

TEST_CASE("dbscan on two distant blobs") {
  Rng rng(1);
  Points p = Blob(rng, 0, 0, 0.1, 20);
  const Points q = Blob(rng, 10, 10, 0.1, 20);
  p.insert(p.end(), q.begin(), q.end());
  const Clustering c = Dbscan(p, 0.5, 3);
  CHECK(c.num_clusters == 2);
  CHECK(c.noise_count() == 0);
  CHECK(c.assignment[0] != c.assignment[20]);
}

TEST_CASE("dbscan edge cases") {
  const Clustering single = Dbscan(Points{{1.0, 2.0}}, 1.0, 2);
  CHECK(single.assignment == std::vector<int>{kNoise});
  const Clustering empty = Dbscan(Points{}, 1.0, 2);
  CHECK(empty.assignment.empty());
  CHECK(empty.num_clusters == 0);
  CHECK_THROWS_AS(Dbscan(Points{{1.0}, {1.0, 2.0}}, 1.0, 2), Error);
}

TEST_CASE("dbscan matches the quadratic reference on the unit square") {
  Rng rng(2);
  Points p;
  for (int i = 0; i < 100; ++i) p.push_back({rng.Uniform01(), rng.Uniform01()});
  CHECK(Canonical(Dbscan(p, 0.2, 4).assignment) == Canonical(testing::NaiveDbscan(p, 0.2, 4)));
}

TEST_CASE("dbscan matches the quadratic reference on mixed data") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 1 + static_cast<int>(rng.Index(4));
    const int m = 50 + static_cast<int>(rng.Index(300));
    Points p;
    for (int i = 0; i < m; ++i) {
      std::vector<double> v(dim);
      const double center = static_cast<double>(rng.Index(3)) * 3.0;
      for (double& x : v) x = center + rng.Normal();
      p.push_back(v);
    }
    const double eps = rng.Uniform(0.3, 1.2);
    const int min_pts = 2 + static_cast<int>(rng.Index(6));
    CHECK(Canonical(Dbscan(p, eps, min_pts).assignment) ==
          Canonical(testing::NaiveDbscan(p, eps, min_pts)));
  }
}

TEST_CASE("dbscan partition does not depend on input order when borders are unambiguous") {
  Rng rng(4);
  Points p;
  for (int k = 0; k < 4; ++k) {
    const Points b = Blob(rng, 5.0 * k, -3.0 * k, 0.3, 25);
    p.insert(p.end(), b.begin(), b.end());
  }
  p.push_back({100.0, 100.0});
  std::vector<size_t> perm(p.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  rng.Shuffle(std::span<size_t>(perm));
  Points shuffled;
  for (size_t i : perm) shuffled.push_back(p[i]);
  const Clustering a = Dbscan(p, 0.5, 4);
  const Clustering b = Dbscan(shuffled, 0.5, 4);
  CHECK(a.num_clusters == b.num_clusters);
  CHECK(a.noise_count() == b.noise_count());
  for (size_t i = 0; i < p.size(); ++i) {
    for (size_t j = 0; j < p.size(); ++j) {
      const bool same_a = a.assignment[perm[i]] == a.assignment[perm[j]];
      const bool same_b = b.assignment[i] == b.assignment[j];
      CHECK(same_a == same_b);
    }
  }
}

TEST_CASE("k-distance percentile") {
  CHECK(EstimateEps(Points{{0.0}, {1.0}, {2.0}}, 1) == doctest::Approx(1.0));
  Points grid;
  for (int x = 0; x < 6; ++x) {
    for (int y = 0; y < 6; ++y) grid.push_back({0.25 * x, 0.25 * y});
  }
  CHECK(EstimateEps(grid, 1) == doctest::Approx(0.25));
  Rng rng(5);
  Points cloud;
  for (int i = 0; i < 300; ++i) cloud.push_back({rng.Normal(), rng.Normal(), rng.Normal()});
  for (int k : {1, 4, 7}) {
    CHECK(EstimateEps(cloud, k) == doctest::Approx(testing::ExhaustiveEps(cloud, k)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(EstimateEps(Points{{0.0}, {1.0}}, 2), Error);
}

TEST_CASE("diversified sampling draws evenly") {
  const Clustering three = Sized({10, 10, 10});
  auto even = PerCluster(three, DiversifiedSample(three, 6, 1));
  CHECK(even == std::map<int, int>{{0, 2}, {1, 2}, {2, 2}});
  std::vector<int> counts;
  for (auto [k, v] : PerCluster(three, DiversifiedSample(three, 7, 2))) counts.push_back(v);
  std::sort(counts.begin(), counts.end());
  CHECK(counts == std::vector<int>{2, 2, 3});

  const Clustering skewed = Sized({1, 100});
  CHECK(PerCluster(skewed, DiversifiedSample(skewed, 10, 3)) == std::map<int, int>{{0, 1}, {1, 9}});
  CHECK_THROWS_AS(DiversifiedSample(three, 31, 1), Error);

  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(rng.Index(6));
    const int size = 1 + static_cast<int>(rng.Index(20));
    const Clustering c = Sized(std::vector<int>(k, size));
    const size_t count = rng.Index(static_cast<size_t>(k * size) + 1);
    const auto sample = DiversifiedSample(c, count, trial);
    CHECK(std::set<size_t>(sample.begin(), sample.end()).size() == count);
    int lo = size, hi = 0;
    for (int cl = 0; cl < k; ++cl) {
      const int got = PerCluster(c, sample)[cl];
      lo = std::min(lo, got);
      hi = std::max(hi, got);
    }
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("split arithmetic") {
  SplitCounts a = ComputeSplitCounts(1000, 0.15, 1000);
  CHECK(a.sample == 150);
  CHECK(a.s == 75);
  SplitCounts b = ComputeSplitCounts(70000, 0.15, 1000);
  CHECK(b.s == 1000);
  CHECK(b.sample - b.s == 9500);
  SplitCounts c = ComputeSplitCounts(100, 0.2, 1000);
  CHECK(c.s == 10);
  CHECK(c.sample == 20);
}

TEST_CASE("split partitions the dataset") {
  SplitConfig cfg;
  cfg.h_initial = 0.2;
  const Partition p = Split(*Plain(100), cfg);
  CHECK(p.d_o.size() == 10);
  CHECK(p.d_t.size() == 10);
  CHECK(p.d_prime.size() == 80);

  cfg.h_initial = 0.15;
  const Partition big = Split(*Plain(70000), cfg);
  CHECK(big.d_o.size() == 1000);
  CHECK(big.d_t.size() == 9500);

  cfg.h_initial = 0.1;
  CHECK_THROWS_AS(Split(*Plain(10), cfg), Error);
}

TEST_CASE("split is a deterministic disjoint cover") {
  Rng rng(7);
  std::vector<std::vector<double>> features;
  std::vector<LabelId> truth;
  for (int i = 0; i < 400; ++i) {
    const int k = static_cast<int>(rng.Index(3));
    features.push_back({6.0 * k + rng.Normal(), rng.Normal()});
    truth.push_back(k % 2);
  }
  const auto data = testing::MakeDataset(truth, testing::AB(), features);
  for (uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    SplitConfig cfg;
    cfg.seed = seed;
    cfg.h_initial = 0.25;
    const Partition a = Split(*data, cfg);
    const Partition b = Split(*data, cfg);
    CHECK(a.d_t == b.d_t);
    CHECK(a.d_o == b.d_o);
    CHECK(a.d_prime == b.d_prime);
    std::set<std::string> all(a.d_t.begin(), a.d_t.end());
    all.insert(a.d_o.begin(), a.d_o.end());
    all.insert(a.d_prime.begin(), a.d_prime.end());
    CHECK(all.size() == data->size());
    CHECK(a.d_t.size() + a.d_o.size() + a.d_prime.size() == data->size());
    CHECK(a.d_o.size() == 50);
    CHECK(a.d_t.size() == 50);
    // Every cluster found on the features is represented in the sample.
    const Clustering c = ClusterDataset(*data, cfg);
    std::set<int> seen;
    for (const auto* part : {&a.d_t, &a.d_o}) {
      for (const std::string& id : *part) seen.insert(c.assignment[data->IndexOf(id)]);
    }
    for (int k = 0; k < c.num_clusters; ++k) CHECK(seen.count(k) == 1);
  }
}
