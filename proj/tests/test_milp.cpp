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

#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "labelopt/error.hpp"
#include "labelopt/milp.hpp"
#include "labelopt/rng.hpp"
#include "support.hpp"

using namespace labelopt;
using labelopt::testing::Instance1D;
using labelopt::testing::RandomInstance;

namespace {

MilpConfig Alpha(double alpha) {
  MilpConfig c;
  c.alpha = alpha;
  return c;
}

MilpSolution Bb(const OptimizationInstance& inst, const MilpConfig& c) {
  return SolveBranchAndBound(Formulate(inst, c));
}

const MilpConstraint& Row(const MilpModel& model, const std::string& name) {
  for (const auto& c : model.constraints) {
    if (c.name == name) return c;
  }
  FAIL("missing row " << name);
  return model.constraints.front();
}

double Coef(const MilpConstraint& c, int var) {
  for (const auto& [v, a] : c.terms) {
    if (v == var) return a;
  }
  return 0.0;
}

}  // namespace

TEST_CASE("formulation layout") {
  Rng rng(1);
  const OptimizationInstance inst = RandomInstance(rng, 2, 3);
  const MilpModel model = Formulate(inst, Alpha(0.9));
  CHECK(model.variables.size() == 5);
  CHECK(model.constraints.size() == 7);
  CHECK(model.variables[0].name == "W_1");
  CHECK(model.variables[2].name == "X_1");
  CHECK(model.variables[2].integer);
  CHECK(model.variables[1].upper == doctest::Approx((1e6 - 1.0) / 2));
  CHECK(model.objective_constant == 3.0);
  for (int i = 0; i < 3; ++i) CHECK(model.objective[2 + i] == (inst.z(i) ? -1.0 : 0.0));

  const MilpConstraint& acc = Row(model, "ACC");
  CHECK(acc.sense == ConstraintSense::kGreaterEqual);
  CHECK(acc.rhs == doctest::Approx(-3 * 0.1));
  const MilpConstraint& le = Row(model, "LNK_LE_2");
  CHECK(le.rhs == 1.0);
  CHECK(Coef(le, 0) == inst.theta(1)[0]);
  CHECK(Coef(le, 3) == -1e6);
  const MilpConstraint& ge = Row(model, "LNK_GE_2");
  CHECK(ge.sense == ConstraintSense::kGreaterEqual);
  CHECK(ge.rhs == 1.0 + 1e-6 - 1e6);
  CHECK(Coef(ge, 3) == -1e6);
}

TEST_CASE("alpha one forbids every agreed-but-wrong row") {
  const OptimizationInstance inst = Instance1D({0.9, 0.8, 0.7}, {1, 1, 1}, {1, 0, 1});
  const MilpModel model = Formulate(inst, Alpha(1.0));
  const MilpConstraint& acc = Row(model, "ACC");
  CHECK(acc.rhs == 0.0);
  CHECK(Coef(acc, 1) == 0.0);
  CHECK(Coef(acc, 2) == -1.0);
  CHECK(Coef(acc, 3) == 0.0);
}

TEST_CASE("configuration checks") {
  Rng rng(2);
  const OptimizationInstance inst = RandomInstance(rng, 3, 5);
  MilpConfig bad;
  bad.omega_upper = 1e7;
  CHECK_THROWS_AS(bad.Validate(inst), Error);
  MilpConfig shifted;
  shifted.omega_lower = 0.5;
  CHECK_THROWS_AS(shifted.Validate(inst), Error);
  CHECK_THROWS_AS(Alpha(0.0).Validate(inst), Error);
  Alpha(0.5).Validate(inst);
  CHECK(Alpha(0.9).ErrorBudget(10) == 1);
  CHECK(Alpha(0.7).ErrorBudget(10) == 3);
}

TEST_CASE("branch and bound worked examples") {
  const OptimizationInstance easy = Instance1D({0.9, 0.9, 0.9}, {1, 1, 1}, {1, 1, 1});
  CHECK(Bb(easy, Alpha(1.0)).manual_count == 0);

  const OptimizationInstance three = Instance1D({0.9, 0.8, 0.7}, {1, 1, 1}, {1, 0, 1});
  const MilpSolution strict = Bb(three, Alpha(1.0));
  CHECK(strict.manual_count == 2);
  CHECK(strict.status == MilpStatus::kOptimal);
  CHECK(strict.x == std::vector<uint8_t>{1, 0, 0});
  const MilpSolution loose = Bb(three, Alpha(0.5));
  CHECK(loose.manual_count == 0);
  CHECK(loose.omega[0] * 0.7 > 1.0);
  CHECK(BruteForce(three, Alpha(1.0)).manual_count == 2);
  CHECK(BruteForce(three, Alpha(0.5)).manual_count == 0);
}

TEST_CASE("one-dimensional sweep examples") {
  const OptimizationInstance three = Instance1D({0.9, 0.8, 0.7}, {1, 1, 1}, {1, 0, 1});
  CHECK(Solve1D(three, Alpha(1.0)).manual_count == 2);

  const OptimizationInstance none = Instance1D({0.9, 0.5, 0.2}, {0, 0, 0}, {0, 0, 0});
  const MilpSolution s = Solve1D(none, Alpha(1.0));
  CHECK(s.manual_count == 3);
  CHECK(s.omega == std::vector<double>{0.0});

  // The two 0.8 rows must fall on the same side of any cut; the wrong one
  // keeps both manual at alpha = 1.
  const OptimizationInstance ties = Instance1D({0.9, 0.8, 0.8, 0.3}, {1, 1, 1, 1}, {1, 1, 0, 1});
  const MilpSolution t = Solve1D(ties, Alpha(1.0));
  CHECK(t.x[1] == t.x[2]);
  CHECK(t.manual_count == 3);
  CHECK(Verify(t, ties, Alpha(1.0)).ok);

  Rng rng(3);
  CHECK_THROWS_AS(Solve1D(RandomInstance(rng, 2, 4), Alpha(1.0)), Error);
}

TEST_CASE("brute force examples") {
  CHECK(BruteForce(Instance1D({0.5}, {1}, {1}), Alpha(1.0)).manual_count == 0);

  OptimizationInstance twin(2);
  const std::vector<double> theta{0.6, 0.7};
  twin.AddRow(theta, true, true);
  twin.AddRow(theta, true, false);
  CHECK(BruteForce(twin, Alpha(1.0)).manual_count == 2);
  CHECK(Bb(twin, Alpha(1.0)).manual_count == 2);

  Rng rng(42);
  const OptimizationInstance r = RandomInstance(rng, 2, 10);
  CHECK(BruteForce(r, Alpha(0.9)).manual_count == Bb(r, Alpha(0.9)).manual_count);

  Rng big(4);
  CHECK_THROWS_AS(BruteForce(RandomInstance(big, 1, 21), Alpha(1.0)), Error);
}

TEST_CASE("verify accepts solver output and the fallback, rejects tampering") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const OptimizationInstance inst = RandomInstance(rng, 2, 12);
    const MilpConfig c = Alpha(0.9);
    const MilpSolution s = Bb(inst, c);
    const VerifyReport ok = Verify(s, inst, c);
    CHECK(ok.ok);

    const MilpSolution fallback = FallbackSolution(inst);
    CHECK(fallback.manual_count == inst.num_rows());
    CHECK(Verify(fallback, inst, c).ok);

    MilpSolution tampered = s;
    const int flip = static_cast<int>(rng.Index(inst.num_rows()));
    tampered.x[flip] ^= 1;
    const VerifyReport bad = Verify(tampered, inst, c);
    CHECK_FALSE(bad.ok);
    REQUIRE_FALSE(bad.bad_rows.empty());
    CHECK(bad.bad_rows.front() == flip);
  }
}

TEST_CASE("MPS export and parse") {
  const OptimizationInstance one = Instance1D({0.6}, {1}, {0});
  const std::string text = ExportMps(Formulate(one, Alpha(1.0)));
  const MilpModel parsed = ParseMps(text);
  REQUIRE(parsed.constraints.size() == 3);
  CHECK(parsed.constraints[0].name == "ACC");
  CHECK(parsed.constraints[1].name == "LNK_LE_1");
  CHECK(parsed.constraints[2].name == "LNK_GE_1");
  REQUIRE(parsed.variables.size() == 2);
  CHECK(parsed.variables[0].name == "W_1");
  CHECK(parsed.variables[1].name == "X_1");

  Rng rng(6);
  const OptimizationInstance inst = RandomInstance(rng, 2, 3);
  const MilpModel model = Formulate(inst, Alpha(0.8));
  const MilpModel back = ParseMps(ExportMps(model));
  REQUIRE(back.variables.size() == 5);
  REQUIRE(back.constraints.size() == 7);
  CHECK(back.objective_constant == model.objective_constant);
  for (size_t v = 0; v < 5; ++v) {
    CHECK(back.variables[v].name == model.variables[v].name);
    CHECK(back.variables[v].lower == model.variables[v].lower);
    CHECK(back.variables[v].upper == model.variables[v].upper);
    CHECK(back.variables[v].integer == model.variables[v].integer);
    CHECK(back.objective[v] == model.objective[v]);
  }
  for (size_t r = 0; r < 7; ++r) {
    CHECK(back.constraints[r].name == model.constraints[r].name);
    CHECK(back.constraints[r].sense == model.constraints[r].sense);
    CHECK(back.constraints[r].rhs == model.constraints[r].rhs);
    for (int v = 0; v < 5; ++v) CHECK(Coef(back.constraints[r], v) == Coef(model.constraints[r], v));
  }
  CHECK_THROWS_AS(ParseMps("ROWS\n Q  BAD\n"), Error);
}

TEST_CASE("solvers agree with exhaustive enumeration") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 3;
    const int m = 1 + static_cast<int>(rng.Index(12));
    const double alpha = (trial / 3) % 3 == 0 ? 1.0 : ((trial / 3) % 3 == 1 ? 0.9 : 0.8);
    const OptimizationInstance inst = RandomInstance(rng, n, m);
    const MilpConfig c = Alpha(alpha);
    const MilpSolution brute = BruteForce(inst, c);
    const MilpSolution bb = Bb(inst, c);
    CHECK(bb.status == MilpStatus::kOptimal);
    CHECK(bb.manual_count == brute.manual_count);
    CHECK(Verify(bb, inst, c).ok);
    if (n == 1) {
      CHECK(Solve1D(inst, c).manual_count == brute.manual_count);
      CHECK(testing::SortedSweepManual(inst, alpha) == brute.manual_count);
    }
  }
}

TEST_CASE("optimum never decreases as alpha grows") {
  Rng rng(8);
  for (int trial = 0; trial < 15; ++trial) {
    const OptimizationInstance inst = RandomInstance(rng, 2, 25, 0.8, 0.85);
    int64_t previous = -1;
    for (double alpha : {0.5, 0.7, 0.9, 0.95, 1.0}) {
      const MilpSolution s = Bb(inst, Alpha(alpha));
      REQUIRE(s.status == MilpStatus::kOptimal);
      CHECK(s.manual_count >= previous);
      previous = s.manual_count;
    }
  }
}

TEST_CASE("single-classifier auto sets are upward closed") {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const OptimizationInstance inst = RandomInstance(rng, 1, 40);
    const MilpSolution s = Solve1D(inst, Alpha(0.9));
    for (int a = 0; a < inst.num_rows(); ++a) {
      for (int b = 0; b < inst.num_rows(); ++b) {
        if (s.x[a] && inst.theta(b)[0] > inst.theta(a)[0]) CHECK(s.x[b] == 1);
      }
    }
  }
}

TEST_CASE("limits yield an incumbent that still verifies") {
  Rng rng(10);
  const OptimizationInstance inst = RandomInstance(rng, 3, 120, 0.8, 0.9);
  MilpConfig c = Alpha(0.9);
  c.node_limit = 3;
  const MilpSolution s = Bb(inst, c);
  CHECK(Verify(s, inst, c).ok);
  CHECK(s.lower_bound <= static_cast<double>(s.manual_count) + 1e-9);
  if (s.status == MilpStatus::kIncumbent) CHECK(s.gap >= 0.0);
}
