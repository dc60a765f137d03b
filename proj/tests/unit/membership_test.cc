// Copyright 2026 The beacon_recon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "beacon_recon/membership.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "beacon_recon/common.h"

namespace beacon_recon {
namespace {

// Direct evaluation of the increment with its own clamping.
double OracleIncrement(double f, std::size_t n, double delta, int x) {
  auto clamp = [](double v) { return std::clamp(v, 1e-12, 1.0 - 1e-12); };
  const double dn = clamp(std::pow(1.0 - f, 2.0 * static_cast<double>(n)));
  const double dn1 = clamp(std::pow(1.0 - f, 2.0 * static_cast<double>(n) - 2.0));
  double value = std::log(dn) - std::log(delta) - std::log(dn1);
  if (x == 1) {
    value += std::log(delta) + std::log(dn1) + std::log1p(-dn) - std::log(dn) -
             std::log1p(-delta * dn1);
  }
  return value;
}

LrtConfig Config(double delta, std::size_t n) {
  LrtConfig c;
  c.delta = delta;
  c.beacon_size = n;
  return c;
}

TEST(DTermsTest, ClosedForms) {
  DTerms d = ComputeDTerms(0.5, 1);
  EXPECT_DOUBLE_EQ(d.d_n, 0.25);
  EXPECT_DOUBLE_EQ(d.d_n_minus_1, 1.0);
  d = ComputeDTerms(0.0, 37);
  EXPECT_DOUBLE_EQ(d.d_n, 1.0);
  EXPECT_DOUBLE_EQ(d.d_n_minus_1, 1.0);
  d = ComputeDTerms(0.25, 2);
  EXPECT_DOUBLE_EQ(d.d_n, 0.31640625);
  EXPECT_DOUBLE_EQ(d.d_n_minus_1, 0.5625);
}

TEST(LrtIncrementTest, WorkedValues) {
  const LrtConfig c = Config(1e-6, 1);
  EXPECT_NEAR(LrtIncrement(0.5, 1, c), -0.28768, 1e-5);
  EXPECT_NEAR(LrtIncrement(0.5, 0, c), 12.42922, 1e-5);
}

TEST(LrtIncrementTest, ZeroMafIsClamped) {
  bool clamped = false;
  const double v = LrtIncrement(0.0, 0, Config(1e-6, 10), &clamped);
  EXPECT_TRUE(clamped);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_TRUE(std::isfinite(LrtIncrement(0.0, 1, Config(1e-6, 10))));
}

TEST(LrtIncrementTest, MatchesDirectEvaluationOnGrid) {
  for (double f : {0.001, 0.01, 0.05, 0.1, 0.25, 0.4, 0.5}) {
    for (std::size_t n : {1u, 2u, 10u, 100u, 1000u}) {
      for (double delta : {1e-8, 1e-6, 1e-3, 0.1}) {
        for (int x : {0, 1}) {
          EXPECT_NEAR(LrtIncrement(f, x, Config(delta, n)),
                      OracleIncrement(f, n, delta, x), 1e-9)
              << f << ' ' << n << ' ' << delta << ' ' << x;
        }
      }
    }
  }
}

TEST(LrtIncrementTest, SignsOverGrid) {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double f = 0.01 + 0.49 * rng.Uniform();
    const std::size_t n = 1 + rng.Below(1000);
    const double delta = std::pow(10.0, -8.0 + 5.0 * rng.Uniform());
    const LrtConfig c = Config(delta, n);
    EXPECT_GT(LrtIncrement(f, 0, c), 0.0);
    EXPECT_LT(LrtIncrement(f, 1, c), 0.0) << f << ' ' << n << ' ' << delta;
  }
}

TEST(LrtStateTest, RecomputeMatchesIncremental) {
  Rng rng(9);
  const LrtConfig c = Config(1e-4, 80);
  LrtState s;
  EXPECT_EQ(RecomputeLambda(s, c), 0.0);
  for (std::size_t q = 0; q < 500; ++q) {
    s = LrtUpdate(std::move(s), q, 0.5 * rng.Uniform(), rng.Bernoulli(0.5), c);
  }
  EXPECT_EQ(s.queries(), 500u);
  EXPECT_NEAR(RecomputeLambda(s, c), s.lambda, 1e-12 * std::max(1.0, std::abs(s.lambda)));
}

TEST(LrtConfigTest, Validate) {
  EXPECT_NO_THROW(LrtConfig{}.Validate());
  EXPECT_THROW(Config(0.0, 5).Validate(), Error);
  EXPECT_THROW(Config(1.0, 5).Validate(), Error);
  EXPECT_THROW(Config(1e-6, 0).Validate(), Error);
  LrtConfig c;
  c.alpha = 0.0;
  EXPECT_THROW(c.Validate(), Error);
}

TEST(OptimalAttackTest, MemberTraceDecreases) {
  const std::vector<double> mafs{0.3, 0.01, 0.2, 0.05, 0.02};
  const std::vector<std::size_t> loci{0, 1, 2, 3, 4};
  const AttackTrace t = OptimalAttack(loci, mafs, [](std::size_t) { return true; },
                                      Config(1e-6, 50), 10);
  EXPECT_EQ(t.loci, (std::vector<std::size_t>{1, 4, 3, 2, 0}));
  ASSERT_EQ(t.lambda.size(), 5u);
  EXPECT_LT(t.lambda[0], 0.0);
  for (std::size_t q = 1; q < 5; ++q) EXPECT_LT(t.lambda[q], t.lambda[q - 1]);
  EXPECT_TRUE(t.member_calls.empty());
}

TEST(OptimalAttackTest, AbsentTraceIncreases) {
  const std::vector<double> mafs{0.3, 0.01, 0.2};
  const std::vector<std::size_t> loci{0, 1, 2};
  const LrtConfig c = Config(1e-6, 50);
  const AttackTrace t =
      OptimalAttack(loci, mafs, [](std::size_t) { return false; }, c, 2);
  ASSERT_EQ(t.lambda.size(), 2u);
  EXPECT_NEAR(t.lambda[0], LrtIncrement(0.01, 0, c), 1e-12);
  EXPECT_NEAR(t.lambda[1], t.lambda[0] + LrtIncrement(0.2, 0, c), 1e-12);
}

TEST(OptimalAttackTest, BoundariesAndErrors) {
  const std::vector<double> mafs{0.1};
  const std::vector<std::size_t> none;
  const std::vector<std::size_t> one{0};
  const auto yes = [](std::size_t) { return true; };
  const AttackTrace empty = OptimalAttack(one, mafs, yes, Config(1e-6, 5), 0);
  EXPECT_TRUE(empty.lambda.empty());
  EXPECT_EQ(empty.LambdaAt(3), 0.0);
  EXPECT_THROW(OptimalAttack(none, mafs, yes, Config(1e-6, 5), 4), Error);
  const std::vector<std::size_t> outside{3};
  EXPECT_THROW(OptimalAttack(outside, mafs, yes, Config(1e-6, 5), 4), Error);
}

TEST(OptimalAttackTest, ThresholdDecisions) {
  const std::vector<double> mafs{0.05, 0.05};
  const std::vector<std::size_t> loci{0, 1};
  const std::vector<double> thresholds{-100.0, 0.0};
  const AttackTrace t = OptimalAttack(loci, mafs, [](std::size_t) { return true; },
                                      Config(1e-6, 50), 5, thresholds);
  EXPECT_EQ(t.member_calls, (std::vector<int>{0, 1}));
  EXPECT_EQ(t.LambdaAt(7), t.lambda[1]);
}

TEST(LowerQuantileTest, Examples) {
  std::vector<double> v{3, -5, 0, 2, -1};
  for (int i = 0; i < 15; ++i) v.push_back(4 + i);
  const double t = LowerQuantile(v, 0.05);
  EXPECT_NEAR(t, -5 + 0.95 * 4, 1e-12);
  EXPECT_DOUBLE_EQ(LowerQuantile(v, 1e-12), -5 + 19e-12 * 4);
  EXPECT_NEAR(LowerQuantile(v, 1e-15), -5.0, 1e-12);
  EXPECT_DOUBLE_EQ(LowerQuantile(std::vector<double>(7, 2.5), 0.3), 2.5);
  EXPECT_THROW(LowerQuantile({}, 0.05), Error);
}

TEST(CalibrateNullTest, PerQueryThresholdsAndErrors) {
  std::vector<AttackTrace> traces(2);
  traces[0].lambda = {1.0, 2.0};
  traces[1].lambda = {3.0};
  const std::vector<double> t = CalibrateNull(traces, 0.5, 3);
  EXPECT_EQ(t, (std::vector<double>{2.0, 2.5, 2.5}));
  EXPECT_THROW(CalibrateNull(std::span<const AttackTrace>(traces.data(), 1), 0.05, 3),
               Error);
  EXPECT_THROW(CalibrateNull({}, 0.05, 3), Error);
}

TEST(PowerCurveTest, IdenticalCohortGivesAlpha) {
  Rng rng(2);
  std::vector<AttackTrace> cohort(20);
  for (auto& t : cohort) {
    double lambda = 0.0;
    for (int q = 0; q < 10; ++q) t.lambda.push_back(lambda += rng.Uniform() - 0.5);
  }
  const std::vector<double> thresholds = CalibrateNull(cohort, 0.05, 10);
  const PowerCurve curve = ComputePowerCurve(cohort, thresholds);
  ASSERT_EQ(curve.power.size(), 10u);
  for (double p : curve.power) EXPECT_NEAR(p, 0.05, 1e-12);
  EXPECT_THROW(ComputePowerCurve({}, thresholds), Error);
}

TEST(PowerCurveTest, CsvLayout) {
  PowerCurve curve;
  curve.power = {0.25, 1};
  curve.m = 2;
  curve.p = 0.8;
  std::ostringstream out;
  WritePowerCurveCsv(curve, out);
  EXPECT_EQ(out.str(),
            "queries,power,m,p,alpha,delta\n1,0.25,2,0.8,0.05,1e-06\n2,1,2,0.8,0.05,1e-06\n");
}

TEST(EffectiveDeltaTest, AddsMismatchAndClamps) {
  EXPECT_DOUBLE_EQ(EffectiveDelta(1e-6, 0.1), 1e-6 + 0.1);
  EXPECT_DOUBLE_EQ(EffectiveDelta(1e-6, -0.3), 1e-6);
  EXPECT_LT(EffectiveDelta(1e-6, 0.9), 0.5);
}

}  // namespace
}  // namespace beacon_recon
