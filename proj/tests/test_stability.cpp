// Copyright 2026 The wcopt Authors
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


#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wcopt/errors.hpp"
#include "wcopt/stability.hpp"

namespace wcopt {
namespace {

using testing::Point;
using testing::Points;

constexpr StabilityMeasure kAllMeasures[] = {StabilityMeasure::kFunctionValues,
                                             StabilityMeasure::kGradients,
                                             StabilityMeasure::kArguments};

OptimizerConfig Sgd(std::int64_t T, double eta) {
  OptimizerConfig c;
  c.iterations = T;
  c.schedule.eta = eta;
  return c;
}

TEST(NeighborDataset, ReplacesOnePosition) {
  const NeighborPair p = MakeNeighborPair(Points({1, 2, 3}), 1, Point(9));
  EXPECT_EQ(p.neighbor.feature_matrix()(0, 0), 1);
  EXPECT_EQ(p.neighbor.feature_matrix()(0, 1), 9);
  EXPECT_EQ(p.neighbor.feature_matrix()(0, 2), 3);
  EXPECT_EQ(p.base.feature_matrix()(0, 1), 2);
}

TEST(NeighborDataset, SameReplacementIsIdentical) {
  const NeighborPair p = MakeNeighborPair(Points({1, 2, 3}), 2, Point(3));
  EXPECT_EQ(p.neighbor.feature_matrix(), p.base.feature_matrix());
}

TEST(NeighborDataset, LastPositionAndRange) {
  const NeighborPair p = MakeNeighborPair(Points({1, 2, 3}), 2, Point(7));
  EXPECT_EQ(p.neighbor.feature_matrix()(0, 2), 7);
  EXPECT_THROW(MakeNeighborPair(Points({1, 2, 3}), 3, Point(7)), ConfigError);
  EXPECT_THROW(MakeNeighborPair(Points({1, 2, 3}), -1, Point(7)), ConfigError);
}

TEST(CoupledStability, ZeroIterationsGivesZero) {
  const NeighborPair p = MakeNeighborPair(Points({0, 2}), 1, Point(4));
  const Dataset probes = Points({0, 2, 4});
  StabilityOptions o;
  o.trials = 20;
  for (StabilityMeasure m : kAllMeasures) {
    EXPECT_EQ(CoupledStabilityEstimate(LossProblem::Quadratic(1), p, Sgd(0, 0.5), m, probes, o)
                  .epsilon_hat, 0.0);
    EXPECT_EQ(ExactExpectationEnumerate(LossProblem::Quadratic(1), p, Sgd(0, 0.5), m, probes), 0.0);
  }
}

TEST(CoupledStability, IdenticalNeighborGivesZero) {
  const NeighborPair p = MakeNeighborPair(Points({0, 2}), 1, Point(2));
  StabilityOptions o;
  o.trials = 50;
  o.skip_untouched = false;
  for (StabilityMeasure m : kAllMeasures) {
    EXPECT_EQ(CoupledStabilityEstimate(LossProblem::Quadratic(1), p, Sgd(3, 0.5), m,
                                       Points({0, 2, 5}), o).epsilon_hat, 0.0);
  }
}

TEST(CoupledStability, HandCaseArguments) {
  const NeighborPair p = MakeNeighborPair(Points({0, 2}), 1, Point(4));
  EXPECT_EQ(ExactExpectationEnumerate(LossProblem::Quadratic(1), p, Sgd(1, 0.5),
                                      StabilityMeasure::kArguments, Points({0})), 0.5);
  StabilityOptions o;
  o.trials = 20000;
  const StabilityReport r = CoupledStabilityEstimate(
      LossProblem::Quadratic(1), p, Sgd(1, 0.5), StabilityMeasure::kArguments, Points({0}), o);
  EXPECT_NEAR(r.epsilon_hat, 0.5, 3 * r.std_error);
  EXPECT_EQ(r.trials, 20000);
}

TEST(CoupledStability, MonteCarloMatchesEnumerationAcrossSeeds) {
  const NeighborPair p = MakeNeighborPair(Points({0, 1, 2}), 2, Point(5));
  const Dataset probes = Points({0, 1, 2, 5});
  int outside = 0;
  int total = 0;
  for (StabilityMeasure m : kAllMeasures) {
    const double exact = ExactExpectationEnumerate(LossProblem::Quadratic(1), p, Sgd(2, 0.5), m, probes);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      OptimizerConfig c = Sgd(2, 0.5);
      c.seed = seed;
      StabilityOptions o;
      o.trials = 2000;
      const StabilityReport r = CoupledStabilityEstimate(LossProblem::Quadratic(1), p, c, m, probes, o);
      outside += std::abs(r.epsilon_hat - exact) > 3 * r.std_error;
      ++total;
    }
  }
  // 3-sigma misses are rare; allow a couple out of 60.
  EXPECT_LE(outside, 3) << outside << " of " << total;
}

TEST(CoupledStability, BoundsAttachedWithConstants) {
  const NeighborPair p = MakeNeighborPair(Points({0, 1, 2, 3}), 3, Point(1.5));
  OptimizerConfig c = Sgd(4, 0.2);
  c.projection_radius = 2.0;
  StabilityOptions o;
  o.trials = 200;
  o.constants = CertifyConstants(LossProblem::Quadratic(1), Points({0, 1, 2, 3, 1.5}), 2.0);
  const Dataset probes = Points({0, 1, 2, 3, 1.5});
  const auto fv = CoupledStabilityEstimate(LossProblem::Quadratic(1), p, c,
                                           StabilityMeasure::kFunctionValues, probes, o);
  const auto gr = CoupledStabilityEstimate(LossProblem::Quadratic(1), p, c,
                                           StabilityMeasure::kGradients, probes, o);
  const auto ar = CoupledStabilityEstimate(LossProblem::Quadratic(1), p, c,
                                           StabilityMeasure::kArguments, probes, o);
  ASSERT_TRUE(fv.theoretical_bound && gr.theoretical_bound && ar.theoretical_bound);
  EXPECT_DOUBLE_EQ(*fv.theoretical_bound, 2 * *o.constants->value_bound * 4 / 4);
  EXPECT_DOUBLE_EQ(*gr.theoretical_bound, 2 * o.constants->lipschitz * 1.0);
  EXPECT_DOUBLE_EQ(*ar.theoretical_bound, 2 * 2.0 * 4 / 4);
  for (const auto* r : {&fv, &gr, &ar}) {
    EXPECT_GE(r->epsilon_hat, 0.0);
    EXPECT_LE(r->epsilon_hat, *r->theoretical_bound + 3 * r->std_error);
  }
}

TEST(CoupledStability, ThreadCountDoesNotChangeResult) {
  const NeighborPair p = MakeNeighborPair(Points({0, 1, 2, 3, 4}), 4, Point(-2));
  const Dataset probes = Points({0, 1, 2, 3, 4, -2, 7});
  for (StabilityMeasure m : kAllMeasures) {
    StabilityOptions a;
    a.trials = 500;
    StabilityOptions b = a;
    b.threads = 4;
    const auto ra = CoupledStabilityEstimate(LossProblem::Quadratic(1), p, Sgd(6, 0.3), m, probes, a);
    const auto rb = CoupledStabilityEstimate(LossProblem::Quadratic(1), p, Sgd(6, 0.3), m, probes, b);
    EXPECT_EQ(ra.epsilon_hat, rb.epsilon_hat);
    EXPECT_EQ(ra.std_error, rb.std_error);
  }
}

TEST(CoupledStability, SkippingUntouchedTrialsIsExact) {
  const NeighborPair p = MakeNeighborPair(Points({0, 1, 2, 3}), 0, Point(6));
  StabilityOptions skip;
  skip.trials = 300;
  StabilityOptions full = skip;
  full.skip_untouched = false;
  const auto a = CoupledStabilityEstimate(LossProblem::Quadratic(1), p, Sgd(3, 0.4),
                                          StabilityMeasure::kArguments, Points({0}), skip);
  const auto b = CoupledStabilityEstimate(LossProblem::Quadratic(1), p, Sgd(3, 0.4),
                                          StabilityMeasure::kArguments, Points({0}), full);
  EXPECT_NEAR(a.epsilon_hat, b.epsilon_hat, 1e-15);
}

TEST(ExactEnumeration, RejectsLargeStateSpaceAndDpSgd) {
  const NeighborPair p = MakeNeighborPair(Points({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), 9, Point(5));
  EXPECT_THROW(ExactExpectationEnumerate(LossProblem::Quadratic(1), p, Sgd(7, 0.1),
                                         StabilityMeasure::kArguments, Points({0})),
               ConfigError);
  OptimizerConfig dp = Sgd(1, 0.1);
  dp.kind = OptimizerKind::kDpSgd;
  dp.privacy = PrivacyBudget::Canonical(1, 1, 10000, 1, 1e-3);
  EXPECT_THROW(ExactExpectationEnumerate(LossProblem::Quadratic(1), p, dp,
                                         StabilityMeasure::kArguments, Points({0})),
               UnsupportedError);
}

TEST(InclusionProbability, WorkedValues) {
  EXPECT_NEAR(InclusionProbability(3, 2, InclusionMode::kExact), 5.0 / 9.0, 1e-15);
  EXPECT_NEAR(InclusionProbability(3, 2, InclusionMode::kBound), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(InclusionProbability(7, 0, InclusionMode::kExact), 0.0);
  EXPECT_EQ(InclusionProbability(7, 0, InclusionMode::kBound), 0.0);
  for (std::int64_t T = 1; T < 6; ++T) EXPECT_EQ(InclusionProbability(1, T, InclusionMode::kExact), 1.0);
}

TEST(InclusionProbability, MatchesEnumerationAndStaysBelowBound) {
  for (std::int64_t n = 1; n <= 6; ++n) {
    for (std::int64_t T = 0; T <= 6; ++T) {
      const double exact = InclusionProbability(n, T, InclusionMode::kExact);
      EXPECT_NEAR(exact, EnumeratedInclusionFrequency(n, T), 1e-12);
      EXPECT_LE(exact, InclusionProbability(n, T, InclusionMode::kBound));
    }
  }
}

TEST(StabilityMeasureNames, RoundTrip) {
  for (StabilityMeasure m : kAllMeasures) EXPECT_EQ(StabilityMeasureFromString(ToString(m)), m);
  EXPECT_THROW(StabilityMeasureFromString("hessians"), ConfigError);
}

}  // namespace
}  // namespace wcopt
