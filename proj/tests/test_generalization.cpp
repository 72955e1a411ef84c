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
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wcopt/errors.hpp"
#include "wcopt/generalization.hpp"
#include "wcopt/rng.hpp"

namespace wcopt {
namespace {

using testing::Points;

OptimizerConfig Sgd(std::int64_t T, double eta, std::uint64_t seed = 1) {
  OptimizerConfig c;
  c.iterations = T;
  c.schedule.eta = eta;
  c.seed = seed;
  return c;
}

TEST(GeneralizationGap, ConstantLossHasNoGap) {
  const PopulationPool pool(testing::Table({{{1, 0}, 0}, {{0, 1}, 1}, {{1, 1}, 2}}));
  const LossProblem loss = LossProblem::Constant(2, 2.5);
  for (GapKind kind : {GapKind::kFunctionValues, GapKind::kGradients, GapKind::kMoreauGradients}) {
    const GapReport r = GeneralizationGap(loss, pool, 2, Sgd(0, 0.1), kind, 5,
                                          DefaultMoreauConfig(0.0), 0.0);
    EXPECT_EQ(r.gap_estimate, 0.0) << ToString(kind);
    EXPECT_EQ(r.datasets_sampled, 5);
  }
}

TEST(GeneralizationGap, SampleEqualToPoolHasNoGap) {
  const PopulationPool pool(Points({1.5}));
  const LossProblem loss = LossProblem::Quadratic(1);
  for (GapKind kind : {GapKind::kFunctionValues, GapKind::kGradients, GapKind::kMoreauGradients}) {
    const GapReport r = GeneralizationGap(loss, pool, 1, Sgd(3, 0.3), kind, 4,
                                          DefaultMoreauConfig(0.0), 0.0);
    EXPECT_EQ(r.gap_estimate, 0.0) << ToString(kind);
  }
}

TEST(GeneralizationGap, ConvexGapBelowStabilityBound) {
  GeneratorSpec spec;
  spec.kind = ProblemKind::kAbsoluteRegression;
  spec.dim = 10;
  spec.pool_size = 20000;
  spec.noise = 0.1;
  spec.radius = 1.5;
  spec.seed = 3;
  const ProblemInstance inst = GenerateInstance(spec);
  const Index n = 1000;
  const TunedSchedule tuned = TuneSchedule(Regime::kConvex, n, inst.constants);
  OptimizerConfig c = Sgd(tuned.iterations, tuned.schedule.eta, 8);
  c.projection_radius = spec.radius;
  const GapReport r = GeneralizationGap(inst.loss, inst.pool, n, c, GapKind::kFunctionValues, 20,
                                        std::nullopt, 0.0);
  const double bound = 2.0 * *inst.constants.value_bound * static_cast<double>(c.iterations) /
                       static_cast<double>(n);
  EXPECT_LE(r.gap_estimate, bound + 3 * r.std_error);
}

TEST(GeneralizationGap, KindPreconditions) {
  GeneratorSpec spec;
  spec.dim = 3;
  spec.pool_size = 100;
  const ProblemInstance inst = GenerateInstance(spec);
  EXPECT_THROW(GeneralizationGap(inst.loss, inst.pool, 10, Sgd(5, 0.1), GapKind::kGradients, 2,
                                 std::nullopt, inst.constants.weak_convexity),
               UnsupportedError);
  EXPECT_THROW(GeneralizationGap(inst.loss, inst.pool, 10, Sgd(5, 0.1), GapKind::kMoreauGradients,
                                 2, std::nullopt, inst.constants.weak_convexity),
               ConfigError);
}

TEST(GeneralizationGap, GradientsReportVarianceAndRhs) {
  GeneratorSpec spec;
  spec.kind = ProblemKind::kSmoothedRegression;
  spec.dim = 4;
  spec.pool_size = 5000;
  spec.noise = 0.5;
  spec.seed = 12;
  const ProblemInstance inst = GenerateInstance(spec);
  GapBoundInput in{0.01, inst.constants};
  const GapReport r = GeneralizationGap(inst.loss, inst.pool, 200, Sgd(50, 0.1), GapKind::kGradients,
                                        10, std::nullopt, 0.0, 2, in);
  ASSERT_TRUE(r.variance_term && r.rhs_bound);
  EXPECT_DOUBLE_EQ(*r.rhs_bound, 4 * 0.01 + std::sqrt(*r.variance_term / 200.0));
  EXPECT_EQ(r.per_draw.size(), 10u);
}

TEST(GeneralizationGap, MoreauDecompositionPerDraw) {
  GeneratorSpec spec;
  spec.dim = 4;
  spec.pool_size = 3000;
  spec.offset_norm = 0.5;
  spec.noise = 0.05;
  spec.radius = 1.0;
  spec.seed = 21;
  const ProblemInstance inst = GenerateInstance(spec);
  DrawOptions o;
  o.draws = 8;
  o.moreau = DefaultMoreauConfig(inst.constants.weak_convexity);
  o.weak_convexity = inst.constants.weak_convexity;
  OptimizerConfig c = Sgd(40, 0.02, 5);
  c.output = OutputSelector::kRandomIterate;
  for (const DrawRecord& d : EvaluateDraws(inst.loss, inst.pool, 100, c, o)) {
    ASSERT_TRUE(d.moreau.has_value());
    const MoreauMetrics& m = *d.moreau;
    EXPECT_LE(m.population_norm, m.gap + m.empirical_norm + 4 * m.inner_residual / o.moreau->lambda);
  }
}

TEST(EvaluateDraws, IndependentOfThreads) {
  GeneratorSpec spec;
  spec.kind = ProblemKind::kSmoothedRegression;
  spec.dim = 3;
  spec.pool_size = 1000;
  spec.seed = 4;
  const ProblemInstance inst = GenerateInstance(spec);
  DrawOptions a;
  a.draws = 6;
  a.gradients = true;
  DrawOptions b = a;
  b.threads = 3;
  const auto ra = EvaluateDraws(inst.loss, inst.pool, 50, Sgd(20, 0.1), a);
  const auto rb = EvaluateDraws(inst.loss, inst.pool, 50, Sgd(20, 0.1), b);
  ASSERT_EQ(ra.size(), rb.size());
  for (std::size_t k = 0; k < ra.size(); ++k) {
    EXPECT_EQ(ra[k].output, rb[k].output);
    EXPECT_EQ(ra[k].population_risk, rb[k].population_risk);
    EXPECT_EQ(ra[k].gradients->variance, rb[k].gradients->variance);
  }
}

TEST(DrawDataset, WithReplacementAndDeterministic) {
  const PopulationPool pool(Points({0, 1, 2, 3, 4}));
  const DrawnDataset a = DrawDataset(pool, 50, 9);
  const DrawnDataset b = DrawDataset(pool, 50, 9);
  EXPECT_EQ(a.pool_indices, b.pool_indices);
  EXPECT_EQ(a.data.size(), 50);
  for (Index i = 0; i < 50; ++i) {
    EXPECT_EQ(a.data.features(i)[0], static_cast<double>(a.pool_indices[static_cast<std::size_t>(i)]));
  }
}

TEST(StabilityBoundRhs, WorkedValues) {
  EXPECT_DOUBLE_EQ(StabilityBoundRhs(BoundTheorem::kGradGap, 0.0, std::nullopt, 100, 1.0), 0.1);
  ProblemConstants k;
  k.lipschitz = 1;
  k.weak_convexity = 1;
  EXPECT_NEAR(StabilityBoundRhs(BoundTheorem::kMoreauGap, 0.01, k, 100, std::nullopt),
              0.4 + std::sqrt(0.32), 1e-15);
  EXPECT_NEAR(StabilityBoundRhs(BoundTheorem::kMoreauGap, 0.01, k, 100, std::nullopt), 0.9657, 1e-4);
  k.lipschitz = 3;
  EXPECT_DOUBLE_EQ(StabilityBoundRhs(BoundTheorem::kMoreauGap, 0.0, k, 400, std::nullopt),
                   4 * 3 / 20.0);
}

TEST(StabilityBoundRhs, MissingInputs) {
  EXPECT_THROW(StabilityBoundRhs(BoundTheorem::kGradGap, 0.1, std::nullopt, 10, std::nullopt),
               ConfigError);
  EXPECT_THROW(StabilityBoundRhs(BoundTheorem::kMoreauGap, 0.1, std::nullopt, 10, std::nullopt),
               ConfigError);
}

TEST(FitRate, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (double n : {1e2, 1e3, 1e4, 1e5}) pts.emplace_back(n, 3 * std::pow(n, -1.0 / 6.0));
  const RateFit f = FitRate(pts);
  EXPECT_NEAR(f.slope, -1.0 / 6.0, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(FitRate, ConstantValues) {
  const std::vector<std::pair<double, double>> pts = {{10, 2}, {20, 2}, {40, 2}, {80, 2}};
  const RateFit f = FitRate(pts);
  EXPECT_NEAR(f.slope, 0.0, 1e-15);
  EXPECT_EQ(f.r_squared, 1.0);
}

TEST(FitRate, NoisyThirdRootRecovered) {
  int within = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    CounterRng rng(seed, Substream::kData);
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 8; ++k) {
      const double n = 100 * std::pow(10.0, 3.0 * k / 7.0);
      pts.emplace_back(n, std::pow(n, -1.0 / 3.0) * (1 + 0.05 * rng.Normal()));
    }
    within += std::abs(FitRate(pts).slope + 1.0 / 3.0) <= 0.05;
  }
  EXPECT_GE(within, 190);
}

TEST(FitRate, RejectsBadInput) {
  const std::vector<std::pair<double, double>> three = {{1, 1}, {2, 1}, {3, 1}};
  EXPECT_THROW(FitRate(three), ConfigError);
  const std::vector<std::pair<double, double>> negative = {{1, 1}, {2, 1}, {3, -1}, {4, 1}};
  EXPECT_THROW(FitRate(negative), ConfigError);
}

TEST(OptimalRisk, NonconvexUnsupported) {
  GeneratorSpec spec;
  spec.dim = 2;
  spec.pool_size = 10;
  const ProblemInstance inst = GenerateInstance(spec);
  EXPECT_THROW(OptimalRisk(inst.loss, inst.pool), UnsupportedError);
}

TEST(OptimalRisk, QuadraticIsPoolVariance) {
  const PopulationPool pool(Points({0, 1, 2, 5}));
  // min_w mean 0.5 (w - z)^2 = 0.5 Var(z) = 0.5 * 3.5
  EXPECT_NEAR(OptimalRisk(LossProblem::Quadratic(1), pool), 1.75, 1e-12);
}

TEST(Quantile, Interpolates) {
  EXPECT_DOUBLE_EQ(Quantile({3, 1, 2, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(Quantile({3, 1, 2, 4}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(Quantile({7}, 0.9), 7.0);
  EXPECT_THROW(Quantile({}, 0.5), ConfigError);
}

}  // namespace
}  // namespace wcopt
