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


#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wcopt/errors.hpp"
#include "wcopt/problems.hpp"
#include "wcopt/rng.hpp"

namespace wcopt {
namespace {

using testing::Points;
using testing::Table;
using testing::Vec;

TEST(LossEval, PhaseRetrievalChainRule) {
  const LossProblem pr = LossProblem::PhaseRetrieval(2);
  const LossEval e = pr.Evaluate(Vec({1, 0}), Example{Vec({1, 1}), 0.0});
  EXPECT_DOUBLE_EQ(e.value, 1.0);
  EXPECT_DOUBLE_EQ(e.subgradient[0], 2.0);
  EXPECT_DOUBLE_EQ(e.subgradient[1], 2.0);
}

TEST(LossEval, PhaseRetrievalKinkPicksZero) {
  const LossProblem pr = LossProblem::PhaseRetrieval(2);
  const LossEval e = pr.Evaluate(Vec({1, 0}), Example{Vec({1, 1}), 1.0});
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.subgradient[0], 0.0);
  EXPECT_EQ(e.subgradient[1], 0.0);
}

TEST(LossEval, Quadratic) {
  const LossEval e = LossProblem::Quadratic(1).Evaluate(Vec({0}), testing::Point(2.0));
  EXPECT_DOUBLE_EQ(e.value, 2.0);
  EXPECT_DOUBLE_EQ(e.subgradient[0], -2.0);
}

TEST(LossEval, DimensionMismatchIsConfigError) {
  const LossProblem pr = LossProblem::PhaseRetrieval(2);
  EXPECT_THROW(pr.Evaluate(Vec({1, 0, 0}), Example{Vec({1, 1}), 0.0}), ConfigError);
  EXPECT_THROW(pr.Evaluate(Vec({1, 0}), Example{Vec({1, 1, 1}), 0.0}), ConfigError);
}

TEST(RiskEval, ConstantLoss) {
  const RiskEval r = EvaluateRisk(LossProblem::Constant(2, 3.5), Vec({0.3, -1}),
                                  Table({{{1, 2}, 0}, {{3, 4}, 1}}));
  EXPECT_DOUBLE_EQ(r.value, 3.5);
  EXPECT_EQ(r.subgradient.norm(), 0.0);
}

TEST(RiskEval, QuadraticTwoTermAverage) {
  const RiskEval r = EvaluateRisk(LossProblem::Quadratic(1), Vec({0}), Points({0.0, 2.0}));
  EXPECT_DOUBLE_EQ(r.value, 1.0);
  EXPECT_DOUBLE_EQ(r.subgradient[0], -1.0);
}

TEST(RiskEval, IdenticalPoolEqualsSingleExample) {
  const LossProblem pr = LossProblem::PhaseRetrieval(2);
  const Example z{Vec({0.3, -0.7}), 0.2};
  const ExampleTable pool = ExampleTable::FromExamples(std::vector<Example>(37, z));
  const Vector w = Vec({0.4, 1.1});
  const RiskEval r = EvaluateRisk(pr, w, pool);
  const LossEval e = pr.Evaluate(w, z);
  EXPECT_NEAR(r.value, e.value, 1e-14);
  EXPECT_NEAR((r.subgradient - e.subgradient).norm(), 0.0, 1e-14);
}

TEST(RiskEval, EmptySampleIsConfigError) {
  EXPECT_THROW(EvaluateRisk(LossProblem::Quadratic(1), Vec({0}), ExampleTable()), ConfigError);
}

TEST(RiskEval, PermutationInvariant) {
  GeneratorSpec spec;
  spec.dim = 4;
  spec.pool_size = 200;
  spec.noise = 0.1;
  spec.seed = 11;
  const ProblemInstance inst = GenerateInstance(spec);
  std::vector<Index> perm(static_cast<std::size_t>(inst.pool.size()));
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  const ExampleTable shuffled = inst.pool.Select(perm);
  const Vector w = Vec({0.1, -0.2, 0.3, 0.05});
  EXPECT_NEAR(RiskValue(inst.loss, w, inst.pool), RiskValue(inst.loss, w, shuffled), 1e-13);
}

TEST(ProblemConstants, PhaseRetrievalRho) {
  const ProblemConstants k =
      CertifyConstants(LossProblem::PhaseRetrieval(2), Table({{{1, 1}, 0}}), 1.0);
  EXPECT_DOUBLE_EQ(k.weak_convexity, 4.0);
  EXPECT_FALSE(k.smoothness.has_value());
}

TEST(ProblemConstants, Quadratic) {
  const ProblemConstants k = CertifyConstants(LossProblem::Quadratic(1), Points({-0.5, 2.0}), 3.0);
  EXPECT_DOUBLE_EQ(*k.smoothness, 1.0);
  EXPECT_DOUBLE_EQ(k.lipschitz, 5.0);
  EXPECT_EQ(k.weak_convexity, 0.0);
}

TEST(ProblemConstants, AbsoluteRegression) {
  const ProblemConstants k = CertifyConstants(
      LossProblem::AbsoluteRegression(2), Table({{{3, 4}, 1}, {{1, 0}, 0}}), 1.0);
  EXPECT_DOUBLE_EQ(k.lipschitz, 5.0);
  EXPECT_EQ(k.weak_convexity, 0.0);
  EXPECT_FALSE(k.smoothness.has_value());
}

TEST(SgcRatio, IdenticalLossesGiveOne) {
  EXPECT_DOUBLE_EQ(SgcRatio(LossProblem::Quadratic(1), Points({1.0, 1.0}), Vec({0})), 1.0);
}

TEST(SgcRatio, CancellingGradientsGiveInfinity) {
  EXPECT_TRUE(std::isinf(SgcRatio(LossProblem::Quadratic(1), Points({1.0, -1.0}), Vec({0}))));
}

TEST(SgcRatio, SingleExampleGivesOne) {
  EXPECT_DOUBLE_EQ(SgcRatio(LossProblem::Quadratic(1), Points({3.0}), Vec({0.5})), 1.0);
  EXPECT_DOUBLE_EQ(SgcRatio(LossProblem::Quadratic(1), Points({3.0}), Vec({3.0})), 1.0);
}

TEST(RelaxedGrowth, QuadraticIdentity) {
  const std::vector<Vector> probes = {Vec({-4}), Vec({0}), Vec({2.5}), Vec({10})};
  const Dataset s = Points({0.0, 1.0, 3.0});
  EXPECT_TRUE(CheckRelaxedGrowth(LossProblem::Quadratic(1), s, probes, {2.0, 0.0}).holds);
  const GrowthCheck weak = CheckRelaxedGrowth(LossProblem::Quadratic(1), s, probes, {1.0, 0.0});
  EXPECT_FALSE(weak.holds);
  EXPECT_GT(weak.max_violation, 0.0);
}

TEST(RelaxedGrowth, LargeOffsetAlwaysPasses) {
  const std::vector<Vector> probes = {Vec({0.2, 0.1}), Vec({-0.5, 0.4})};
  const ExampleTable s = Table({{{1, 1}, 0.5}, {{0.2, -1}, 0.1}});
  // ||grad||^2 <= (2 |<a,w>| ||a||^2)^2 <= 2.25^2 here.
  EXPECT_TRUE(CheckRelaxedGrowth(LossProblem::PhaseRetrieval(2), s, probes, {0.0, 100.0}).holds);
}

// Central differences on smooth problems.
TEST(LossProperties, SmoothGradientsMatchFiniteDifferences) {
  CounterRng rng(5, Substream::kData);
  for (const LossProblem& loss : {LossProblem::SmoothedRegression(3), LossProblem::Quadratic(3)}) {
    for (int k = 0; k < 100; ++k) {
      Vector w(3), x(3);
      for (Index j = 0; j < 3; ++j) {
        w[j] = rng.Normal();
        x[j] = rng.Normal();
      }
      const Example z{x, rng.Normal()};
      const Vector g = loss.Evaluate(w, z).subgradient;
      const double h = 1e-6;
      Vector fd(3);
      for (Index j = 0; j < 3; ++j) {
        Vector up = w, down = w;
        up[j] += h;
        down[j] -= h;
        fd[j] = (loss.Evaluate(up, z).value - loss.Evaluate(down, z).value) / (2 * h);
      }
      EXPECT_LE((fd - g).norm(), 1e-5 * std::max(1.0, g.norm())) << ToString(loss.kind());
    }
  }
}

TEST(LossProperties, SubgradientInequality) {
  GeneratorSpec spec;
  spec.dim = 3;
  spec.pool_size = 50;
  spec.noise = 0.3;
  spec.outlier_fraction = 0.2;
  spec.offset_norm = 0.5;
  spec.radius = 2.0;
  CounterRng rng(9, Substream::kData);
  for (ProblemKind kind : {ProblemKind::kAbsoluteRegression, ProblemKind::kPhaseRetrieval}) {
    spec.kind = kind;
    const ProblemInstance inst = GenerateInstance(spec);
    const double rho = inst.constants.weak_convexity;
    for (int k = 0; k < 200; ++k) {
      Vector u(3), w(3);
      for (Index j = 0; j < 3; ++j) {
        u[j] = rng.Normal();
        w[j] = rng.Normal();
      }
      const Example z = inst.pool.example(static_cast<Index>(rng.Below(50)));
      const LossEval at_w = inst.loss.Evaluate(w, z);
      // f + (rho/2)||.||^2 is convex, so its subgradient inequality holds.
      const double lhs = inst.loss.Evaluate(u, z).value + 0.5 * rho * u.squaredNorm();
      const double rhs = at_w.value + 0.5 * rho * w.squaredNorm() +
                         (u - w).dot(at_w.subgradient + rho * w);
      EXPECT_GE(lhs, rhs - 1e-10) << ToString(kind);
    }
  }
}

TEST(LossProperties, PhaseRetrievalSignSymmetry) {
  const LossProblem pr = LossProblem::PhaseRetrieval(3);
  CounterRng rng(3, Substream::kData);
  for (int k = 0; k < 50; ++k) {
    Vector w(3), a(3);
    for (Index j = 0; j < 3; ++j) {
      w[j] = rng.Normal();
      a[j] = rng.Normal();
    }
    const Example z{a, rng.Uniform()};
    EXPECT_EQ(pr.Evaluate(w, z).value, pr.Evaluate(-w, z).value);
  }
}

TEST(Generator, DeterministicAndCertified) {
  GeneratorSpec spec;
  spec.dim = 5;
  spec.pool_size = 300;
  spec.seed = 42;
  spec.feature_norm = 2.0;
  const ProblemInstance a = GenerateInstance(spec);
  const ProblemInstance b = GenerateInstance(spec);
  EXPECT_EQ(a.pool.feature_matrix(), b.pool.feature_matrix());
  EXPECT_EQ(a.pool.targets(), b.pool.targets());
  for (Index i = 0; i < a.pool.size(); ++i) EXPECT_NEAR(a.pool.features(i).norm(), 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(a.constants.weak_convexity, 2.0 * 4.0);
  spec.seed = 43;
  EXPECT_NE(GenerateInstance(spec).pool.targets(), a.pool.targets());
}

TEST(ProblemKinds, RoundTripNames) {
  for (ProblemKind k : {ProblemKind::kPhaseRetrieval, ProblemKind::kAbsoluteRegression,
                        ProblemKind::kSmoothedRegression, ProblemKind::kQuadratic,
                        ProblemKind::kConstant}) {
    EXPECT_EQ(ProblemKindFromString(ToString(k)), k);
  }
  EXPECT_THROW(ProblemKindFromString("svrg"), ConfigError);
}

}  // namespace
}  // namespace wcopt
