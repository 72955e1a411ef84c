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
#include "wcopt/moreau.hpp"
#include "wcopt/problems.hpp"
#include "wcopt/rng.hpp"

namespace wcopt {
namespace {

using testing::Table;
using testing::Vec;

MoreauConfig WithLambda(double lambda, double tol = 1e-10) {
  MoreauConfig c;
  c.lambda = lambda;
  c.inner_tolerance = tol;
  return c;
}

// psi(w) = 0.5 ||w||^2 as a one-example quadratic risk at z = 0.
struct HalfSquaredNorm {
  LossProblem loss = LossProblem::Quadratic(2);
  ExampleTable sample = Table({{{0, 0}, 0}});
  RiskObjective objective() const { return {loss, sample, 0.0}; }
};

// psi(w) = |w| in one dimension.
struct AbsoluteValue {
  LossProblem loss = LossProblem::AbsoluteRegression(1);
  ExampleTable sample = Table({{{1}, 0}});
  RiskObjective objective() const { return {loss, sample, 0.0}; }
};

TEST(Prox, HalfSquaredNorm) {
  const HalfSquaredNorm q;
  const MoreauResult r = Prox(q.objective(), Vec({2, 0}), WithLambda(1.0));
  EXPECT_NEAR(r.prox_point[0], 1.0, 1e-10);
  EXPECT_NEAR(r.prox_point[1], 0.0, 1e-10);
  EXPECT_NEAR(r.envelope_value, 1.0, 1e-10);
  EXPECT_NEAR(r.envelope_gradient[0], 1.0, 1e-10);
  EXPECT_NEAR(EnvelopeValue(q.objective(), Vec({2, 0}), WithLambda(1.0)), 1.0, 1e-10);
  EXPECT_NEAR((EnvelopeGradient(q.objective(), Vec({2, 0}), WithLambda(1.0)) - Vec({1, 0})).norm(),
              0.0, 1e-10);
}

TEST(Prox, SoftThreshold) {
  const AbsoluteValue a;
  MoreauResult r = Prox(a.objective(), Vec({2}), WithLambda(0.5));
  EXPECT_NEAR(r.prox_point[0], 1.5, 1e-10);
  EXPECT_NEAR(r.envelope_value, 1.75, 1e-10);
  r = Prox(a.objective(), Vec({0.3}), WithLambda(0.5));
  EXPECT_NEAR(r.prox_point[0], 0.0, 1e-10);
  EXPECT_NEAR(r.envelope_value, 0.09, 1e-10);
}

TEST(Prox, LambdaAtOrAboveInverseRhoIsDomainError) {
  const LossProblem pr = LossProblem::PhaseRetrieval(2);
  const ExampleTable s = Table({{{1, 1}, 0.5}});
  const RiskObjective obj{pr, s, 4.0};
  EXPECT_THROW(Prox(obj, Vec({0.1, 0.2}), WithLambda(0.25)), DomainError);
  EXPECT_THROW(Prox(obj, Vec({0.1, 0.2}), WithLambda(1.0)), DomainError);
  EXPECT_NO_THROW(Prox(obj, Vec({0.1, 0.2}), WithLambda(0.125)));
}

TEST(Prox, IterationCapRaisesNonConverged) {
  GeneratorSpec spec;
  spec.dim = 5;
  spec.pool_size = 200;
  spec.noise = 0.1;
  spec.outlier_fraction = 0.1;
  spec.seed = 2;
  const ProblemInstance inst = GenerateInstance(spec);
  const RiskObjective obj{inst.loss, inst.pool, inst.constants.weak_convexity};
  MoreauConfig c = DefaultMoreauConfig(inst.constants.weak_convexity, 1e-12);
  c.inner_max_iters = 1;
  try {
    Prox(obj, Vector::Constant(5, 0.3), c);
    FAIL() << "expected NonConvergedError";
  } catch (const NonConvergedError& e) {
    EXPECT_EQ(e.best_iterate().size(), 5);
    EXPECT_GT(e.residual(), 1e-12);
  }
}

TEST(ProxOracle1d, ClosedForms) {
  EXPECT_DOUBLE_EQ(ProxOracle1d(ClosedFormKind::kAbsolute, 0.5, -2).prox_point[0], -1.5);
  EXPECT_DOUBLE_EQ(ProxOracle1d(ClosedFormKind::kQuadratic, 0.0, 3.7).prox_point[0], 3.7);
  EXPECT_DOUBLE_EQ(ProxOracle1d(ClosedFormKind::kAbsolute, 3.0, 2.0).prox_point[0], 0.0);
  EXPECT_THROW(ClosedFormKindFromString("huber"), UnsupportedError);
}

TEST(Prox, MatchesClosedFormsAtRandomPoints) {
  const HalfSquaredNorm q;
  const AbsoluteValue a;
  const LossProblem quad1 = LossProblem::Quadratic(1);
  const ExampleTable origin = Table({{{0}, 0}});
  CounterRng rng(77, Substream::kData);
  for (int k = 0; k < 100; ++k) {
    const double lambda = 0.01 + 2.0 * rng.Uniform();
    const double w = 6.0 * rng.Uniform() - 3.0;
    EXPECT_NEAR(Prox({quad1, origin, 0.0}, Vec({w}), WithLambda(lambda, 1e-9)).prox_point[0],
                ProxOracle1d(ClosedFormKind::kQuadratic, lambda, w).prox_point[0], 1e-8);
    EXPECT_NEAR(Prox(a.objective(), Vec({w}), WithLambda(lambda, 1e-9)).prox_point[0],
                ProxOracle1d(ClosedFormKind::kAbsolute, lambda, w).prox_point[0], 1e-8);
  }
}

class PhaseRetrievalEnvelope : public ::testing::Test {
 protected:
  void SetUp() override {
    GeneratorSpec spec;
    spec.dim = 2;
    spec.pool_size = 40;
    spec.offset_norm = 0.5;
    spec.noise = 0.1;
    spec.outlier_fraction = 0.1;
    spec.radius = 2.0;
    spec.seed = 99;
    inst_ = GenerateInstance(spec);
    config_ = DefaultMoreauConfig(inst_.constants.weak_convexity, 1e-8);
  }
  RiskObjective objective() const { return {inst_.loss, inst_.pool, inst_.constants.weak_convexity}; }

  ProblemInstance inst_;
  MoreauConfig config_;
};

TEST_F(PhaseRetrievalEnvelope, BelowRiskAndCertified) {
  CounterRng rng(4, Substream::kData);
  for (int k = 0; k < 100; ++k) {
    const Vector w = Vec({rng.Normal(), rng.Normal()});
    const MoreauResult r = Prox(objective(), w, config_);
    EXPECT_LE(r.envelope_value, RiskValue(inst_.loss, w, inst_.pool) + 1e-12);
    EXPECT_LE(r.inner_residual, config_.inner_tolerance);
    EXPECT_EQ(r.envelope_gradient, (w - r.prox_point) / config_.lambda);
    const double identity = RiskValue(inst_.loss, r.prox_point, inst_.pool) +
                            (w - r.prox_point).squaredNorm() / (2 * config_.lambda);
    EXPECT_NEAR(r.envelope_value, identity, 1e-10);
  }
}

TEST_F(PhaseRetrievalEnvelope, GradientMatchesFiniteDifferences) {
  CounterRng rng(5, Substream::kData);
  const double h = 1e-5;
  for (int k = 0; k < 20; ++k) {
    const Vector w = Vec({rng.Normal(), rng.Normal()});
    const Vector g = EnvelopeGradient(objective(), w, config_);
    Vector fd(2);
    for (Index j = 0; j < 2; ++j) {
      Vector up = w, down = w;
      up[j] += h;
      down[j] -= h;
      fd[j] = (EnvelopeValue(objective(), up, config_) - EnvelopeValue(objective(), down, config_)) /
              (2 * h);
    }
    EXPECT_LE((fd - g).norm(), 1e-4 * std::max(g.norm(), 1e-12));
  }
}

TEST(Prox, NonexpansiveOnConvexRisk) {
  GeneratorSpec spec;
  spec.kind = ProblemKind::kAbsoluteRegression;
  spec.dim = 3;
  spec.pool_size = 60;
  spec.noise = 0.2;
  spec.seed = 31;
  const ProblemInstance inst = GenerateInstance(spec);
  const RiskObjective obj{inst.loss, inst.pool, 0.0};
  const MoreauConfig c = WithLambda(0.7, 1e-9);
  CounterRng rng(6, Substream::kData);
  for (int k = 0; k < 30; ++k) {
    const Vector u = Vec({rng.Normal(), rng.Normal(), rng.Normal()});
    const Vector w = Vec({rng.Normal(), rng.Normal(), rng.Normal()});
    const double moved = (Prox(obj, u, c).prox_point - Prox(obj, w, c).prox_point).norm();
    EXPECT_LE(moved, (u - w).norm() + 4 * c.inner_tolerance * c.lambda);
  }
}

TEST(Prox, MinimizerIsFixedPoint) {
  GeneratorSpec spec;
  spec.kind = ProblemKind::kAbsoluteRegression;
  spec.dim = 3;
  spec.pool_size = 60;
  spec.noise = 0.2;
  spec.seed = 32;
  const ProblemInstance inst = GenerateInstance(spec);
  const RiskObjective obj{inst.loss, inst.pool, 0.0};
  const MoreauResult best = MinimizeConvexRisk(obj, Vector::Zero(3));
  const MoreauConfig c = WithLambda(0.5, 1e-9);
  const MoreauResult r = Prox(obj, best.prox_point, c);
  EXPECT_LE(r.envelope_gradient.norm(), 2 * c.inner_tolerance / c.lambda + 1e-9);
}

TEST(DefaultMoreauConfig, HalfInverseRho) {
  EXPECT_DOUBLE_EQ(DefaultMoreauConfig(4.0).lambda, 0.125);
  EXPECT_DOUBLE_EQ(DefaultMoreauConfig(0.0).lambda, 1.0);
}

}  // namespace
}  // namespace wcopt
