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

#ifndef WCOPT_PROBLEMS_HPP_
#define WCOPT_PROBLEMS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wcopt/types.hpp"

namespace wcopt {

// Built-in loss families.
//   kPhaseRetrieval     |<a, w + w0>^2 - b|       weakly convex, nonsmooth
//   kAbsoluteRegression |<a, w> - b|              convex, nonsmooth
//   kSmoothedRegression log(1 + (<a, w> - b)^2)   nonconvex, smooth
//   kQuadratic          0.5 * ||w - x||^2         convex, smooth (target unused)
//   kConstant           c                          sanity
enum class ProblemKind {
  kPhaseRetrieval,
  kAbsoluteRegression,
  kSmoothedRegression,
  kQuadratic,
  kConstant,
};

std::string_view ToString(ProblemKind kind);
// Throws ConfigError on unknown names.
ProblemKind ProblemKindFromString(std::string_view name);

// Regularity constants certified on a ball of radius `radius` around w = 0.
// smoothness is absent exactly for nonsmooth problems.
struct ProblemConstants {
  double lipschitz = 0.0;       // G
  double weak_convexity = 0.0;  // rho
  std::optional<double> smoothness;      // L
  std::optional<double> value_bound;     // B
  std::optional<double> radius;          // R
  std::optional<double> minimizer_norm;  // ||w*||, used by the convex schedule
  std::optional<double> sgc_rho;         // strong growth constant
};

// Relaxed growth: E||grad f||^2 <= b1 * E f + b2.
struct GrowthCondition {
  double b1 = 0.0;
  double b2 = 0.0;
};

struct LossEval {
  double value = 0.0;
  Vector subgradient;
};

// Composite structure shared by the non-quadratic kinds:
// f(w; a, b) = h(c(u)), u = <a, w + offset>, grad f = h'(c) c'(u) a.
struct InnerMap {
  double c = 0.0;
  double dc = 0.0;   // dc/du
  double d2c = 0.0;  // d2c/du2
};

// Outer function h and its first two derivatives at c.
struct OuterEval {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

class LossProblem {
 public:
  static LossProblem PhaseRetrieval(Index dim, Vector offset = {});
  static LossProblem AbsoluteRegression(Index dim);
  static LossProblem SmoothedRegression(Index dim);
  static LossProblem Quadratic(Index dim);
  static LossProblem Constant(Index dim, double level);

  ProblemKind kind() const { return kind_; }
  Index dim() const { return dim_; }
  // Zero vector unless this is an offset phase-retrieval instance.
  const Vector& offset() const { return offset_; }
  double level() const { return level_; }

  bool is_smooth() const;
  bool is_convex() const;
  // True when the outer function is |.|, i.e. the loss has kinks at c = 0.
  bool has_kinks() const;

  // loss_eval. Subgradient selection at kinks uses sign(0) = 0.
  LossEval Evaluate(const Vector& w, const Example& z) const;

  // Hot path for risk sums: returns f(w; x, y) and, when grad != nullptr,
  // adds weight * subgradient into *grad.
  double Accumulate(const Vector& w, const Eigen::Ref<const Vector>& x,
                    double y, double weight, Vector* grad) const;

  // Same, with |.| replaced by the Huber function of width tau > 0, and the
  // Hessian added into the lower triangle of *hess. For tau == 0 the kinks
  // contribute no curvature (valid only away from c = 0).
  double AccumulateSecondOrder(const Vector& w,
                               const Eigen::Ref<const Vector>& x, double y,
                               double tau, double weight, Vector& grad,
                               Matrix& hess) const;

  // u = <x, w + offset>; only meaningful for composite kinds.
  double Project(const Vector& w, const Eigen::Ref<const Vector>& x) const;
  InnerMap Inner(double u, double y) const;
  // h(c); |.| is Huber-smoothed with width tau when tau > 0.
  OuterEval Outer(double c, double tau) const;

  // Throws ConfigError when w or x has the wrong length.
  void CheckDims(const Vector& w) const;

 private:
  LossProblem(ProblemKind kind, Index dim, Vector offset, double level);

  ProblemKind kind_;
  Index dim_;
  Vector offset_;
  double level_ = 0.0;
};

struct RiskEval {
  double value = 0.0;
  Vector subgradient;
};

// Mean loss and mean subgradient over a sample, summed in ascending index
// order (pairwise blocks once d*n > 1e6). Throws ConfigError on an empty
// sample or a dimension mismatch.
RiskEval EvaluateRisk(const LossProblem& problem, const Vector& w,
                      const ExampleTable& sample);
double RiskValue(const LossProblem& problem, const Vector& w,
                 const ExampleTable& sample);

// Certified constants on the ball ||w|| <= radius, computed from the pool.
ProblemConstants CertifyConstants(const LossProblem& problem,
                                  const ExampleTable& pool, double radius);

// (1/n) sum ||grad f(w; z_i)||^2 / ||grad F_S(w)||^2. Returns +infinity when
// the denominator vanishes and the numerator does not, and 1 when both vanish.
double SgcRatio(const LossProblem& problem, const ExampleTable& sample,
                const Vector& w);

struct GrowthCheck {
  bool holds = true;
  // max over probes of E||grad f||^2 - (b1 E f + b2); <= 0 when it holds.
  double max_violation = 0.0;
};

GrowthCheck CheckRelaxedGrowth(const LossProblem& problem,
                               const ExampleTable& sample,
                               std::span<const Vector> probes,
                               const GrowthCondition& condition);

// ---------------------------------------------------------------------------
// Synthetic instances.

struct GeneratorSpec {
  ProblemKind kind = ProblemKind::kPhaseRetrieval;
  Index dim = 10;
  Index pool_size = 100000;
  std::uint64_t seed = 1;
  double feature_norm = 1.0;   // every feature vector has this norm
  double planted_norm = 1.0;   // ||w_planted||
  double offset_norm = 0.0;    // phase retrieval only
  double noise = 0.0;          // std of additive target noise
  double outlier_fraction = 0.0;
  double level = 1.0;          // constant loss only
  double radius = 1.0;         // ball on which constants are certified
};

struct ProblemInstance {
  LossProblem loss = LossProblem::Constant(1, 0.0);
  PopulationPool pool;
  ProblemConstants constants;
  // Generating model (empty when the instance was loaded from a file).
  Vector planted;
};

// Deterministic in spec.seed.
ProblemInstance GenerateInstance(const GeneratorSpec& spec);

}  // namespace wcopt

#endif  // WCOPT_PROBLEMS_HPP_
