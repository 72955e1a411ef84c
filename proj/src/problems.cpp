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

#include "wcopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wcopt/errors.hpp"
#include "wcopt/rng.hpp"

namespace wcopt {
namespace {

// Above this many scalar products a risk sum switches to pairwise blocks.
constexpr double kPairwiseThreshold = 1e6;
constexpr Index kPairwiseBlock = 256;

double Sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }



// |c|, Huber-smoothed when tau > 0.
OuterEval AbsOuter(double c, double tau) {
  if (tau > 0.0 && std::abs(c) <= tau) {
    return {0.5 * c * c / tau, c / tau, 1.0 / tau};
  }
  return {std::abs(c) - (tau > 0.0 ? 0.5 * tau : 0.0), Sign(c), 0.0};
}

OuterEval LogSquareOuter(double c) {
  const double s = 1.0 + c * c;
  return {std::log1p(c * c), 2.0 * c / s, 2.0 * (1.0 - c * c) / (s * s)};
}

void AccumulateRange(const LossProblem& problem, const Vector& w,
                     const ExampleTable& sample, Index lo, Index hi,
                     double& value, Vector& grad) {
  if (static_cast<double>(hi - lo) * static_cast<double>(sample.dim()) <=
          kPairwiseThreshold ||
      hi - lo <= kPairwiseBlock) {
    for (Index i = lo; i < hi; ++i) {
      value += problem.Accumulate(w, sample.features(i), sample.target(i), 1.0,
                                  &grad);
    }
    return;
  }
  const Index mid = lo + (hi - lo) / 2;
  double left_value = 0.0;
  Vector left_grad = Vector::Zero(grad.size());
  AccumulateRange(problem, w, sample, lo, mid, left_value, left_grad);
  double right_value = 0.0;
  Vector right_grad = Vector::Zero(grad.size());
  AccumulateRange(problem, w, sample, mid, hi, right_value, right_grad);
  value += left_value + right_value;
  grad += left_grad + right_grad;
}

Vector RandomDirection(CounterRng& rng, Index dim) {
  Vector v(dim);
  do {
    for (Index j = 0; j < dim; ++j) v[j] = rng.Normal();
  } while (v.norm() == 0.0);
  return v / v.norm();
}

}  // namespace

std::string_view ToString(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kPhaseRetrieval: return "phase_retrieval";
    case ProblemKind::kAbsoluteRegression: return "absolute_regression";
    case ProblemKind::kSmoothedRegression: return "smoothed_regression";
    case ProblemKind::kQuadratic: return "quadratic";
    case ProblemKind::kConstant: return "constant";
  }
  return "unknown";
}

ProblemKind ProblemKindFromString(std::string_view name) {
  for (ProblemKind k :
       {ProblemKind::kPhaseRetrieval, ProblemKind::kAbsoluteRegression,
        ProblemKind::kSmoothedRegression, ProblemKind::kQuadratic,
        ProblemKind::kConstant}) {
    if (ToString(k) == name) return k;
  }
  throw ConfigError("unknown problem kind '" + std::string(name) + "'");
}

LossProblem::LossProblem(ProblemKind kind, Index dim, Vector offset,
                         double level)
    : kind_(kind), dim_(dim), offset_(std::move(offset)), level_(level) {
  if (dim_ < 1) throw ConfigError("problem dimension must be >= 1");
  if (offset_.size() == 0) offset_ = Vector::Zero(dim_);
  if (offset_.size() != dim_) {
    throw ConfigError("offset has dimension " + std::to_string(offset_.size()) +
                      ", expected " + std::to_string(dim_));
  }
  if (!offset_.allFinite() || !std::isfinite(level_)) {
    throw ConfigError("problem parameters must be finite");
  }
}

LossProblem LossProblem::PhaseRetrieval(Index dim, Vector offset) {
  return LossProblem(ProblemKind::kPhaseRetrieval, dim, std::move(offset), 0.0);
}
LossProblem LossProblem::AbsoluteRegression(Index dim) {
  return LossProblem(ProblemKind::kAbsoluteRegression, dim, {}, 0.0);
}
LossProblem LossProblem::SmoothedRegression(Index dim) {
  return LossProblem(ProblemKind::kSmoothedRegression, dim, {}, 0.0);
}
LossProblem LossProblem::Quadratic(Index dim) {
  return LossProblem(ProblemKind::kQuadratic, dim, {}, 0.0);
}
LossProblem LossProblem::Constant(Index dim, double level) {
  if (level < 0.0) throw ConfigError("constant loss level must be >= 0");
  return LossProblem(ProblemKind::kConstant, dim, {}, level);
}

bool LossProblem::is_smooth() const {
  return kind_ == ProblemKind::kSmoothedRegression ||
         kind_ == ProblemKind::kQuadratic || kind_ == ProblemKind::kConstant;
}

bool LossProblem::is_convex() const {
  return kind_ == ProblemKind::kAbsoluteRegression ||
         kind_ == ProblemKind::kQuadratic || kind_ == ProblemKind::kConstant;
}

bool LossProblem::has_kinks() const {
  return kind_ == ProblemKind::kPhaseRetrieval ||
         kind_ == ProblemKind::kAbsoluteRegression;
}

void LossProblem::CheckDims(const Vector& w) const {
  if (w.size() != dim_) {
    throw ConfigError("parameter vector has dimension " +
                      std::to_string(w.size()) + ", problem expects " +
                      std::to_string(dim_));
  }
}

double LossProblem::Project(const Vector& w,
                            const Eigen::Ref<const Vector>& x) const {
  if (kind_ == ProblemKind::kPhaseRetrieval) return x.dot(w + offset_);
  return x.dot(w);
}

InnerMap LossProblem::Inner(double u, double y) const {
  if (kind_ == ProblemKind::kPhaseRetrieval) return {u * u - y, 2.0 * u, 2.0};
  return {u - y, 1.0, 0.0};
}

OuterEval LossProblem::Outer(double c, double tau) const {
  if (kind_ == ProblemKind::kSmoothedRegression) return LogSquareOuter(c);
  return AbsOuter(c, tau);
}

LossEval LossProblem::Evaluate(const Vector& w, const Example& z) const {
  CheckDims(w);
  if (z.features.size() != dim_) {
    throw ConfigError("example has dimension " +
                      std::to_string(z.features.size()) + ", problem expects " +
                      std::to_string(dim_));
  }
  LossEval out;
  out.subgradient = Vector::Zero(dim_);
  out.value = Accumulate(w, z.features, z.target, 1.0, &out.subgradient);
  return out;
}

double LossProblem::Accumulate(const Vector& w,
                               const Eigen::Ref<const Vector>& x, double y,
                               double weight, Vector* grad) const {
  switch (kind_) {
    case ProblemKind::kConstant:
      return level_;
    case ProblemKind::kQuadratic: {
      const Vector diff = w - x;
      if (grad != nullptr) *grad += weight * diff;
      return 0.5 * diff.squaredNorm();
    }
    case ProblemKind::kPhaseRetrieval:
    case ProblemKind::kAbsoluteRegression: {
      const InnerMap in = Inner(Project(w, x), y);
      if (grad != nullptr) *grad += (weight * Sign(in.c) * in.dc) * x;
      return std::abs(in.c);
    }
    case ProblemKind::kSmoothedRegression: {
      const InnerMap in = Inner(Project(w, x), y);
      const OuterEval h = LogSquareOuter(in.c);
      if (grad != nullptr) *grad += (weight * h.d1 * in.dc) * x;
      return h.value;
    }
  }
  return 0.0;
}

double LossProblem::AccumulateSecondOrder(const Vector& w,
                                          const Eigen::Ref<const Vector>& x,
                                          double y, double tau, double weight,
                                          Vector& grad, Matrix& hess) const {
  switch (kind_) {
    case ProblemKind::kConstant:
      return level_;
    case ProblemKind::kQuadratic: {
      const Vector diff = w - x;
      grad += weight * diff;
      hess.diagonal().array() += weight;
      return 0.5 * diff.squaredNorm();
    }
    case ProblemKind::kPhaseRetrieval:
    case ProblemKind::kAbsoluteRegression:
    case ProblemKind::kSmoothedRegression: {
      const InnerMap in = Inner(Project(w, x), y);
      const OuterEval h = Outer(in.c, tau);
      grad += (weight * h.d1 * in.dc) * x;
      const double curvature = h.d2 * in.dc * in.dc + h.d1 * in.d2c;
      if (curvature != 0.0) {
        hess.selfadjointView<Eigen::Lower>().rankUpdate(x, weight * curvature);
      }
      return h.value;
    }
  }
  return 0.0;
}

RiskEval EvaluateRisk(const LossProblem& problem, const Vector& w,
                      const ExampleTable& sample) {
  if (sample.empty()) throw ConfigError("risk of an empty sample");
  problem.CheckDims(w);
  if (sample.dim() != problem.dim()) {
    throw ConfigError("sample dimension " + std::to_string(sample.dim()) +
                      " does not match problem dimension " +
                      std::to_string(problem.dim()));
  }
  RiskEval out;
  out.subgradient = Vector::Zero(problem.dim());
  AccumulateRange(problem, w, sample, 0, sample.size(), out.value,
                  out.subgradient);
  const double n = static_cast<double>(sample.size());
  out.value /= n;
  out.subgradient /= n;
  return out;
}

double RiskValue(const LossProblem& problem, const Vector& w,
                 const ExampleTable& sample) {
  return EvaluateRisk(problem, w, sample).value;
}

ProblemConstants CertifyConstants(const LossProblem& problem,
                                  const ExampleTable& pool, double radius) {
  if (radius < 0.0) throw ConfigError("certification radius must be >= 0");
  if (pool.empty()) throw ConfigError("cannot certify constants on an empty pool");
  double max_norm = 0.0;
  for (Index i = 0; i < pool.size(); ++i) {
    max_norm = std::max(max_norm, pool.features(i).norm());
  }
  const double max_sq = max_norm * max_norm;

  ProblemConstants k;
  k.radius = radius;
  switch (problem.kind()) {
    case ProblemKind::kPhaseRetrieval: {
      // c(w) = <a, w + w0>^2 - b has a (2||a||^2)-Lipschitz Jacobian and
      // |.| is 1-Lipschitz, so rho = 2 max ||a||^2.
      const double reach = radius + problem.offset().norm();
      k.weak_convexity = 2.0 * max_sq;
      k.lipschitz = 2.0 * reach * max_sq;
      double bound = 0.0;
      for (Index i = 0; i < pool.size(); ++i) {
        const double top = pool.features(i).squaredNorm() * reach * reach;
        const double b = pool.target(i);
        bound = std::max({bound, std::abs(top - b), std::abs(b)});
      }
      k.value_bound = bound;
      break;
    }
    case ProblemKind::kAbsoluteRegression: {
      k.lipschitz = max_norm;
      double bound = 0.0;
      for (Index i = 0; i < pool.size(); ++i) {
        bound = std::max(bound, pool.features(i).norm() * radius +
                                    std::abs(pool.target(i)));
      }
      k.value_bound = bound;
      break;
    }
    case ProblemKind::kSmoothedRegression: {
      // h(r) = log(1 + r^2): |h'| <= 1, -1/4 <= h'' <= 2.
      k.lipschitz = max_norm;
      k.weak_convexity = 0.25 * max_sq;
      k.smoothness = 2.0 * max_sq;
      double bound = 0.0;
      for (Index i = 0; i < pool.size(); ++i) {
        const double r = pool.features(i).norm() * radius + std::abs(pool.target(i));
        bound = std::max(bound, std::log1p(r * r));
      }
      k.value_bound = bound;
      break;
    }
    case ProblemKind::kQuadratic: {
      k.lipschitz = radius + max_norm;
      k.smoothness = 1.0;
      k.value_bound = 0.5 * (radius + max_norm) * (radius + max_norm);
      break;
    }
    case ProblemKind::kConstant: {
      k.smoothness = 0.0;
      k.value_bound = problem.level();
      break;
    }
  }
  return k;
}

double SgcRatio(const LossProblem& problem, const ExampleTable& sample,
                const Vector& w) {
  if (sample.empty()) throw ConfigError("SGC ratio of an empty sample");
  problem.CheckDims(w);
  double numerator = 0.0;
  Vector mean = Vector::Zero(problem.dim());
  Vector g(problem.dim());
  for (Index i = 0; i < sample.size(); ++i) {
    g.setZero();
    problem.Accumulate(w, sample.features(i), sample.target(i), 1.0, &g);
    numerator += g.squaredNorm();
    mean += g;
  }
  const double n = static_cast<double>(sample.size());
  numerator /= n;
  mean /= n;
  const double denominator = mean.squaredNorm();
  // Cancellation in the mean leaves rounding residue; treat it as zero.
  const double eps = std::numeric_limits<double>::epsilon();
  if (denominator <= eps * eps * numerator || denominator == 0.0) {
    return numerator > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  return numerator / denominator;
}

GrowthCheck CheckRelaxedGrowth(const LossProblem& problem,
                               const ExampleTable& sample,
                               std::span<const Vector> probes,
                               const GrowthCondition& condition) {
  if (sample.empty()) throw ConfigError("growth check on an empty sample");
  if (condition.b1 < 0.0 || condition.b2 < 0.0) {
    throw ConfigError("growth constants must be >= 0");
  }
  GrowthCheck out;
  out.max_violation = -std::numeric_limits<double>::infinity();
  Vector g(problem.dim());
  for (const Vector& w : probes) {
    problem.CheckDims(w);
    if (!w.allFinite()) throw ConfigError("probe point is not finite");
    double sq = 0.0;
    double value = 0.0;
    for (Index i = 0; i < sample.size(); ++i) {
      g.setZero();
      value += problem.Accumulate(w, sample.features(i), sample.target(i), 1.0, &g);
      sq += g.squaredNorm();
    }
    const double n = static_cast<double>(sample.size());
    const double lhs = sq / n;
    const double rhs = condition.b1 * (value / n) + condition.b2;
    const double margin = lhs - rhs;
    out.max_violation = std::max(out.max_violation, margin);
    if (margin > 1e-12 * std::max(1.0, std::abs(rhs))) out.holds = false;
  }
  if (probes.empty()) out.max_violation = 0.0;
  return out;
}

ProblemInstance GenerateInstance(const GeneratorSpec& spec) {
  if (spec.dim < 1) throw ConfigError("generator: dim must be >= 1");
  if (spec.pool_size < 1) throw ConfigError("generator: pool_size must be >= 1");
  if (spec.outlier_fraction < 0.0 || spec.outlier_fraction > 1.0) {
    throw ConfigError("generator: outlier_fraction must lie in [0, 1]");
  }
  if (spec.feature_norm <= 0.0 || spec.noise < 0.0 || spec.radius < 0.0) {
    throw ConfigError("generator: feature_norm > 0, noise >= 0, radius >= 0");
  }
  CounterRng rng(spec.seed, Substream::kData);
  const Index d = spec.dim;
  const Index m = spec.pool_size;

  ProblemInstance out;
  out.planted = spec.planted_norm * RandomDirection(rng, d);
  Vector offset = Vector::Zero(d);
  if (spec.kind == ProblemKind::kPhaseRetrieval && spec.offset_norm > 0.0) {
    offset = spec.offset_norm * RandomDirection(rng, d);
  }

  Matrix features(d, m);
  Vector targets(m);
  for (Index i = 0; i < m; ++i) {
    const Vector a = spec.feature_norm * RandomDirection(rng, d);
    const double noise = spec.noise * rng.Normal();
    const bool outlier = rng.Uniform() < spec.outlier_fraction;
    const double u = a.dot(out.planted);
    const double scale = spec.feature_norm * spec.planted_norm;
    double b = 0.0;
    switch (spec.kind) {
      case ProblemKind::kPhaseRetrieval:
        b = outlier ? 3.0 * scale * scale * rng.Uniform() : u * u + noise;
        break;
      case ProblemKind::kAbsoluteRegression:
      case ProblemKind::kSmoothedRegression:
        b = outlier ? 3.0 * scale * (2.0 * rng.Uniform() - 1.0) : u + noise;
        break;
      case ProblemKind::kQuadratic:
      case ProblemKind::kConstant:
        b = 0.0;
        break;
    }
    if (spec.kind == ProblemKind::kQuadratic) {
      // Quadratic examples are points x around the planted center.
      Vector x(d);
      for (Index j = 0; j < d; ++j) x[j] = out.planted[j] + spec.noise * rng.Normal();
      features.col(i) = x;
    } else {
      features.col(i) = a;
    }
    targets[i] = b;
  }

  switch (spec.kind) {
    case ProblemKind::kPhaseRetrieval:
      out.loss = LossProblem::PhaseRetrieval(d, offset);
      break;
    case ProblemKind::kAbsoluteRegression:
      out.loss = LossProblem::AbsoluteRegression(d);
      break;
    case ProblemKind::kSmoothedRegression:
      out.loss = LossProblem::SmoothedRegression(d);
      break;
    case ProblemKind::kQuadratic:
      out.loss = LossProblem::Quadratic(d);
      break;
    case ProblemKind::kConstant:
      out.loss = LossProblem::Constant(d, spec.level);
      break;
  }
  out.pool = PopulationPool(ExampleTable(std::move(features), std::move(targets)));
  out.constants = CertifyConstants(out.loss, out.pool, spec.radius);
  // The planted model minimizes the noiseless population risk; in the
  // optimizer's coordinates (w = p - offset) its norm is what the convex
  // schedule needs.
  out.constants.minimizer_norm = (out.planted - offset).norm();
  if (spec.kind == ProblemKind::kPhaseRetrieval) {
    // Both +planted and -planted are minimizers.
    out.constants.minimizer_norm = std::min(*out.constants.minimizer_norm,
                                            (out.planted + offset).norm());
  }
  return out;
}

}  // namespace wcopt
