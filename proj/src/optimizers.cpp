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

#include "wcopt/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wcopt/errors.hpp"
#include "wcopt/rng.hpp"

namespace wcopt {
namespace {

template <typename Enum, std::size_t N>
Enum FromName(std::string_view name, const Enum (&all)[N],
              std::string_view what) {
  for (Enum e : all) {
    if (ToString(e) == name) return e;
  }
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(name) +
                    "'");
}

// ceil(x), tolerating x that should be an integer but carries rounding error.
std::int64_t CeilCount(double x) {
  const double c = std::ceil(x * (1.0 - 1e-12));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(c));
}

// n^{2/3} via cbrt so exact cubes stay exact.
double TwoThirdsPower(double n) {
  const double r = std::cbrt(n);
  return r * r;
}

bool RelativelyEqual(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

double Require(const std::optional<double>& value, std::string_view name,
               std::string_view regime) {
  if (!value.has_value() || !(*value > 0.0)) {
    throw ConfigError(std::string(regime) + " schedule needs a positive " +
                      std::string(name));
  }
  return *value;
}

}  // namespace

std::string_view ToString(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kAdaGradNorm: return "adagrad_norm";
    case OptimizerKind::kDpSgd: return "dp_sgd";
  }
  return "unknown";
}

std::string_view ToString(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kConstant: return "constant";
    case ScheduleKind::kInverseT: return "inverse_t";
    case ScheduleKind::kAdaGrad: return "adagrad";
  }
  return "unknown";
}

std::string_view ToString(OutputSelector selector) {
  switch (selector) {
    case OutputSelector::kAverage: return "average";
    case OutputSelector::kRandomIterate: return "random_iterate";
    case OutputSelector::kLast: return "last";
  }
  return "unknown";
}

std::string_view ToString(Regime regime) {
  switch (regime) {
    case Regime::kConvex: return "convex";
    case Regime::kNonconvexSmooth: return "nonconvex_smooth";
    case Regime::kSgc: return "sgc";
    case Regime::kWeaklyConvex: return "weakly_convex";
    case Regime::kAdaGrad: return "adagrad";
  }
  return "unknown";
}

OptimizerKind OptimizerKindFromString(std::string_view name) {
  static constexpr OptimizerKind kAll[] = {
      OptimizerKind::kSgd, OptimizerKind::kAdaGradNorm, OptimizerKind::kDpSgd};
  return FromName(name, kAll, "optimizer");
}

ScheduleKind ScheduleKindFromString(std::string_view name) {
  static constexpr ScheduleKind kAll[] = {
      ScheduleKind::kConstant, ScheduleKind::kInverseT, ScheduleKind::kAdaGrad};
  return FromName(name, kAll, "schedule");
}

OutputSelector OutputSelectorFromString(std::string_view name) {
  static constexpr OutputSelector kAll[] = {OutputSelector::kAverage,
                                            OutputSelector::kRandomIterate,
                                            OutputSelector::kLast};
  return FromName(name, kAll, "output selector");
}

Regime RegimeFromString(std::string_view name) {
  static constexpr Regime kAll[] = {Regime::kConvex, Regime::kNonconvexSmooth,
                                    Regime::kSgc, Regime::kWeaklyConvex,
                                    Regime::kAdaGrad};
  return FromName(name, kAll, "regime");
}

double StepSchedule::StepAt(std::int64_t t) const {
  if (kind == ScheduleKind::kInverseT) {
    return std::min(eta, c / static_cast<double>(t));
  }
  return eta;
}

PrivacyBudget PrivacyBudget::Canonical(double lipschitz,
                                       std::int64_t iterations, std::int64_t n,
                                       double epsilon, double delta) {
  const PrivacyCheck check = DpPrivacyPrecheck(iterations, n, epsilon, delta);
  if (!check.ok) {
    throw DomainError("privacy precondition fails for T=" +
                      std::to_string(iterations) + ", n=" + std::to_string(n));
  }
  PrivacyBudget budget;
  budget.epsilon = epsilon;
  budget.delta = delta;
  budget.beta = check.beta;
  budget.lipschitz = lipschitz;
  budget.sigma2 =
      DpNoiseScale(lipschitz, iterations, n, epsilon, delta, check.beta);
  return budget;
}

void OptimizerConfig::Validate() const {
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (!(schedule.eta > 0.0) || !std::isfinite(schedule.eta)) {
    throw ConfigError("step size eta must be positive and finite");
  }
  if (schedule.kind == ScheduleKind::kInverseT && !(schedule.c > 0.0)) {
    throw ConfigError("inverse_t schedule needs c > 0");
  }
  if (projection_radius.has_value() && !(*projection_radius > 0.0)) {
    throw ConfigError("projection radius must be positive");
  }
  if (kind == OptimizerKind::kAdaGradNorm) {
    if (schedule.kind != ScheduleKind::kAdaGrad) {
      throw ConfigError("adagrad_norm needs the adagrad schedule");
    }
    if (!(b0 > 0.0)) throw ConfigError("adagrad_norm needs b0 > 0");
  } else if (schedule.kind == ScheduleKind::kAdaGrad) {
    throw ConfigError("the adagrad schedule is only valid for adagrad_norm");
  }
  if (kind == OptimizerKind::kDpSgd && !privacy.has_value()) {
    throw ConfigError("dp_sgd refuses to run without a privacy budget");
  }
}

bool Trace::Samples(Index i) const {
  return std::find(index_sequence.begin(), index_sequence.end(), i) !=
         index_sequence.end();
}

Vector ProjectToBall(const Vector& w, double radius) {
  const double norm = w.norm();
  if (norm <= radius) return w;
  return w * (radius / norm);
}

IndexPlan PlanIndices(std::uint64_t seed, Index n, std::int64_t iterations,
                      OutputSelector selector) {
  IndexPlan plan;
  CounterRng rng(seed, Substream::kIndex);
  plan.indices.reserve(static_cast<std::size_t>(iterations));
  for (std::int64_t t = 0; t < iterations; ++t) {
    plan.indices.push_back(static_cast<Index>(rng.Below(static_cast<std::uint64_t>(n))));
  }
  if (selector == OutputSelector::kRandomIterate && iterations > 0) {
    plan.output_index =
        1 + static_cast<std::int64_t>(rng.Below(static_cast<std::uint64_t>(iterations)));
  }
  return plan;
}

Trace RunOptimizer(const LossProblem& problem, const Dataset& sample,
                   const OptimizerConfig& config) {
  config.Validate();
  if (sample.empty()) throw ConfigError("optimizer needs a nonempty dataset");
  return RunOptimizerWithPlan(
      problem, sample, config,
      PlanIndices(config.seed, sample.size(), config.iterations, config.output));
}

Trace RunOptimizerWithPlan(const LossProblem& problem, const Dataset& sample,
                           const OptimizerConfig& config, IndexPlan plan) {
  config.Validate();
  if (sample.empty()) throw ConfigError("optimizer needs a nonempty dataset");
  if (sample.dim() != problem.dim()) {
    throw ConfigError("dataset dimension does not match the problem");
  }
  const Index n = sample.size();
  const Index d = problem.dim();
  const std::int64_t T = config.iterations;

  double sigma = 0.0;
  if (config.kind == OptimizerKind::kDpSgd) {
    const PrivacyBudget& p = *config.privacy;
    const PrivacyCheck check = DpPrivacyPrecheck(T, n, p.epsilon, p.delta);
    if (!check.ok) {
      throw ConfigError("dp_sgd refuses to run: privacy precondition fails");
    }
    if (!RelativelyEqual(p.beta, check.beta, 1e-12)) {
      throw ConfigError("dp_sgd refuses to run: beta is not 7T/(3 n^2 eps)");
    }
    const double expected =
        DpNoiseScale(p.lipschitz, T, n, p.epsilon, p.delta, p.beta);
    if (!RelativelyEqual(p.sigma2, expected, 1e-12)) {
      throw ConfigError("dp_sgd refuses to run: sigma2 does not match the "
                        "calibrated noise scale");
    }
    sigma = std::sqrt(p.sigma2);
  }

  if (static_cast<std::int64_t>(plan.indices.size()) != T) {
    throw ConfigError("index plan length does not match T");
  }
  for (Index i : plan.indices) {
    if (i < 0 || i >= n) throw ConfigError("index plan entry out of range");
  }
  const bool needs_r = config.output == OutputSelector::kRandomIterate && T > 0;
  if (needs_r != plan.output_index.has_value() ||
      (needs_r && (*plan.output_index < 1 || *plan.output_index > T))) {
    throw ConfigError("index plan output index does not match the selector");
  }
  Trace trace;
  trace.index_sequence = std::move(plan.indices);
  trace.output_index = plan.output_index;

  Vector w = Vector::Zero(d);
  Vector sum = Vector::Zero(d);
  Vector g(d);
  Vector chosen = w;
  if (config.record_iterates) {
    trace.iterates.reserve(static_cast<std::size_t>(T) + 1);
    trace.iterates.push_back(w);
  }
  double b_squared = config.b0 * config.b0;
  if (config.kind == OptimizerKind::kAdaGradNorm) {
    trace.b_values.reserve(static_cast<std::size_t>(T) + 1);
    trace.b_values.push_back(config.b0);
  }
  CounterRng noise_rng(config.seed, Substream::kNoise);

  for (std::int64_t t = 1; t <= T; ++t) {
    // w currently holds w_t.
    if (config.output == OutputSelector::kAverage) sum += w;
    if (trace.output_index && *trace.output_index == t) chosen = w;

    const Index i = trace.index_sequence[static_cast<std::size_t>(t - 1)];
    g.setZero();
    problem.Accumulate(w, sample.features(i), sample.target(i), 1.0, &g);

    switch (config.kind) {
      case OptimizerKind::kSgd:
        w -= config.schedule.StepAt(t) * g;
        break;
      case OptimizerKind::kAdaGradNorm: {
        b_squared += g.squaredNorm();
        const double b = std::sqrt(b_squared);
        trace.b_values.push_back(b);
        w -= (config.schedule.eta / b) * g;
        break;
      }
      case OptimizerKind::kDpSgd: {
        Vector noise(d);
        for (Index j = 0; j < d; ++j) noise[j] = sigma * noise_rng.Normal();
        w -= config.schedule.StepAt(t) * (g + noise);
        trace.noise_draws.push_back(std::move(noise));
        break;
      }
    }
    if (config.projection_radius) w = ProjectToBall(w, *config.projection_radius);
    if (config.record_iterates) trace.iterates.push_back(w);
  }

  if (T == 0) {
    trace.output = Vector::Zero(d);
  } else {
    switch (config.output) {
      case OutputSelector::kAverage:
        trace.output = sum / static_cast<double>(T);
        break;
      case OutputSelector::kRandomIterate:
        trace.output = chosen;
        break;
      case OutputSelector::kLast:
        trace.output = w;
        break;
    }
  }
  return trace;
}

double DpNoiseScale(double lipschitz, std::int64_t iterations, std::int64_t n,
                    double epsilon, double delta, double beta) {
  if (!(lipschitz > 0.0) || iterations <= 0 || n <= 0 || !(epsilon > 0.0)) {
    throw DomainError("dp_noise_scale: G, T, n and epsilon must be positive");
  }
  if (!(delta > 0.0) || !(delta <= 1.0)) {
    throw DomainError("dp_noise_scale: delta must lie in (0, 1]");
  }
  if (!(beta > 0.0) || beta >= 1.0) {
    throw DomainError("dp_noise_scale: beta must lie in (0, 1)");
  }
  const double nn = static_cast<double>(n);
  const double leading = 14.0 * lipschitz * lipschitz *
                         static_cast<double>(iterations) /
                         (beta * nn * nn * epsilon);
  return leading * (std::log(1.0 / delta) / ((1.0 - beta) * epsilon) + 1.0);
}

PrivacyCheck DpPrivacyPrecheck(std::int64_t iterations, std::int64_t n,
                               double epsilon, double delta) {
  if (iterations < 1 || n < 1 || !(epsilon > 0.0) || !(delta > 0.0) ||
      !(delta < 1.0)) {
    throw DomainError(
        "dp_privacy_precheck: need T, n >= 1, eps > 0, delta in (0, 1)");
  }
  const double T = static_cast<double>(iterations);
  const double nn = static_cast<double>(n);
  PrivacyCheck out;
  out.beta = 7.0 * T / (3.0 * nn * nn * epsilon);
  const bool first = epsilon >= 14.0 * T / (3.0 * nn * nn);
  const bool second = std::log(1.0 / delta) / epsilon <=
                      std::sqrt(nn) / (3.0 * std::sqrt(3.0)) - 5.0 / 3.0;
  out.ok = first && second;
  return out;
}

TunedSchedule TuneSchedule(Regime regime, std::int64_t n,
                           const ProblemConstants& constants) {
  if (n < 1) throw ConfigError("schedule needs n >= 1");
  const double nn = static_cast<double>(n);
  const std::string_view name = ToString(regime);
  const std::optional<double> lipschitz = constants.lipschitz;
  TunedSchedule out;
  switch (regime) {
    case Regime::kConvex: {
      const double G = Require(lipschitz, "lipschitz G", name);
      const double B = Require(constants.value_bound, "value bound B", name);
      const double W = Require(constants.minimizer_norm.has_value()
                                   ? constants.minimizer_norm
                                   : constants.radius,
                               "minimizer norm (or radius)", name);
      out.iterations = CeilCount(TwoThirdsPower(nn) * G * W / B);
      out.schedule = {ScheduleKind::kConstant, W / (std::cbrt(nn) * G), 1.0};
      break;
    }
    case Regime::kNonconvexSmooth: {
      const double G = Require(lipschitz, "lipschitz G", name);
      out.iterations = CeilCount(TwoThirdsPower(nn) / TwoThirdsPower(G));
      out.schedule = {ScheduleKind::kConstant,
                      1.0 / (G * std::sqrt(static_cast<double>(out.iterations))),
                      1.0};
      break;
    }
    case Regime::kSgc: {
      const double G = Require(lipschitz, "lipschitz G", name);
      const double L = Require(constants.smoothness, "smoothness L", name);
      const double rho = Require(constants.sgc_rho, "sgc_rho", name);
      out.iterations = CeilCount(std::sqrt(L * rho * nn) / G);
      out.schedule = {ScheduleKind::kConstant, 1.0 / (rho * L), 1.0};
      break;
    }
    case Regime::kWeaklyConvex: {
      const double G = Require(lipschitz, "lipschitz G", name);
      const double rho = Require(constants.weak_convexity, "weak convexity rho", name);
      const double R = Require(constants.radius, "radius R", name);
      out.iterations =
          CeilCount(TwoThirdsPower(nn) / (TwoThirdsPower(R) * std::cbrt(rho)));
      out.schedule = {
          ScheduleKind::kConstant,
          1.0 / (G * std::sqrt(rho * static_cast<double>(out.iterations))), 1.0};
      break;
    }
    case Regime::kAdaGrad: {
      out.iterations = CeilCount(TwoThirdsPower(nn));
      const double eta =
          constants.radius.has_value() && *constants.radius > 0.0 ? *constants.radius : 1.0;
      out.schedule = {ScheduleKind::kAdaGrad, eta, 1.0};
      break;
    }
  }
  return out;
}

}  // namespace wcopt
