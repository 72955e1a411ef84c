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


#include "wcopt/generalization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wcopt/errors.hpp"
#include "wcopt/parallel.hpp"
#include "wcopt/rng.hpp"

namespace wcopt {
namespace {

struct PoolGradient {
  Vector gradient;
  double variance = 0.0;
};

// grad F at w and E_Z ||grad f(w; Z) - grad F(w)||^2, two passes.
PoolGradient PopulationGradient(const LossProblem& problem,
                                const ExampleTable& pool, const Vector& w) {
  PoolGradient out;
  out.gradient = EvaluateRisk(problem, w, pool).subgradient;
  Vector g(problem.dim());
  double sum = 0.0;
  for (Index z = 0; z < pool.size(); ++z) {
    g.setZero();
    problem.Accumulate(w, pool.features(z), pool.target(z), 1.0, &g);
    sum += (g - out.gradient).squaredNorm();
  }
  out.variance = sum / static_cast<double>(pool.size());
  return out;
}

double Mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double StdError(const std::vector<double>& values) {
  const std::size_t count = values.size();
  if (count < 2) return 0.0;
  const double mean = Mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(count - 1) / static_cast<double>(count));
}

}  // namespace

std::string_view ToString(GapKind kind) {
  switch (kind) {
    case GapKind::kFunctionValues:
      return "function_values";
    case GapKind::kGradients:
      return "gradients";
    case GapKind::kMoreauGradients:
      return "moreau_gradients";
  }
  return "?";
}

GapKind GapKindFromString(std::string_view name) {
  if (name == "function_values") return GapKind::kFunctionValues;
  if (name == "gradients") return GapKind::kGradients;
  if (name == "moreau_gradients") return GapKind::kMoreauGradients;
  throw ConfigError("unknown gap kind '" + std::string(name) + "'");
}

DrawnDataset DrawDataset(const PopulationPool& pool, Index n, std::uint64_t seed) {
  if (n < 1 || pool.empty()) throw ConfigError("dataset draw needs n >= 1 and a nonempty pool");
  DrawnDataset out;
  CounterRng rng(seed, Substream::kData);
  out.pool_indices.resize(static_cast<std::size_t>(n));
  for (Index& i : out.pool_indices) {
    i = static_cast<Index>(rng.Below(static_cast<std::uint64_t>(pool.size())));
  }
  out.data = Dataset(pool.Select(out.pool_indices));
  return out;
}

std::uint64_t DatasetSeed(std::uint64_t master, std::int64_t draw) {
  return DeriveSeed(master, "dataset", {static_cast<std::uint64_t>(draw)});
}

std::uint64_t RunSeed(std::uint64_t master, std::int64_t draw) {
  return DeriveSeed(master, "run", {static_cast<std::uint64_t>(draw)});
}

std::vector<DrawRecord> EvaluateDraws(const LossProblem& problem,
                                      const PopulationPool& pool, Index n,
                                      const OptimizerConfig& config,
                                      const DrawOptions& options) {
  config.Validate();
  if (options.draws < 1) throw ConfigError("need at least one dataset draw");
  if (pool.dim() != problem.dim()) {
    throw ConfigError("pool dimension does not match the problem");
  }
  if (n < 1 || n > pool.size()) {
    throw ConfigError("dataset size n must lie in [1, M]");
  }
  if (options.gradients && !problem.is_smooth()) {
    throw UnsupportedError("gradient gap is undefined for the nonsmooth loss '" +
                           std::string(ToString(problem.kind())) + "'");
  }
  std::vector<DrawRecord> records(static_cast<std::size_t>(options.draws));
  ParallelFor(records.size(), options.threads, [&](std::size_t k) {
    const auto draw = static_cast<std::int64_t>(k);
    const DrawnDataset sample = DrawDataset(pool, n, DatasetSeed(config.seed, draw));
    OptimizerConfig run = config;
    run.seed = RunSeed(config.seed, draw);
    run.record_iterates = false;
    DrawRecord& rec = records[k];
    rec.draw = draw;
    rec.output = RunOptimizer(problem, sample.data, run).output;
    const Vector& w = rec.output;
    if (options.gradients) {
      const PoolGradient population = PopulationGradient(problem, pool, w);
      const RiskEval empirical = EvaluateRisk(problem, w, sample.data);
      rec.empirical_risk = empirical.value;
      rec.population_risk = RiskValue(problem, w, pool);
      GradientMetrics m;
      m.population_norm = population.gradient.norm();
      m.empirical_norm = empirical.subgradient.norm();
      m.gap = (population.gradient - empirical.subgradient).norm();
      m.variance = population.variance;
      rec.gradients = m;
    } else {
      rec.population_risk = RiskValue(problem, w, pool);
      rec.empirical_risk = RiskValue(problem, w, sample.data);
    }
    if (options.moreau) {
      const MoreauResult population = Prox(
          RiskObjective{problem, pool, options.weak_convexity}, w, *options.moreau);
      const MoreauResult empirical = Prox(
          RiskObjective{problem, sample.data, options.weak_convexity}, w, *options.moreau);
      MoreauMetrics m;
      m.population_norm = population.envelope_gradient.norm();
      m.empirical_norm = empirical.envelope_gradient.norm();
      m.gap = (population.envelope_gradient - empirical.envelope_gradient).norm();
      m.inner_residual = std::max(population.inner_residual, empirical.inner_residual);
      rec.moreau = m;
    }
  });
  return records;
}

GapReport GeneralizationGap(const LossProblem& problem,
                            const PopulationPool& pool, Index n,
                            const OptimizerConfig& config, GapKind kind,
                            std::int64_t dataset_draws,
                            const std::optional<MoreauConfig>& moreau,
                            double weak_convexity, int threads,
                            const std::optional<GapBoundInput>& bound) {
  DrawOptions options;
  options.draws = dataset_draws;
  options.threads = threads;
  options.weak_convexity = weak_convexity;
  if (kind == GapKind::kGradients) options.gradients = true;
  if (kind == GapKind::kMoreauGradients) {
    if (!moreau) throw ConfigError("moreau_gradients gap needs a moreau config");
    options.moreau = moreau;
  }
  const std::vector<DrawRecord> records = EvaluateDraws(problem, pool, n, config, options);
  const std::optional<double> lambda =
      moreau ? std::optional<double>(moreau->lambda) : std::nullopt;
  return SummarizeGap(records, kind, n, config, lambda, bound);
}

GapReport SummarizeGap(std::span<const DrawRecord> records, GapKind kind, Index n,
                       const OptimizerConfig& config, std::optional<double> lambda,
                       const std::optional<GapBoundInput>& bound) {
  if (records.empty()) throw ConfigError("gap summary needs at least one draw");
  GapReport report;
  report.kind = kind;
  report.datasets_sampled = static_cast<std::int64_t>(records.size());
  report.n = n;
  report.iterations = config.iterations;
  report.eta = config.schedule.eta;
  std::vector<double> variances;
  double residual = 0.0;
  for (const DrawRecord& rec : records) {
    switch (kind) {
      case GapKind::kFunctionValues:
        report.per_draw.push_back(rec.population_risk - rec.empirical_risk);
        break;
      case GapKind::kGradients:
        if (!rec.gradients) throw ConfigError("draw records lack gradient metrics");
        report.per_draw.push_back(rec.gradients->gap);
        variances.push_back(rec.gradients->variance);
        break;
      case GapKind::kMoreauGradients:
        if (!rec.moreau) throw ConfigError("draw records lack Moreau metrics");
        report.per_draw.push_back(rec.moreau->gap);
        residual = std::max(residual, rec.moreau->inner_residual);
        break;
    }
  }
  report.gap_estimate = Mean(report.per_draw);
  report.std_error = StdError(report.per_draw);
  if (kind == GapKind::kGradients) report.variance_term = Mean(variances);
  if (kind == GapKind::kMoreauGradients) {
    report.inner_residual = residual;
    report.lambda = lambda;
  }
  if (bound) {
    switch (kind) {
      case GapKind::kFunctionValues:
        report.rhs_bound = bound->epsilon;
        break;
      case GapKind::kGradients:
        report.rhs_bound = StabilityBoundRhs(BoundTheorem::kGradGap, bound->epsilon,
                                             bound->constants, n, report.variance_term);
        break;
      case GapKind::kMoreauGradients:
        report.rhs_bound = StabilityBoundRhs(BoundTheorem::kMoreauGap, bound->epsilon,
                                             bound->constants, n, std::nullopt);
        break;
    }
  }
  return report;
}

double StabilityBoundRhs(BoundTheorem theorem, double epsilon,
                         const std::optional<ProblemConstants>& constants,
                         std::int64_t n, std::optional<double> variance) {
  if (!(epsilon >= 0.0) || n < 1) {
    throw ConfigError("stability bound needs epsilon >= 0 and n >= 1");
  }
  const double nn = static_cast<double>(n);
  if (theorem == BoundTheorem::kGradGap) {
    if (!variance || !(*variance >= 0.0)) {
      throw ConfigError("grad_gap bound needs a variance term V >= 0");
    }
    return 4.0 * epsilon + std::sqrt(*variance / nn);
  }
  if (!constants) throw ConfigError("moreau_gap bound needs constants G and rho");
  const double G = constants->lipschitz;
  const double rho = constants->weak_convexity;
  return 4.0 * G / std::sqrt(nn) + std::sqrt(32.0 * G * epsilon * rho);
}

RateFit FitRate(std::span<const std::pair<double, double>> points) {
  if (points.size() < 4) throw ConfigError("rate fit needs at least 4 points");
  const double count = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [n, value] : points) {
    if (!(n > 0.0) || !(value > 0.0) || !std::isfinite(n) || !std::isfinite(value)) {
      throw ConfigError("rate fit needs positive finite n and values");
    }
    mx += std::log(n);
    my += std::log(value);
  }
  mx /= count;
  my /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [n, value] : points) {
    const double dx = std::log(n) - mx;
    const double dy = std::log(value) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw ConfigError("rate fit needs at least two distinct n");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [n, value] : points) {
    const double r = std::log(value) - (fit.intercept + fit.slope * std::log(n));
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.points.assign(points.begin(), points.end());
  return fit;
}

double OptimalRisk(const LossProblem& problem, const PopulationPool& pool) {
  if (!problem.is_convex()) throw UnsupportedError("optimal risk needs a convex loss");
  const MoreauResult r = MinimizeConvexRisk(RiskObjective{problem, pool, 0.0},
                                            Vector::Zero(problem.dim()));
  return RiskValue(problem, r.prox_point, pool);
}

double Quantile(std::vector<double> values, double q) {
  if (values.empty() || !(q >= 0.0 && q <= 1.0)) {
    throw ConfigError("quantile needs values and q in [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace wcopt
