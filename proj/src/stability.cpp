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


#include "wcopt/stability.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wcopt/errors.hpp"
#include "wcopt/parallel.hpp"
#include "wcopt/rng.hpp"

namespace wcopt {
namespace {

constexpr double kMaxSequences = 1e6;

// Coupled outputs of one run pair. Empty vectors mean the pair was untouched
// and the outputs coincide.
struct CoupledOutputs {
  Vector base;
  Vector neighbor;
  double weight = 0.0;
};

struct MeanStat {
  double mean = 0.0;
  double std_error = 0.0;
};

// Mean and standard error from the sum and sum of squares of `count` samples.
MeanStat Summarize(double sum, double sum_sq, std::int64_t count) {
  MeanStat out;
  const double n = static_cast<double>(count);
  out.mean = sum / n;
  if (count > 1) {
    const double var = std::max(0.0, (sum_sq - sum * out.mean) / (n - 1.0));
    out.std_error = std::sqrt(var / n);
  }
  return out;
}

struct ProbeStats {
  Index best_probe = -1;
  double best_mean = 0.0;
  double best_std_error = 0.0;
};

double ProbeDifference(const LossProblem& problem, StabilityMeasure measure,
                       const Vector& a, const Vector& b,
                       const Eigen::Ref<const Vector>& x, double y,
                       Vector& ga, Vector& gb) {
  if (measure == StabilityMeasure::kFunctionValues) {
    return problem.Accumulate(a, x, y, 1.0, nullptr) -
           problem.Accumulate(b, x, y, 1.0, nullptr);
  }
  ga.setZero();
  gb.setZero();
  problem.Accumulate(a, x, y, 1.0, &ga);
  problem.Accumulate(b, x, y, 1.0, &gb);
  return (ga - gb).squaredNorm();
}

// For every probe z, the mean per-pair difference over `total_count` samples
// (pairs not listed are exact zeros; each listed weight is 1/total_count).
// Returns the probe maximizing |mean| (function values) or mean (gradients).
ProbeStats ScanProbes(const LossProblem& problem, StabilityMeasure measure,
                      const std::vector<CoupledOutputs>& pairs,
                      std::int64_t total_count, const ExampleTable& probes,
                      int threads) {
  const Index P = probes.size();
  std::vector<double> means(static_cast<std::size_t>(P));
  std::vector<double> errors(static_cast<std::size_t>(P));
  constexpr Index kChunk = 512;
  const std::size_t chunks = static_cast<std::size_t>((P + kChunk - 1) / kChunk);
  ParallelFor(chunks, threads, [&](std::size_t c) {
    Vector ga(problem.dim());
    Vector gb(problem.dim());
    const Index begin = static_cast<Index>(c) * kChunk;
    const Index end = std::min(P, begin + kChunk);
    for (Index z = begin; z < end; ++z) {
      double sum = 0.0;
      double sum_sq = 0.0;
      for (const CoupledOutputs& pair : pairs) {
        const double diff =
            ProbeDifference(problem, measure, pair.base, pair.neighbor,
                            probes.features(z), probes.target(z), ga, gb);
        sum += pair.weight * diff;
        sum_sq += pair.weight * diff * diff;
      }
      const double n = static_cast<double>(total_count);
      const MeanStat stat = Summarize(sum * n, sum_sq * n, total_count);
      means[static_cast<std::size_t>(z)] = stat.mean;
      errors[static_cast<std::size_t>(z)] = stat.std_error;
    }
  });
  ProbeStats out;
  double best = -1.0;
  for (Index z = 0; z < P; ++z) {
    const double m = means[static_cast<std::size_t>(z)];
    const double score = measure == StabilityMeasure::kFunctionValues ? std::abs(m) : m;
    if (score > best) {
      best = score;
      out.best_probe = z;
      out.best_mean = m;
      out.best_std_error = errors[static_cast<std::size_t>(z)];
    }
  }
  return out;
}

void CheckPair(const LossProblem& problem, const NeighborPair& pair,
               const ExampleTable& probes, StabilityMeasure measure) {
  if (pair.base.empty() || pair.base.size() != pair.neighbor.size()) {
    throw ConfigError("neighbor pair datasets must be nonempty and equal size");
  }
  if (pair.base.dim() != problem.dim() || pair.neighbor.dim() != problem.dim()) {
    throw ConfigError("neighbor pair dimension does not match the problem");
  }
  if (measure != StabilityMeasure::kArguments) {
    if (probes.empty()) throw ConfigError("stability probes must be nonempty");
    if (probes.dim() != problem.dim()) {
      throw ConfigError("probe dimension does not match the problem");
    }
  }
}

std::optional<double> TheoreticalBound(StabilityMeasure measure,
                                       const OptimizerConfig& config, Index n,
                                       const std::optional<ProblemConstants>& constants) {
  const double T = static_cast<double>(config.iterations);
  const double nn = static_cast<double>(n);
  switch (measure) {
    case StabilityMeasure::kFunctionValues:
      if (constants && constants->value_bound) {
        return 2.0 * *constants->value_bound * T / nn;
      }
      return std::nullopt;
    case StabilityMeasure::kGradients:
      if (constants) return 2.0 * constants->lipschitz * std::sqrt(T / nn);
      return std::nullopt;
    case StabilityMeasure::kArguments:
      if (config.projection_radius) return 2.0 * *config.projection_radius * T / nn;
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::string_view ToString(StabilityMeasure measure) {
  switch (measure) {
    case StabilityMeasure::kFunctionValues:
      return "function_values";
    case StabilityMeasure::kGradients:
      return "gradients";
    case StabilityMeasure::kArguments:
      return "arguments";
  }
  return "?";
}

StabilityMeasure StabilityMeasureFromString(std::string_view name) {
  if (name == "function_values") return StabilityMeasure::kFunctionValues;
  if (name == "gradients") return StabilityMeasure::kGradients;
  if (name == "arguments") return StabilityMeasure::kArguments;
  throw ConfigError("unknown stability measure '" + std::string(name) + "'");
}

NeighborPair MakeNeighborPair(const Dataset& base, Index i,
                              const Example& replacement) {
  if (i < 0 || i >= base.size()) {
    throw ConfigError("replaced index " + std::to_string(i) +
                      " out of range for a dataset of size " +
                      std::to_string(base.size()));
  }
  NeighborPair pair;
  pair.base = base;
  pair.replaced_index = i;
  pair.replacement = replacement;
  pair.neighbor = Dataset(base.WithReplaced(i, replacement));
  return pair;
}

std::uint64_t TrialSeed(std::uint64_t master, std::int64_t trial) {
  return DeriveSeed(master, "trial", {static_cast<std::uint64_t>(trial)});
}

StabilityReport CoupledStabilityEstimate(const LossProblem& problem,
                                         const NeighborPair& pair,
                                         const OptimizerConfig& config,
                                         StabilityMeasure measure,
                                         const ExampleTable& probes,
                                         const StabilityOptions& options) {
  config.Validate();
  if (options.trials < 1) throw ConfigError("stability needs trials >= 1");
  CheckPair(problem, pair, probes, measure);

  const Index n = pair.base.size();
  const std::int64_t N = options.trials;
  std::vector<CoupledOutputs> outputs(static_cast<std::size_t>(N));
  std::vector<char> touched(static_cast<std::size_t>(N), 0);
  ParallelFor(static_cast<std::size_t>(N), options.threads, [&](std::size_t t) {
    OptimizerConfig run = config;
    run.seed = TrialSeed(config.seed, static_cast<std::int64_t>(t));
    run.record_iterates = false;
    IndexPlan plan = PlanIndices(run.seed, n, run.iterations, run.output);
    const bool hit = std::find(plan.indices.begin(), plan.indices.end(),
                               pair.replaced_index) != plan.indices.end();
    touched[t] = hit ? 1 : 0;
    if (!hit && options.skip_untouched) return;
    CoupledOutputs& out = outputs[t];
    out.base = RunOptimizerWithPlan(problem, pair.base, run, plan).output;
    out.neighbor = RunOptimizerWithPlan(problem, pair.neighbor, run, std::move(plan)).output;
    out.weight = 1.0 / static_cast<double>(N);
  });

  std::vector<CoupledOutputs> active;
  StabilityReport report;
  report.measure = measure;
  report.trials = N;
  report.n = n;
  report.iterations = config.iterations;
  report.eta = config.schedule.eta;
  for (std::size_t t = 0; t < outputs.size(); ++t) {
    report.touched_trials += touched[t];
    if (outputs[t].base.size() > 0) active.push_back(std::move(outputs[t]));
  }

  if (measure == StabilityMeasure::kArguments) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const CoupledOutputs& o : active) {
      const double diff = (o.base - o.neighbor).norm();
      sum += diff;
      sum_sq += diff * diff;
    }
    const MeanStat stat = Summarize(sum, sum_sq, N);
    report.epsilon_hat = stat.mean;
    report.std_error = stat.std_error;
  } else {
    report.sup_over_z = true;
    const ProbeStats stats =
        ScanProbes(problem, measure, active, N, probes, options.threads);
    if (measure == StabilityMeasure::kFunctionValues) {
      report.epsilon_hat = std::abs(stats.best_mean);
      report.std_error = stats.best_std_error;
    } else {
      report.epsilon_hat = std::sqrt(std::max(0.0, stats.best_mean));
      report.std_error = report.epsilon_hat > 0.0
                             ? stats.best_std_error / (2.0 * report.epsilon_hat)
                             : 0.0;
    }
  }
  report.theoretical_bound = TheoreticalBound(measure, config, n, options.constants);
  return report;
}

double ExactExpectationEnumerate(const LossProblem& problem,
                                 const NeighborPair& pair,
                                 const OptimizerConfig& config,
                                 StabilityMeasure measure,
                                 const ExampleTable& probes) {
  config.Validate();
  if (config.kind == OptimizerKind::kDpSgd) {
    throw UnsupportedError(
        "exact enumeration needs a noise-free optimizer; dp_sgd draws "
        "continuous noise");
  }
  CheckPair(problem, pair, probes, measure);
  const Index n = pair.base.size();
  const std::int64_t T = config.iterations;
  const bool random_r = config.output == OutputSelector::kRandomIterate && T > 0;
  const double sequences = std::pow(static_cast<double>(n), static_cast<double>(T)) *
                           (random_r ? static_cast<double>(T) : 1.0);
  if (sequences > kMaxSequences) {
    throw ConfigError("enumeration state space n^T = " + std::to_string(sequences) +
                      " exceeds 10^6");
  }
  const std::int64_t count = static_cast<std::int64_t>(std::llround(sequences));
  const double weight = 1.0 / static_cast<double>(count);

  std::vector<CoupledOutputs> active;
  OptimizerConfig run = config;
  run.record_iterates = false;
  for (std::int64_t code = 0; code < count; ++code) {
    IndexPlan plan;
    std::int64_t rest = code;
    if (random_r) {
      plan.output_index = 1 + rest % T;
      rest /= T;
    }
    plan.indices.resize(static_cast<std::size_t>(T));
    for (std::int64_t t = 0; t < T; ++t) {
      plan.indices[static_cast<std::size_t>(t)] = static_cast<Index>(rest % n);
      rest /= n;
    }
    CoupledOutputs out;
    out.base = RunOptimizerWithPlan(problem, pair.base, run, plan).output;
    out.neighbor = RunOptimizerWithPlan(problem, pair.neighbor, run, std::move(plan)).output;
    out.weight = weight;
    active.push_back(std::move(out));
  }

  if (measure == StabilityMeasure::kArguments) {
    double sum = 0.0;
    for (const CoupledOutputs& o : active) sum += o.weight * (o.base - o.neighbor).norm();
    return sum;
  }
  const ProbeStats stats = ScanProbes(problem, measure, active, count, probes, 1);
  if (measure == StabilityMeasure::kFunctionValues) return std::abs(stats.best_mean);
  return std::sqrt(std::max(0.0, stats.best_mean));
}

double InclusionProbability(std::int64_t n, std::int64_t iterations,
                            InclusionMode mode) {
  if (n < 1 || iterations < 0) {
    throw ConfigError("inclusion probability needs n >= 1 and T >= 0");
  }
  if (iterations == 0) return 0.0;
  const double nn = static_cast<double>(n);
  const double T = static_cast<double>(iterations);
  if (mode == InclusionMode::kBound) return std::min(T / nn, 1.0);
  // 1 - (1 - 1/n)^T, computed without cancellation for large n. Rounding in
  // log1p/expm1 can land one ulp above T/n (e.g. T = 1), which Bernoulli's
  // inequality rules out.
  return std::min(-std::expm1(T * std::log1p(-1.0 / nn)), std::min(T / nn, 1.0));
}

double EnumeratedInclusionFrequency(std::int64_t n, std::int64_t iterations) {
  const double sequences =
      std::pow(static_cast<double>(n), static_cast<double>(iterations));
  if (n < 1 || iterations < 0 || sequences > kMaxSequences) {
    throw ConfigError("enumeration needs n >= 1, T >= 0 and n^T <= 10^6");
  }
  const std::int64_t count = static_cast<std::int64_t>(std::llround(sequences));
  std::int64_t hits = 0;
  for (std::int64_t code = 0; code < count; ++code) {
    std::int64_t rest = code;
    bool hit = false;
    for (std::int64_t t = 0; t < iterations; ++t) {
      hit = hit || rest % n == n - 1;
      rest /= n;
    }
    hits += hit ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(count);
}

}  // namespace wcopt
