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

#ifndef WCOPT_OPTIMIZERS_HPP_
#define WCOPT_OPTIMIZERS_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "wcopt/problems.hpp"
#include "wcopt/types.hpp"

namespace wcopt {

enum class OptimizerKind { kSgd, kAdaGradNorm, kDpSgd };
enum class ScheduleKind { kConstant, kInverseT, kAdaGrad };
enum class OutputSelector { kAverage, kRandomIterate, kLast };
enum class Regime { kConvex, kNonconvexSmooth, kSgc, kWeaklyConvex, kAdaGrad };

std::string_view ToString(OptimizerKind kind);
std::string_view ToString(ScheduleKind kind);
std::string_view ToString(OutputSelector selector);
std::string_view ToString(Regime regime);
OptimizerKind OptimizerKindFromString(std::string_view name);
ScheduleKind ScheduleKindFromString(std::string_view name);
OutputSelector OutputSelectorFromString(std::string_view name);
Regime RegimeFromString(std::string_view name);

struct StepSchedule {
  ScheduleKind kind = ScheduleKind::kConstant;
  double eta = 0.1;
  double c = 1.0;  // inverse_t only: eta_t = min(eta, c / t)

  // Step used at iteration t (1-based). For kAdaGrad this is the base eta.
  double StepAt(std::int64_t t) const;
};

// Differential-privacy parameters of DP-SGD. `lipschitz` is the G the noise
// was calibrated for.
struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-3;
  double beta = 0.5;
  double sigma2 = 0.0;
  double lipschitz = 1.0;

  // beta = 7T/(3 n^2 eps) and the matching sigma^2. Throws DomainError when
  // the privacy precondition fails.
  static PrivacyBudget Canonical(double lipschitz, std::int64_t iterations,
                                 std::int64_t n, double epsilon, double delta);
};

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  std::int64_t iterations = 1;  // T; 0 returns w_1 = 0
  StepSchedule schedule;
  std::optional<double> projection_radius;
  OutputSelector output = OutputSelector::kLast;
  double b0 = 1.0;  // AdaGrad-Norm only
  std::optional<PrivacyBudget> privacy;  // DP-SGD only
  std::uint64_t seed = 0;
  // When false the trace keeps no iterate history (output is still exact).
  bool record_iterates = true;

  // Throws ConfigError describing the first inconsistency.
  void Validate() const;
};

// Full record of one run. index_sequence holds 0-based positions into S.
struct Trace {
  std::vector<Vector> iterates;  // w_1 .. w_{T+1} when recorded
  std::vector<Index> index_sequence;
  std::vector<Vector> noise_draws;
  std::vector<double> b_values;  // b_0 .. b_T (AdaGrad-Norm)
  std::optional<std::int64_t> output_index;  // r in [1, T]
  Vector output;

  bool Samples(Index i) const;
};

// Euclidean projection onto {||w|| <= radius}.
Vector ProjectToBall(const Vector& w, double radius);

// The index sequence a run with this seed draws over a dataset of size n,
// followed by the output index r when the selector needs one. Pure function
// of (seed, n, T, selector); the optimizer consumes exactly these draws.
struct IndexPlan {
  std::vector<Index> indices;
  std::optional<std::int64_t> output_index;
};
IndexPlan PlanIndices(std::uint64_t seed, Index n, std::int64_t iterations,
                      OutputSelector selector);

// Projected SGD, AdaGrad-Norm or DP-SGD from w_1 = 0. Bit-identical output for
// identical (problem, S, config). DP-SGD refuses to run unless its privacy
// budget passes the precheck and sigma^2 matches the calibration formula.
Trace RunOptimizer(const LossProblem& problem, const Dataset& sample,
                   const OptimizerConfig& config);

// Same run driven by an explicit index plan instead of the seed's index
// substream. DP-SGD noise still comes from the seed.
Trace RunOptimizerWithPlan(const LossProblem& problem, const Dataset& sample,
                           const OptimizerConfig& config, IndexPlan plan);

// sigma^2 = 14 G^2 T / (beta n^2 eps) * (log(1/delta) / ((1 - beta) eps) + 1).
double DpNoiseScale(double lipschitz, std::int64_t iterations, std::int64_t n,
                    double epsilon, double delta, double beta);

struct PrivacyCheck {
  bool ok = false;
  double beta = 0.0;  // 7T / (3 n^2 eps), always filled in
};

// ok iff eps >= 14T/(3n^2) and log(1/delta)/eps <= sqrt(n)/(3 sqrt 3) - 5/3.
PrivacyCheck DpPrivacyPrecheck(std::int64_t iterations, std::int64_t n,
                               double epsilon, double delta);

struct TunedSchedule {
  std::int64_t iterations = 1;
  StepSchedule schedule;
};

// Iteration count and step size from the rate-optimal scalings, with every
// proportionality constant set to 1 and T rounded up. Throws ConfigError when
// a constant the regime needs is missing or zero.
TunedSchedule TuneSchedule(Regime regime, std::int64_t n,
                           const ProblemConstants& constants);

}  // namespace wcopt

#endif  // WCOPT_OPTIMIZERS_HPP_
