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


#ifndef WCOPT_GENERALIZATION_HPP_
#define WCOPT_GENERALIZATION_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "wcopt/moreau.hpp"
#include "wcopt/optimizers.hpp"
#include "wcopt/problems.hpp"
#include "wcopt/types.hpp"

namespace wcopt {

enum class GapKind { kFunctionValues, kGradients, kMoreauGradients };

std::string_view ToString(GapKind kind);
GapKind GapKindFromString(std::string_view name);

// n indices drawn uniformly with replacement from [0, M), and the dataset they
// select.
struct DrawnDataset {
  std::vector<Index> pool_indices;
  Dataset data;
};
DrawnDataset DrawDataset(const PopulationPool& pool, Index n, std::uint64_t seed);

// Seeds of dataset draw k: one for the data, one for the optimizer.
std::uint64_t DatasetSeed(std::uint64_t master, std::int64_t draw);
std::uint64_t RunSeed(std::uint64_t master, std::int64_t draw);

struct GradientMetrics {
  double population_norm = 0.0;  // ||grad F(A(S))||
  double empirical_norm = 0.0;   // ||grad F_S(A(S))||
  double gap = 0.0;              // ||grad F - grad F_S||
  double variance = 0.0;         // V_Z(grad f(A(S); Z)) over the pool
};

struct MoreauMetrics {
  double population_norm = 0.0;  // ||grad F_lambda(A(S))||
  double empirical_norm = 0.0;   // ||grad F_{S,lambda}(A(S))||
  double gap = 0.0;
  double inner_residual = 0.0;   // max over the two prox solves
};

// Everything measured at the trained model of one dataset draw.
struct DrawRecord {
  std::int64_t draw = 0;
  Vector output;
  double population_risk = 0.0;
  double empirical_risk = 0.0;
  std::optional<GradientMetrics> gradients;
  std::optional<MoreauMetrics> moreau;
};

struct DrawOptions {
  std::int64_t draws = 50;
  int threads = 1;
  bool gradients = false;  // smooth problems only
  std::optional<MoreauConfig> moreau;
  double weak_convexity = 0.0;  // rho of the risks the prox is applied to
};

// For k in [0, draws): S_k ~ pool^n with seed DatasetSeed(config.seed, k), one
// run of A with seed RunSeed(config.seed, k), and the requested population and
// empirical quantities at A(S_k). Records come back in draw order.
std::vector<DrawRecord> EvaluateDraws(const LossProblem& problem,
                                      const PopulationPool& pool, Index n,
                                      const OptimizerConfig& config,
                                      const DrawOptions& options);

struct GapReport {
  GapKind kind = GapKind::kFunctionValues;
  double gap_estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> variance_term;  // E_S V_Z, gradients kind only
  std::optional<double> rhs_bound;
  std::int64_t datasets_sampled = 0;
  Index n = 0;
  std::int64_t iterations = 0;
  double eta = 0.0;
  // Largest prox residual and the lambda used, moreau_gradients kind only.
  std::optional<double> inner_residual;
  std::optional<double> lambda;
  std::vector<double> per_draw;
};

enum class BoundTheorem { kGradGap, kMoreauGap };

// Optional stability input for the right-hand side.
struct GapBoundInput {
  double epsilon = 0.0;
  ProblemConstants constants;
};

// Mean over draws of F(A(S)) - F_S(A(S)), ||grad F - grad F_S|| or
// ||grad F_lambda - grad F_{S,lambda}|| at A(S). With `bound`, rhs_bound is
// epsilon (function values), 4 eps + sqrt(V/n) or 4G/sqrt(n) + sqrt(32 G eps rho).
// Throws UnsupportedError for the gradients kind on a nonsmooth problem and
// ConfigError when the moreau kind has no MoreauConfig.
GapReport GeneralizationGap(const LossProblem& problem,
                            const PopulationPool& pool, Index n,
                            const OptimizerConfig& config, GapKind kind,
                            std::int64_t dataset_draws,
                            const std::optional<MoreauConfig>& moreau,
                            double weak_convexity, int threads = 1,
                            const std::optional<GapBoundInput>& bound = {});

// The GapReport of already evaluated draws (which must carry the metrics the
// kind needs). `lambda` is the Moreau parameter used, moreau kind only.
GapReport SummarizeGap(std::span<const DrawRecord> records, GapKind kind, Index n,
                       const OptimizerConfig& config, std::optional<double> lambda,
                       const std::optional<GapBoundInput>& bound = {});

// grad_gap: 4 eps + sqrt(V / n). moreau_gap: 4G/sqrt(n) + sqrt(32 G eps rho).
double StabilityBoundRhs(BoundTheorem theorem, double epsilon,
                         const std::optional<ProblemConstants>& constants,
                         std::int64_t n, std::optional<double> variance);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;
};

// Least squares of log(value) on log(n). Needs >= 4 points, at least two
// distinct n and positive values.
RateFit FitRate(std::span<const std::pair<double, double>> points);

// min F over the pool for a convex problem, by proximal-point iterations.
double OptimalRisk(const LossProblem& problem, const PopulationPool& pool);

// Sample quantile with linear interpolation, q in [0, 1].
double Quantile(std::vector<double> values, double q);

}  // namespace wcopt

#endif  // WCOPT_GENERALIZATION_HPP_
