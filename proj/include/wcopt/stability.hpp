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


#ifndef WCOPT_STABILITY_HPP_
#define WCOPT_STABILITY_HPP_

#include <cstdint>
#include <optional>
#include <string_view>

#include "wcopt/optimizers.hpp"
#include "wcopt/problems.hpp"
#include "wcopt/types.hpp"

namespace wcopt {

enum class StabilityMeasure { kFunctionValues, kGradients, kArguments };

std::string_view ToString(StabilityMeasure measure);
StabilityMeasure StabilityMeasureFromString(std::string_view name);

// S and its neighbor S^(i). replaced_index is 0-based.
struct NeighborPair {
  Dataset base;
  Index replaced_index = 0;
  Example replacement;
  Dataset neighbor;
};

// Throws ConfigError when i is outside [0, n) or the replacement has the
// wrong dimension.
NeighborPair MakeNeighborPair(const Dataset& base, Index i,
                              const Example& replacement);

struct StabilityReport {
  StabilityMeasure measure = StabilityMeasure::kArguments;
  double epsilon_hat = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
  bool sup_over_z = false;
  std::optional<double> theoretical_bound;
  // Grid coordinates of the run, echoed into reports.
  Index n = 0;
  std::int64_t iterations = 0;
  double eta = 0.0;
  // Trials whose index sequence drew the replaced index.
  std::int64_t touched_trials = 0;
};

struct StabilityOptions {
  std::int64_t trials = 100;
  int threads = 1;
  // Trials that never draw the replaced index produce identical outputs on S
  // and S^(i); when set, they are counted as exact zeros without running.
  bool skip_untouched = true;
  // B, G for the bounds. R is the projection radius of the config.
  std::optional<ProblemConstants> constants;
};

// Seed of trial t under a master seed.
std::uint64_t TrialSeed(std::uint64_t master, std::int64_t trial);

// Coupled Monte Carlo estimate: trial t runs A on S and S^(i) with the same
// seed TrialSeed(config.seed, t).
//   function_values: max over probes z of |mean_t [f(A(S);z) - f(A(S');z)]|
//   gradients:       sqrt of max over z of mean_t ||grad f(A(S);z) - grad f(A(S');z)||^2
//   arguments:       mean_t ||A(S) - A(S')||
// std_error is the standard error of the mean at the maximizing probe (delta
// method for the square root). Bounds 2BT/n, 2G sqrt(T/n), 2RT/n are attached
// when the matching constant is available.
StabilityReport CoupledStabilityEstimate(const LossProblem& problem,
                                         const NeighborPair& pair,
                                         const OptimizerConfig& config,
                                         StabilityMeasure measure,
                                         const ExampleTable& probes,
                                         const StabilityOptions& options);

// Exact coupled expectation over all n^T index sequences (times T output
// indices for random_iterate). Throws UnsupportedError for DP-SGD and
// ConfigError when the state space exceeds 10^6 sequences.
double ExactExpectationEnumerate(const LossProblem& problem,
                                 const NeighborPair& pair,
                                 const OptimizerConfig& config,
                                 StabilityMeasure measure,
                                 const ExampleTable& probes);

enum class InclusionMode { kExact, kBound };

// Probability that T uniform draws from [n] hit a fixed index:
// exact 1 - (1 - 1/n)^T, bound min(T/n, 1).
double InclusionProbability(std::int64_t n, std::int64_t iterations,
                            InclusionMode mode);

// Fraction of the n^T index sequences containing index n-1, by enumeration.
double EnumeratedInclusionFrequency(std::int64_t n, std::int64_t iterations);

}  // namespace wcopt

#endif  // WCOPT_STABILITY_HPP_
