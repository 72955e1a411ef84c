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

#ifndef WCOPT_MOREAU_HPP_
#define WCOPT_MOREAU_HPP_

#include <cstdint>
#include <string_view>

#include "wcopt/problems.hpp"
#include "wcopt/types.hpp"

namespace wcopt {

struct MoreauConfig {
  double lambda = 0.5;
  double inner_tolerance = 1e-8;
  std::int64_t inner_max_iters = 100000;
};

// lambda = 1/(2 rho); rho == 0 gives lambda = 1.
MoreauConfig DefaultMoreauConfig(double weak_convexity,
                                 double inner_tolerance = 1e-8);

struct MoreauResult {
  Vector prox_point;
  double envelope_value = 0.0;
  Vector envelope_gradient;  // (w - prox_point) / lambda, exactly
  // ||g + (prox_point - w)/lambda|| for the best subgradient g found.
  double inner_residual = 0.0;
  std::int64_t inner_iters = 0;
  // Terms with |c_i(prox_point)| <= kink_tolerance were treated as sitting on
  // their kink (any multiplier in [-1, 1] allowed). 0 when no term was.
  double kink_tolerance = 0.0;
};

// psi = mean loss over `sample`, with certified weak-convexity constant.
struct RiskObjective {
  const LossProblem& loss;
  const ExampleTable& sample;
  double weak_convexity = 0.0;
};

// prox_{lambda psi}(w) with its envelope value and gradient.
//
// The subproblem psi(v) + ||v - w||^2 / (2 lambda) is (1/lambda - rho)-strongly
// convex. It is solved by damped Newton on Huber-smoothed versions of psi with
// a decreasing smoothing width, then polished by Newton on the KKT system of
// the terms whose kinks are active. Smooth problems skip the smoothing.
//
// Throws DomainError when lambda <= 0 or lambda >= 1/rho, and
// NonConvergedError (carrying the best iterate and its residual) when
// inner_max_iters Newton steps do not reach inner_tolerance.
MoreauResult Prox(const RiskObjective& objective, const Vector& w,
                  const MoreauConfig& config);

double EnvelopeValue(const RiskObjective& objective, const Vector& w,
                     const MoreauConfig& config);
Vector EnvelopeGradient(const RiskObjective& objective, const Vector& w,
                        const MoreauConfig& config);

enum class ClosedFormKind { kQuadratic, kAbsolute };
std::string_view ToString(ClosedFormKind kind);
ClosedFormKind ClosedFormKindFromString(std::string_view name);

// Closed forms in one dimension: psi = w^2/2 gives w/(1+lambda); psi = |w|
// gives soft thresholding. lambda == 0 returns the identity map.
MoreauResult ProxOracle1d(ClosedFormKind kind, double lambda, double w);

// Minimizer of a convex risk by repeated prox steps with a large lambda.
// Returns the final prox result; its prox_point is the minimizer estimate.
MoreauResult MinimizeConvexRisk(const RiskObjective& objective,
                                const Vector& start,
                                double inner_tolerance = 1e-10);

}  // namespace wcopt

#endif  // WCOPT_MOREAU_HPP_
