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

#include "wcopt/moreau.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "wcopt/errors.hpp"

namespace wcopt {
namespace {

constexpr double kLevelFactor = 0.1;
constexpr int kStepsPerLevel = 8;
// Polishing starts once the smoothing width drops below this (relative).
constexpr double kPolishStart = 1e-6;
constexpr double kSmoothingFloor = 1e-11;

bool IsComposite(const LossProblem& loss) {
  return loss.kind() == ProblemKind::kPhaseRetrieval ||
         loss.kind() == ProblemKind::kAbsoluteRegression ||
         loss.kind() == ProblemKind::kSmoothedRegression;
}

// phi_tau(v) = psi_tau(v) + ||v - w||^2 / (2 lambda), where psi_tau is the
// risk with |.| replaced by a Huber function of width tau (tau = 0: exact).
class Subproblem {
 public:
  Subproblem(const RiskObjective& objective, const Vector& w, double lambda)
      : loss_(objective.loss),
        sample_(objective.sample),
        w_(w),
        inv_lambda_(1.0 / lambda),
        inv_m_(1.0 / static_cast<double>(objective.sample.size())),
        composite_(IsComposite(objective.loss)) {
    if (composite_) {
      shift_ = loss_.kind() == ProblemKind::kPhaseRetrieval
                   ? Vector(sample_.feature_matrix().transpose() * loss_.offset())
                   : Vector::Zero(sample_.size());
    }
  }

  bool composite() const { return composite_; }
  Index dim() const { return w_.size(); }
  Index size() const { return sample_.size(); }
  const Matrix& X() const { return sample_.feature_matrix(); }
  double inv_lambda() const { return inv_lambda_; }
  double inv_m() const { return inv_m_; }
  const Vector& center() const { return w_; }

  // u_i = <x_i, v + offset>.
  Vector Inputs(const Vector& v) const {
    Vector u = X().transpose() * v;
    u += shift_;
    return u;
  }

  InnerMap InnerAt(const Vector& u, Index i) const {
    return loss_.Inner(u[i], sample_.target(i));
  }

  double Proximity(const Vector& v) const {
    return 0.5 * inv_lambda_ * (v - w_).squaredNorm();
  }

  double Value(const Vector& v, double tau) const {
    double total = 0.0;
    if (composite_) {
      const Vector u = Inputs(v);
      for (Index i = 0; i < size(); ++i) {
        total += loss_.Outer(InnerAt(u, i).c, tau).value;
      }
    } else {
      for (Index i = 0; i < size(); ++i) {
        total += loss_.Accumulate(v, sample_.features(i), sample_.target(i),
                                  1.0, nullptr);
      }
    }
    return total * inv_m_ + Proximity(v);
  }

  double Derivatives(const Vector& v, double tau, Vector& grad,
                     Matrix& hess) const {
    const Index d = dim();
    grad = Vector::Zero(d);
    hess = Matrix::Zero(d, d);
    double total = 0.0;
    if (composite_) {
      const Vector u = Inputs(v);
      Vector slope(size());
      Vector curvature(size());
      for (Index i = 0; i < size(); ++i) {
        const InnerMap in = InnerAt(u, i);
        const OuterEval h = loss_.Outer(in.c, tau);
        total += h.value;
        slope[i] = h.d1 * in.dc;
        curvature[i] = h.d2 * in.dc * in.dc + h.d1 * in.d2c;
      }
      grad.noalias() = X() * slope;
      hess = WeightedGram(curvature);
    } else {
      for (Index i = 0; i < size(); ++i) {
        total += loss_.AccumulateSecondOrder(v, sample_.features(i),
                                             sample_.target(i), tau, 1.0, grad,
                                             hess);
      }
      hess.triangularView<Eigen::StrictlyUpper>() = hess.transpose();
    }
    grad *= inv_m_;
    hess *= inv_m_;
    grad += inv_lambda_ * (v - w_);
    hess.diagonal().array() += inv_lambda_;
    return total * inv_m_ + Proximity(v);
  }

  // sum_i weight_i x_i x_i^T (unscaled by 1/m).
  Matrix WeightedGram(const Vector& weights) const {
    const Index d = dim();
    Index nonzero = 0;
    for (Index i = 0; i < weights.size(); ++i) nonzero += weights[i] != 0.0;
    Matrix out = Matrix::Zero(d, d);
    if (nonzero == 0) return out;
    if (nonzero * 4 < weights.size()) {
      for (Index i = 0; i < weights.size(); ++i) {
        if (weights[i] != 0.0) {
          out.selfadjointView<Eigen::Lower>().rankUpdate(X().col(i), weights[i]);
        }
      }
      out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
      return out;
    }
    const Matrix scaled = X() * weights.asDiagonal();
    out.noalias() = scaled * X().transpose();
    return out;
  }

 private:
  const LossProblem& loss_;
  const ExampleTable& sample_;
  Vector w_;
  double inv_lambda_;
  double inv_m_;
  bool composite_;
  Vector shift_;
};

struct SolverState {
  Vector v;
  std::int64_t iters = 0;
  std::int64_t cap = 0;
  Vector best;
  double best_residual = std::numeric_limits<double>::infinity();
  double best_kink = 0.0;

  void Offer(const Vector& candidate, double residual, double kink) {
    if (residual < best_residual) {
      best_residual = residual;
      best = candidate;
      best_kink = kink;
    }
  }
};

Vector SolveNewton(Matrix hess, const Vector& grad) {
  Eigen::LLT<Matrix> llt(hess);
  double shift = 1e-12 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
  while (llt.info() != Eigen::Success) {
    hess.diagonal().array() += shift;
    shift *= 10.0;
    llt.compute(hess);
  }
  return -llt.solve(grad);
}

// Damped Newton on phi_tau until ||grad|| <= tol, max_steps steps, or stall.
// Returns the final gradient norm.
double NewtonLevel(const Subproblem& sp, SolverState& state, double tau,
                   double tol, int max_steps) {
  Vector grad;
  Matrix hess;
  double f = sp.Derivatives(state.v, tau, grad, hess);
  double gnorm = grad.norm();
  for (int step = 0; step < max_steps; ++step) {
    if (gnorm <= tol || state.iters >= state.cap) break;
    Vector p = SolveNewton(hess, grad);
    double slope = grad.dot(p);
    if (!(slope < 0.0)) {
      p = -grad;
      slope = -gnorm * gnorm;
    }
    double alpha = 1.0;
    bool accepted = false;
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, std::abs(f));
    while (alpha > 1e-16) {
      const Vector trial = state.v + alpha * p;
      const double ft = sp.Value(trial, tau);
      if (ft <= f + 1e-4 * alpha * slope + slack) {
        state.v = trial;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++state.iters;
    if (!accepted) break;
    f = sp.Derivatives(state.v, tau, grad, hess);
    gnorm = grad.norm();
  }
  return gnorm;
}

struct PolishResult {
  bool ok = false;
  Vector v;
  double residual = std::numeric_limits<double>::infinity();
  double kink = 0.0;
};

// Newton on the KKT system of the terms whose kinks are active:
//   mean_{i not in A} sign_i c_i'(u) x_i + mean_{i in A} s_i c_i'(u) x_i
//     + (v - w)/lambda = 0,   c_i(v) = 0 for i in A.
PolishResult Polish(const Subproblem& sp, SolverState& state, double tau,
                    double tol) {
  const Index d = sp.dim();
  const Index m = sp.size();
  Vector v = state.v;
  Vector u = sp.Inputs(v);
  double c_scale = 1.0;

  std::vector<Index> active;
  std::vector<double> mult;
  Vector sign(m);
  for (Index i = 0; i < m; ++i) {
    const InnerMap in = sp.InnerAt(u, i);
    c_scale = std::max(c_scale, std::abs(in.c));
    if (std::abs(in.c) <= 10.0 * tau) {
      active.push_back(i);
      mult.push_back(std::clamp(in.c / tau, -1.0, 1.0));
      sign[i] = 0.0;
    } else {
      sign[i] = in.c > 0.0 ? 1.0 : -1.0;
    }
  }

  PolishResult out;
  const double c_tol = 64.0 * std::numeric_limits<double>::epsilon() * c_scale;
  for (int round = 0; round < 6; ++round) {
    const Index k = static_cast<Index>(active.size());
    if (k > d) return out;
    bool converged = false;
    Vector residual1(d);
    for (int it = 0; it < 30; ++it) {
      u = sp.Inputs(v);
      Vector slope(m);
      Vector curvature(m);
      Vector sel = sign;
      for (Index a = 0; a < k; ++a) sel[active[a]] = mult[a];
      bool flipped = false;
      for (Index i = 0; i < m; ++i) {
        const InnerMap in = sp.InnerAt(u, i);
        if (sign[i] != 0.0 && in.c * sign[i] <= 0.0) flipped = true;
        slope[i] = sel[i] * in.dc;
        curvature[i] = sel[i] * in.d2c;
      }
      if (flipped) return out;
      residual1 = sp.inv_m() * (sp.X() * slope) +
                  sp.inv_lambda() * (v - sp.center());
      Vector residual2(k);
      for (Index a = 0; a < k; ++a) residual2[a] = sp.InnerAt(u, active[a]).c;
      ++state.iters;
      if (residual1.norm() <= 0.01 * tol &&
          (k == 0 || residual2.cwiseAbs().maxCoeff() <= c_tol)) {
        converged = true;
        break;
      }
      Matrix kkt = Matrix::Zero(d + k, d + k);
      kkt.topLeftCorner(d, d) = sp.inv_m() * sp.WeightedGram(curvature);
      kkt.topLeftCorner(d, d).diagonal().array() += sp.inv_lambda();
      for (Index a = 0; a < k; ++a) {
        const double dc = sp.InnerAt(u, active[a]).dc;
        kkt.block(0, d + a, d, 1) = sp.inv_m() * dc * sp.X().col(active[a]);
        kkt.block(d + a, 0, 1, d) = dc * sp.X().col(active[a]).transpose();
      }
      Vector rhs(d + k);
      rhs << residual1, residual2;
      const Eigen::FullPivLU<Matrix> lu(kkt);
      if (!lu.isInvertible()) return out;
      const Vector delta = -lu.solve(rhs);
      if (!delta.allFinite()) return out;
      v += delta.head(d);
      for (Index a = 0; a < k; ++a) mult[a] += delta[d + a];
      if (state.iters >= state.cap) return out;
    }
    if (!converged) return out;

    // Terms whose multiplier left [-1, 1] are not really at their kink.
    bool changed = false;
    std::vector<Index> kept;
    std::vector<double> kept_mult;
    for (Index a = 0; a < k; ++a) {
      if (std::abs(mult[a]) > 1.0 + 1e-9) {
        sign[active[a]] = mult[a] > 0.0 ? 1.0 : -1.0;
        changed = true;
      } else {
        kept.push_back(active[a]);
        kept_mult.push_back(std::clamp(mult[a], -1.0, 1.0));
      }
    }
    active = std::move(kept);
    mult = std::move(kept_mult);
    if (changed) continue;

    // Honest residual with clamped multipliers at the final point.
    u = sp.Inputs(v);
    Vector slope(m);
    double kink = 0.0;
    for (Index i = 0; i < m; ++i) {
      const InnerMap in = sp.InnerAt(u, i);
      slope[i] = sign[i] * in.dc;
    }
    for (Index a = 0; a < static_cast<Index>(active.size()); ++a) {
      const InnerMap in = sp.InnerAt(u, active[a]);
      slope[active[a]] = mult[a] * in.dc;
      kink = std::max(kink, std::abs(in.c));
    }
    for (Index i = 0; i < m; ++i) {
      if (sign[i] != 0.0 && std::abs(sp.InnerAt(u, i).c) <= kink) return out;
    }
    out.ok = true;
    out.v = v;
    out.kink = kink;
    out.residual = (sp.inv_m() * (sp.X() * slope) +
                    sp.inv_lambda() * (v - sp.center())).norm();
    return out;
  }
  return out;
}

MoreauResult Finish(const RiskObjective& objective, const Vector& w,
                    double lambda, const Vector& prox, double residual,
                    std::int64_t iters, double kink) {
  MoreauResult r;
  r.prox_point = prox;
  r.envelope_gradient = (w - prox) / lambda;
  r.envelope_value = RiskValue(objective.loss, prox, objective.sample) +
                     (w - prox).squaredNorm() / (2.0 * lambda);
  r.inner_residual = residual;
  r.inner_iters = iters;
  r.kink_tolerance = kink;
  return r;
}

}  // namespace

MoreauConfig DefaultMoreauConfig(double weak_convexity,
                                 double inner_tolerance) {
  MoreauConfig config;
  config.lambda = weak_convexity > 0.0 ? 1.0 / (2.0 * weak_convexity) : 1.0;
  config.inner_tolerance = inner_tolerance;
  return config;
}

MoreauResult Prox(const RiskObjective& objective, const Vector& w,
                  const MoreauConfig& config) {
  if (!(config.lambda > 0.0) || !std::isfinite(config.lambda)) {
    throw DomainError("prox: lambda must be positive and finite");
  }
  if (objective.weak_convexity < 0.0) {
    throw DomainError("prox: weak convexity must be >= 0");
  }
  if (objective.weak_convexity > 0.0 &&
      config.lambda * objective.weak_convexity >= 1.0) {
    throw DomainError("prox: lambda must be < 1/rho (lambda=" +
                      std::to_string(config.lambda) +
                      ", rho=" + std::to_string(objective.weak_convexity) + ")");
  }
  if (!(config.inner_tolerance > 0.0) || config.inner_max_iters < 1) {
    throw ConfigError("prox: inner_tolerance > 0 and inner_max_iters >= 1");
  }
  if (objective.sample.empty()) throw ConfigError("prox of an empty risk");
  objective.loss.CheckDims(w);
  if (objective.sample.dim() != objective.loss.dim()) {
    throw ConfigError("prox: sample dimension does not match the problem");
  }
  if (!w.allFinite()) throw ConfigError("prox: w is not finite");

  const double tol = config.inner_tolerance;
  const Subproblem sp(objective, w, config.lambda);
  SolverState state;
  state.v = w;
  state.cap = config.inner_max_iters;
  state.best = w;

  if (!objective.loss.has_kinks()) {
    for (;;) {
      const double g = NewtonLevel(sp, state, 0.0, tol, kStepsPerLevel);
      state.Offer(state.v, g, 0.0);
      if (g <= tol) {
        return Finish(objective, w, config.lambda, state.v, g, state.iters, 0.0);
      }
      if (state.iters >= state.cap) break;
    }
    throw NonConvergedError("prox: inner solver did not reach tolerance",
                            state.best, state.best_residual);
  }

  // Smoothing widths are relative to the size of the inner values at w.
  double scale = 1.0;
  {
    const Vector u = sp.Inputs(w);
    for (Index i = 0; i < sp.size(); ++i) {
      scale = std::max(scale, std::abs(sp.InnerAt(u, i).c));
    }
  }
  double tau = scale;
  for (;;) {
    const bool last = tau <= kSmoothingFloor * scale;
    const double level_tol = last ? tol : std::max(tol, 1e-3 * tau);
    const double g = NewtonLevel(sp, state, tau, level_tol,
                                 last ? 1000 : kStepsPerLevel);
    state.Offer(state.v, g, tau);
    if (tau <= kPolishStart * scale) {
      const PolishResult polished = Polish(sp, state, tau, tol);
      if (polished.ok) {
        state.Offer(polished.v, polished.residual, polished.kink);
        if (polished.residual <= tol) {
          return Finish(objective, w, config.lambda, polished.v,
                        polished.residual, state.iters, polished.kink);
        }
      }
    }
    if (state.iters >= state.cap) break;
    if (last) {
      if (state.best_residual <= tol) {
        return Finish(objective, w, config.lambda, state.best,
                      state.best_residual, state.iters, state.best_kink);
      }
      break;
    }
    tau *= kLevelFactor;
  }
  throw NonConvergedError("prox: inner solver did not reach tolerance",
                          state.best, state.best_residual);
}

double EnvelopeValue(const RiskObjective& objective, const Vector& w,
                     const MoreauConfig& config) {
  return Prox(objective, w, config).envelope_value;
}

Vector EnvelopeGradient(const RiskObjective& objective, const Vector& w,
                        const MoreauConfig& config) {
  return Prox(objective, w, config).envelope_gradient;
}

std::string_view ToString(ClosedFormKind kind) {
  return kind == ClosedFormKind::kQuadratic ? "quadratic" : "absolute";
}

ClosedFormKind ClosedFormKindFromString(std::string_view name) {
  if (name == "quadratic") return ClosedFormKind::kQuadratic;
  if (name == "absolute") return ClosedFormKind::kAbsolute;
  throw UnsupportedError("prox_oracle_1d: unsupported kind '" +
                         std::string(name) + "'");
}

MoreauResult ProxOracle1d(ClosedFormKind kind, double lambda, double w) {
  if (!(lambda >= 0.0)) throw DomainError("prox_oracle_1d: lambda must be >= 0");
  MoreauResult r;
  double p = w;
  double value = 0.0;
  double grad = 0.0;
  switch (kind) {
    case ClosedFormKind::kQuadratic:
      p = w / (1.0 + lambda);
      value = 0.5 * w * w / (1.0 + lambda);
      grad = w / (1.0 + lambda);
      break;
    case ClosedFormKind::kAbsolute: {
      const double a = std::abs(w);
      p = std::copysign(std::max(a - lambda, 0.0), w);
      if (a <= lambda) {
        value = lambda > 0.0 ? 0.5 * w * w / lambda : 0.0;
        grad = lambda > 0.0 ? w / lambda : 0.0;
      } else {
        value = a - 0.5 * lambda;
        grad = w > 0.0 ? 1.0 : -1.0;
      }
      break;
    }
  }
  r.prox_point = Vector::Constant(1, p);
  r.envelope_value = value;
  r.envelope_gradient = Vector::Constant(1, grad);
  return r;
}

MoreauResult MinimizeConvexRisk(const RiskObjective& objective,
                                const Vector& start, double inner_tolerance) {
  if (objective.weak_convexity > 0.0) {
    throw DomainError("MinimizeConvexRisk needs a convex risk (rho = 0)");
  }
  // With lambda = 1e10 one prox step is within ||start - w*||^2 / 2e10 of the
  // optimal value. Further steps from the prox point only help while the
  // risk keeps dropping.
  MoreauConfig config;
  config.lambda = 1e10;
  config.inner_tolerance = inner_tolerance;
  MoreauResult best = Prox(objective, start, config);
  double best_risk = RiskValue(objective.loss, best.prox_point, objective.sample);
  for (int round = 0; round < 20; ++round) {
    MoreauResult next = Prox(objective, best.prox_point, config);
    const double risk = RiskValue(objective.loss, next.prox_point, objective.sample);
    if (!(risk < best_risk)) break;
    const double moved = (next.prox_point - best.prox_point).norm();
    best = std::move(next);
    best_risk = risk;
    if (moved <= 1e-12 * std::max(1.0, best.prox_point.norm())) break;
  }
  return best;
}

}  // namespace wcopt
