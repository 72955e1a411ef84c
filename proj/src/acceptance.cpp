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


#include "wcopt/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>
#include <utility>

#include "wcopt/errors.hpp"
#include "wcopt/generalization.hpp"
#include "wcopt/moreau.hpp"
#include "wcopt/optimizers.hpp"
#include "wcopt/rng.hpp"
#include "wcopt/stability.hpp"

namespace wcopt {
namespace {

using Points = std::vector<std::pair<double, double>>;

const std::vector<Index> kRateGrid = {250, 500, 1000, 2000, 4000};

std::string Num(double value) {
  std::ostringstream out;
  out.precision(4);
  out << value;
  return out.str();
}

// Accumulates rows and the human-readable detail of one criterion.
class Recorder {
 public:
  Recorder(int id, std::string name) {
    result_.id = id;
    result_.name = std::move(name);
    result_.passed = true;
  }

  void Row(const std::string& measure, double estimate, std::optional<double> bound = {},
           std::optional<std::int64_t> n = {}, std::optional<std::int64_t> T = {},
           std::optional<double> eta = {}, std::optional<double> std_error = {}) {
    ReportRow row;
    row.kind = "acceptance";
    row.n = n;
    row.iterations = T;
    row.eta = eta;
    row.measure = Prefix() + measure;
    row.estimate = estimate;
    row.std_error = std_error;
    row.bound = bound;
    result_.rows.push_back(std::move(row));
  }

  void Fit(const std::string& measure, const RateFit& fit) {
    ReportRow row;
    row.kind = "acceptance";
    row.measure = Prefix() + measure;
    row.estimate = fit.intercept;
    row.slope = fit.slope;
    row.r2 = fit.r_squared;
    result_.rows.push_back(std::move(row));
  }

  void Check(bool ok, const std::string& what) {
    if (!ok) {
      result_.passed = false;
      failures_.push_back(what);
    }
  }

  void Note(const std::string& text) { notes_.push_back(text); }

  CriterionResult Finish() {
    ReportRow pass;
    pass.kind = "acceptance";
    pass.measure = Prefix() + "pass";
    pass.estimate = result_.passed ? 1.0 : 0.0;
    result_.rows.push_back(std::move(pass));
    std::string detail;
    for (const std::string& n : notes_) detail += (detail.empty() ? "" : "; ") + n;
    for (const std::string& f : failures_) detail += (detail.empty() ? "" : "; ") + ("FAILED " + f);
    result_.detail = detail;
    return std::move(result_);
  }

 private:
  std::string Prefix() const { return "c" + std::to_string(result_.id) + "." + result_.name + "."; }

  CriterionResult result_;
  std::vector<std::string> notes_;
  std::vector<std::string> failures_;
};

Dataset Table1d(std::initializer_list<double> xs) {
  Matrix f(1, static_cast<Index>(xs.size()));
  Index j = 0;
  for (double x : xs) f(0, j++) = x;
  return Dataset(ExampleTable(std::move(f), Vector::Zero(static_cast<Index>(xs.size()))));
}

Example Point1d(double x) { return Example{Vector::Constant(1, x), 0.0}; }

// 1. Numeric prox against the one-dimensional closed forms.
CriterionResult ProxClosedForms(std::uint64_t seed) {
  Recorder rec(1, "prox_closed_forms");
  CounterRng rng(seed, Substream::kData);
  const Dataset origin = Table1d({0.0});
  const Dataset unit(ExampleTable(Matrix::Ones(1, 1), Vector::Zero(1)));
  const LossProblem quadratic = LossProblem::Quadratic(1);
  const LossProblem absolute = LossProblem::AbsoluteRegression(1);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double lambda = 0.01 + 2.99 * rng.Uniform();
    const double w = 6.0 * rng.Uniform() - 3.0;
    MoreauConfig cfg;
    cfg.lambda = lambda;
    const bool use_abs = k % 2 == 1;
    const RiskObjective objective{use_abs ? absolute : quadratic, use_abs ? unit : origin, 0.0};
    const MoreauResult numeric = Prox(objective, Vector::Constant(1, w), cfg);
    const MoreauResult oracle = ProxOracle1d(
        use_abs ? ClosedFormKind::kAbsolute : ClosedFormKind::kQuadratic, lambda, w);
    worst = std::max(worst, std::abs(numeric.prox_point[0] - oracle.prox_point[0]));
  }
  rec.Row("max_abs_error", worst, 1e-8);
  rec.Check(worst <= 1e-8, "max |prox - oracle| = " + Num(worst) + " > 1e-8");
  rec.Note("max |prox - oracle| = " + Num(worst) + " over 100 (lambda, w)");
  return rec.Finish();
}

// 2. (w - prox)/lambda against central differences of the envelope value.
CriterionResult EnvelopeGradientConsistency(std::uint64_t seed) {
  Recorder rec(2, "envelope_gradient_fd");
  GeneratorSpec spec;
  spec.kind = ProblemKind::kPhaseRetrieval;
  spec.dim = 5;
  spec.pool_size = 50;
  spec.planted_norm = 1.0;
  spec.offset_norm = 0.5;
  spec.noise = 0.1;
  spec.outlier_fraction = 0.1;
  spec.radius = 2.0;
  spec.seed = DeriveSeed(seed, "instance");
  const ProblemInstance inst = GenerateInstance(spec);
  const RiskObjective objective{inst.loss, inst.pool, inst.constants.weak_convexity};
  const MoreauConfig cfg = DefaultMoreauConfig(inst.constants.weak_convexity, 1e-8);
  CounterRng rng(DeriveSeed(seed, "points"), Substream::kData);
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    Vector w(spec.dim);
    for (Index j = 0; j < spec.dim; ++j) w[j] = rng.Normal();
    const Vector analytic = Prox(objective, w, cfg).envelope_gradient;
    Vector fd(spec.dim);
    for (Index j = 0; j < spec.dim; ++j) {
      Vector up = w;
      Vector down = w;
      up[j] += h;
      down[j] -= h;
      fd[j] = (EnvelopeValue(objective, up, cfg) - EnvelopeValue(objective, down, cfg)) / (2.0 * h);
    }
    const double rel = (fd - analytic).norm() / std::max(analytic.norm(), 1e-12);
    worst = std::max(worst, rel);
  }
  rec.Row("max_rel_error", worst, 1e-4);
  rec.Check(worst <= 1e-4, "max relative error " + Num(worst) + " > 1e-4");
  rec.Note("max relative error " + Num(worst) + " at 50 points");
  return rec.Finish();
}

// 3. Coupled Monte Carlo against exhaustive enumeration.
CriterionResult ExhaustiveOracle(std::uint64_t seed, int threads) {
  Recorder rec(3, "exhaustive_oracle");
  const LossProblem loss = LossProblem::Quadratic(1);
  OptimizerConfig config;
  config.schedule.eta = 0.5;

  // Hand case: S = {0, 2}, S' replaces the second example by 4, T = 1.
  config.iterations = 1;
  const NeighborPair hand = MakeNeighborPair(Table1d({0.0, 2.0}), 1, Point1d(4.0));
  const double hand_exact = ExactExpectationEnumerate(
      loss, hand, config, StabilityMeasure::kArguments, Table1d({0.0, 2.0, 4.0}));
  rec.Row("hand_case", hand_exact, 0.5, 2, 1, 0.5);
  rec.Check(hand_exact == 0.5, "hand case gave " + Num(hand_exact) + " instead of 0.5");

  // n = 3, T = 2: 9 index sequences.
  config.iterations = 2;
  config.seed = seed;
  const NeighborPair pair = MakeNeighborPair(Table1d({0.0, 1.0, 2.0}), 2, Point1d(5.0));
  const Dataset probes = Table1d({0.0, 1.0, 2.0, 5.0});
  StabilityOptions options;
  options.trials = 100000;
  options.threads = threads;
  for (StabilityMeasure m : {StabilityMeasure::kFunctionValues, StabilityMeasure::kGradients,
                             StabilityMeasure::kArguments}) {
    const double exact = ExactExpectationEnumerate(loss, pair, config, m, probes);
    const StabilityReport mc = CoupledStabilityEstimate(loss, pair, config, m, probes, options);
    const double diff = std::abs(mc.epsilon_hat - exact);
    const std::string name(ToString(m));
    rec.Row(name + ".exact", exact, std::nullopt, 3, 2, 0.5);
    rec.Row(name + ".monte_carlo", mc.epsilon_hat, exact + 3.0 * mc.std_error, 3, 2, 0.5,
            mc.std_error);
    rec.Check(diff <= 3.0 * mc.std_error,
              name + ": |MC - exact| = " + Num(diff) + " > 3 se = " + Num(3.0 * mc.std_error));
    rec.Note(name + " exact " + Num(exact) + " MC " + Num(mc.epsilon_hat) + " +- " +
             Num(mc.std_error));
  }
  return rec.Finish();
}

// 4. Exact inclusion probability against enumeration, and against T/n.
CriterionResult Inclusion() {
  Recorder rec(4, "inclusion_probability");
  double worst = 0.0;
  bool below = true;
  for (std::int64_t n = 1; n <= 5; ++n) {
    for (std::int64_t T = 0; T <= 5; ++T) {
      const double exact = InclusionProbability(n, T, InclusionMode::kExact);
      const double bound = InclusionProbability(n, T, InclusionMode::kBound);
      const double freq = EnumeratedInclusionFrequency(n, T);
      worst = std::max(worst, std::abs(exact - freq));
      below = below && exact <= bound && exact <= static_cast<double>(T) / static_cast<double>(n);
    }
  }
  rec.Row("max_abs_error", worst, 1e-12);
  rec.Row("exact_below_bound", below ? 1.0 : 0.0);
  rec.Check(worst <= 1e-12, "max |exact - enumerated| = " + Num(worst));
  rec.Check(below, "exact inclusion probability exceeded T/n");
  rec.Note("max |exact - enumerated| = " + Num(worst) + ", exact <= T/n everywhere");
  return rec.Finish();
}

// 5. Trials that never draw the replaced index give bit-identical outputs.
CriterionResult SamplingDetermined(std::uint64_t seed) {
  Recorder rec(5, "sampling_determined");
  GeneratorSpec spec = ConvexSuite(seed);
  spec.pool_size = 1000;
  const ProblemInstance inst = GenerateInstance(spec);
  const Index n = 100;
  const std::int64_t T = 20;
  const std::int64_t trials = 10000;
  const DrawnDataset drawn = DrawDataset(inst.pool, n, DeriveSeed(seed, "data"));
  const NeighborPair pair = MakeNeighborPair(drawn.data, n - 1, inst.pool.example(0));
  const double p = std::pow(1.0 - 1.0 / static_cast<double>(n), static_cast<double>(T));
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));

  for (OptimizerKind kind : {OptimizerKind::kSgd, OptimizerKind::kAdaGradNorm}) {
    OptimizerConfig config;
    config.kind = kind;
    config.iterations = T;
    config.projection_radius = spec.radius;
    config.record_iterates = false;
    config.schedule = kind == OptimizerKind::kSgd
                          ? StepSchedule{ScheduleKind::kConstant, 0.1, 1.0}
                          : StepSchedule{ScheduleKind::kAdaGrad, spec.radius, 1.0};
    std::int64_t untouched = 0;
    std::int64_t mismatched = 0;
    for (std::int64_t t = 0; t < trials; ++t) {
      config.seed = TrialSeed(seed, t);
      const Trace a = RunOptimizer(inst.loss, pair.base, config);
      const Trace b = RunOptimizer(inst.loss, pair.neighbor, config);
      if (a.Samples(pair.replaced_index)) continue;
      ++untouched;
      const bool same = std::memcmp(a.output.data(), b.output.data(),
                                    sizeof(double) * static_cast<std::size_t>(a.output.size())) == 0;
      if (!same) ++mismatched;
    }
    const double frac = static_cast<double>(untouched) / static_cast<double>(trials);
    const std::string name(ToString(kind));
    rec.Row(name + ".untouched_fraction", frac, p + 3.0 * se, n, T, std::nullopt, se);
    rec.Row(name + ".mismatched", static_cast<double>(mismatched), 0.0, n, T);
    rec.Check(mismatched == 0, name + ": " + std::to_string(mismatched) +
                                   " untouched trials differ");
    rec.Check(std::abs(frac - p) <= 3.0 * se,
              name + ": untouched fraction " + Num(frac) + " vs " + Num(p));
    rec.Note(name + " untouched " + Num(frac) + " (expected " + Num(p) + "), 0 mismatches" +
             (mismatched ? " NOT" : ""));
  }
  return rec.Finish();
}

// 6. Stability estimates stay below the T/n bounds.
CriterionResult StabilityBounds(std::uint64_t seed, int threads) {
  Recorder rec(6, "stability_bounds");
  const ProblemInstance inst = GenerateInstance(ConvexSuite(seed));
  StabilityOptions options;
  options.trials = 500;
  options.threads = threads;
  options.constants = inst.constants;
  std::size_t cell = 0;
  double worst_ratio = 0.0;
  for (Index n : {100, 400}) {
    for (std::int64_t T : {10, 50}) {
      const DrawnDataset drawn = DrawDataset(inst.pool, n, DeriveSeed(seed, "data", {cell}));
      CounterRng rng(DeriveSeed(seed, "replacement", {cell}), Substream::kData);
      const NeighborPair pair = MakeNeighborPair(
          drawn.data, n - 1,
          inst.pool.example(static_cast<Index>(rng.Below(static_cast<std::uint64_t>(inst.pool.size())))));
      OptimizerConfig config;
      config.iterations = T;
      config.schedule = TuneSchedule(Regime::kConvex, n, inst.constants).schedule;
      config.projection_radius = *inst.constants.radius;
      config.seed = DeriveSeed(seed, "cell", {cell});
      for (StabilityMeasure m : {StabilityMeasure::kFunctionValues, StabilityMeasure::kGradients,
                                 StabilityMeasure::kArguments}) {
        const StabilityReport s = CoupledStabilityEstimate(inst.loss, pair, config, m, inst.pool, options);
        const double bound = s.theoretical_bound.value_or(-1.0);
        rec.Row(std::string(ToString(m)), s.epsilon_hat, bound, n, T, config.schedule.eta, s.std_error);
        rec.Check(s.theoretical_bound.has_value() && s.epsilon_hat <= bound + 3.0 * s.std_error,
                  std::string(ToString(m)) + " at n=" + std::to_string(n) + ", T=" +
                      std::to_string(T) + ": " + Num(s.epsilon_hat) + " > " + Num(bound));
        if (bound > 0.0) worst_ratio = std::max(worst_ratio, s.epsilon_hat / bound);
      }
      ++cell;
    }
  }
  rec.Note("12 estimates, largest estimate/bound ratio " + Num(worst_ratio));
  return rec.Finish();
}

// 7. Moreau-gradient gap against 4G/sqrt(n) + sqrt(32 G eps rho).
CriterionResult MoreauGapBound(std::uint64_t seed, int threads) {
  Recorder rec(7, "moreau_gap_bound");
  const ProblemInstance inst = GenerateInstance(WeaklyConvexSuite(seed));
  const ProblemConstants& k = inst.constants;
  const MoreauConfig moreau = DefaultMoreauConfig(k.weak_convexity);
  std::size_t cell = 0;
  for (Index n : {500, 2000}) {
    const TunedSchedule tuned = TuneSchedule(Regime::kWeaklyConvex, n, k);
    OptimizerConfig config;
    config.iterations = tuned.iterations;
    config.schedule = tuned.schedule;
    config.projection_radius = *k.radius;
    config.output = OutputSelector::kRandomIterate;
    config.seed = DeriveSeed(seed, "cell", {cell});

    const DrawnDataset drawn = DrawDataset(inst.pool, n, DeriveSeed(seed, "data", {cell}));
    CounterRng rng(DeriveSeed(seed, "replacement", {cell}), Substream::kData);
    const NeighborPair pair = MakeNeighborPair(
        drawn.data, n - 1,
        inst.pool.example(static_cast<Index>(rng.Below(static_cast<std::uint64_t>(inst.pool.size())))));
    StabilityOptions options;
    options.trials = 500;
    options.threads = threads;
    const StabilityReport eps = CoupledStabilityEstimate(
        inst.loss, pair, config, StabilityMeasure::kArguments, inst.pool, options);

    const GapReport gap = GeneralizationGap(inst.loss, inst.pool, n, config,
                                            GapKind::kMoreauGradients, 50, moreau,
                                            k.weak_convexity, threads);
    const double eps_upper = eps.epsilon_hat + 3.0 * eps.std_error;
    const double rhs = StabilityBoundRhs(BoundTheorem::kMoreauGap, eps_upper, k, n, std::nullopt);
    const double slack = 2.0 * gap.inner_residual.value_or(0.0) / moreau.lambda;
    const double limit = rhs + 3.0 * gap.std_error + slack;
    rec.Row("epsilon_hat", eps.epsilon_hat, std::nullopt, n, config.iterations,
            config.schedule.eta, eps.std_error);
    rec.Row("gap", gap.gap_estimate, limit, n, config.iterations, config.schedule.eta,
            gap.std_error);
    rec.Row("prox_slack", slack, std::nullopt, n);
    rec.Check(gap.gap_estimate <= limit,
              "n=" + std::to_string(n) + ": gap " + Num(gap.gap_estimate) + " > " + Num(limit));
    rec.Note("n=" + std::to_string(n) + " gap " + Num(gap.gap_estimate) + " <= " + Num(limit));
    ++cell;
  }
  return rec.Finish();
}

// Mean of one per-draw quantity at every n of the rate grid.
template <typename Metric>
Points RatePoints(const ProblemInstance& inst, Regime regime, OutputSelector output,
                  std::uint64_t seed, int threads, const DrawOptions& base, Metric metric,
                  Recorder& rec, const std::string& name) {
  Points points;
  std::size_t cell = 0;
  for (Index n : kRateGrid) {
    const TunedSchedule tuned = TuneSchedule(regime, n, inst.constants);
    OptimizerConfig config;
    config.iterations = tuned.iterations;
    config.schedule = tuned.schedule;
    config.projection_radius = *inst.constants.radius;
    config.output = output;
    config.seed = DeriveSeed(seed, "cell", {cell++});
    DrawOptions options = base;
    options.threads = threads;
    const std::vector<DrawRecord> records = EvaluateDraws(inst.loss, inst.pool, n, config, options);
    double sum = 0.0;
    for (const DrawRecord& r : records) sum += metric(r);
    const double mean = sum / static_cast<double>(records.size());
    points.emplace_back(static_cast<double>(n), mean);
    rec.Row(name, mean, std::nullopt, n, config.iterations, config.schedule.eta);
  }
  return points;
}

void CheckFit(Recorder& rec, const std::string& name, const Points& points, double lo,
              double hi, std::optional<double> min_r2) {
  const RateFit fit = FitRate(points);
  rec.Fit(name + ".fit", fit);
  const bool in_band = fit.slope >= lo && fit.slope <= hi;
  const bool r2_ok = !min_r2 || fit.r_squared >= *min_r2;
  rec.Check(in_band, name + " slope " + Num(fit.slope) + " outside [" + Num(lo) + ", " + Num(hi) + "]");
  rec.Check(r2_ok, name + " r2 " + Num(fit.r_squared) + " < " + Num(min_r2.value_or(0.0)));
  rec.Note(name + " slope " + Num(fit.slope) + " r2 " + Num(fit.r_squared));
}

// 8. Population Moreau gradient at w_r vs n, weakly convex schedule.
CriterionResult WeaklyConvexRate(std::uint64_t seed, int threads) {
  Recorder rec(8, "rate_weakly_convex");
  const ProblemInstance inst = GenerateInstance(WeaklyConvexSuite(seed));
  DrawOptions options;
  options.draws = 50;
  options.moreau = DefaultMoreauConfig(inst.constants.weak_convexity);
  options.weak_convexity = inst.constants.weak_convexity;
  const Points points = RatePoints(
      inst, Regime::kWeaklyConvex, OutputSelector::kRandomIterate, seed, threads, options,
      [](const DrawRecord& r) { return r.moreau->population_norm; }, rec,
      "moreau_grad_population");
  CheckFit(rec, "moreau_grad_population", points, -0.35, -0.05, 0.7);
  return rec.Finish();
}

// 9. Excess population risk vs n, convex schedule.
CriterionResult ConvexRate(std::uint64_t seed, int threads) {
  Recorder rec(9, "rate_convex");
  const ProblemInstance inst = GenerateInstance(ConvexSuite(seed));
  const double optimal = OptimalRisk(inst.loss, inst.pool);
  rec.Row("optimal_risk", optimal);
  DrawOptions options;
  options.draws = 50;
  const Points points = RatePoints(
      inst, Regime::kConvex, OutputSelector::kAverage, seed, threads, options,
      [optimal](const DrawRecord& r) { return r.population_risk - optimal; }, rec,
      "excess_risk");
  CheckFit(rec, "excess_risk", points, -0.50, -0.18, 0.7);
  return rec.Finish();
}

// 10. Empirical stationarity at w_r vs T at n = 4000, with the step size
// 1/(G sqrt(T)) (smooth) or 1/(G sqrt(rho T)) (weakly convex).
CriterionResult OptimizationError(std::uint64_t seed, int threads) {
  Recorder rec(10, "optimization_error");
  const Index n = 4000;
  const std::vector<std::int64_t> Ts = {100, 316, 1000, 3162, 10000};
  for (bool smooth : {true, false}) {
    const GeneratorSpec spec = smooth ? SmoothSuite(seed) : NoisyWeaklyConvexSuite(seed);
    const ProblemInstance inst = GenerateInstance(spec);
    const ProblemConstants& k = inst.constants;
    const std::string name = smooth ? "grad_empirical" : "moreau_grad_empirical";
    DrawOptions options;
    options.draws = 30;
    options.threads = threads;
    options.gradients = smooth;
    options.weak_convexity = k.weak_convexity;
    if (!smooth) options.moreau = DefaultMoreauConfig(k.weak_convexity);
    Points points;
    std::size_t cell = smooth ? 0 : 100;
    for (std::int64_t T : Ts) {
      OptimizerConfig config;
      config.iterations = T;
      const double t = static_cast<double>(T);
      config.schedule.eta = smooth ? 1.0 / (k.lipschitz * std::sqrt(t))
                                   : 1.0 / (k.lipschitz * std::sqrt(k.weak_convexity * t));
      config.projection_radius = *k.radius;
      config.output = OutputSelector::kRandomIterate;
      config.seed = DeriveSeed(seed, "cell", {cell++});
      const std::vector<DrawRecord> records = EvaluateDraws(inst.loss, inst.pool, n, config, options);
      double sum = 0.0;
      for (const DrawRecord& r : records) {
        sum += smooth ? r.gradients->empirical_norm : r.moreau->empirical_norm;
      }
      const double mean = sum / static_cast<double>(records.size());
      points.emplace_back(t, mean);
      rec.Row(name, mean, std::nullopt, n, T, config.schedule.eta);
    }
    CheckFit(rec, name, points, -0.4, -0.1, std::nullopt);
  }
  return rec.Finish();
}

// 11. DP-SGD noise calibration and privacy precheck.
CriterionResult DpArithmetic(std::uint64_t seed) {
  Recorder rec(11, "dp_arithmetic");
  const double beta = 7.0 * 1000.0 / (3.0 * 1e8 * 1.0);
  const double sigma2 = DpNoiseScale(1.0, 1000, 10000, 1.0, 1e-3, beta);
  const double hand = 6.0 * (std::log(1000.0) / (1.0 - beta) + 1.0);
  const double rel = std::abs(sigma2 - hand) / hand;
  rec.Row("sigma2", sigma2, hand);
  rec.Check(rel <= 1e-9, "sigma2 " + Num(sigma2) + " vs hand value " + Num(hand));
  rec.Check(std::abs(sigma2 - 47.447) <= 1e-3, "sigma2 " + Num(sigma2) + " is not ~47.447");

  CounterRng rng(seed, Substream::kData);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto T = static_cast<std::int64_t>(1 + rng.Below(10000));
    const auto n = static_cast<std::int64_t>(1000 + rng.Below(100000));
    const double eps = 0.1 + 4.9 * rng.Uniform();
    const double G = 0.1 + 9.9 * rng.Uniform();
    const double b = 7.0 * static_cast<double>(T) /
                     (3.0 * static_cast<double>(n) * static_cast<double>(n) * eps);
    if (b >= 1.0) continue;
    // delta = 1 isolates the leading factor.
    const double leading = DpNoiseScale(G, T, n, eps, 1.0, b);
    worst = std::max(worst, std::abs(leading - 6.0 * G * G) / (6.0 * G * G));
  }
  rec.Row("leading_factor_rel_error", worst, 1e-14);
  rec.Check(worst <= 1e-14, "leading factor deviates from 6G^2 by " + Num(worst));

  const bool case1 = DpPrivacyPrecheck(1000, 10000, 1.0, 1e-3).ok;
  const bool case2 = DpPrivacyPrecheck(100, 1000, 1.0, 1e-5).ok;
  const bool case3 = DpPrivacyPrecheck(1000, 100, 0.4, 1e-3).ok;  // eps < 14T/(3n^2)
  rec.Row("precheck_cases_matched", (case1 ? 1.0 : 0.0) + (case2 ? 0.0 : 1.0) + (case3 ? 0.0 : 1.0), 3.0);
  rec.Check(case1 && !case2 && !case3, "precheck decisions differ from the hand evaluation");
  rec.Note("sigma2 = " + Num(sigma2) + ", leading factor error " + Num(worst) +
           ", precheck cases ok/not ok/not ok");
  return rec.Finish();
}

bool Selected(const AcceptanceOptions& options, int id) {
  return options.only.empty() ||
         std::find(options.only.begin(), options.only.end(), id) != options.only.end();
}

std::vector<CriterionResult> RunCriteria(const AcceptanceOptions& options,
                                         const std::function<void(const CriterionResult&)>& on_result) {
  const std::uint64_t m = options.master_seed;
  const int threads = std::max(1, options.threads);
  std::vector<CriterionResult> out;
  auto run = [&](int id, auto&& fn) {
    if (!Selected(options, id)) return;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      Recorder rec(id, "error");
      rec.Check(false, std::string("threw: ") + e.what());
      r = rec.Finish();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  };
  run(1, [&] { return ProxClosedForms(DeriveSeed(m, "c1")); });
  run(2, [&] { return EnvelopeGradientConsistency(DeriveSeed(m, "c2")); });
  run(3, [&] { return ExhaustiveOracle(DeriveSeed(m, "c3"), threads); });
  run(4, [&] { return Inclusion(); });
  run(5, [&] { return SamplingDetermined(DeriveSeed(m, "c5")); });
  run(6, [&] { return StabilityBounds(DeriveSeed(m, "c6"), threads); });
  run(7, [&] { return MoreauGapBound(DeriveSeed(m, "c7"), threads); });
  run(8, [&] { return WeaklyConvexRate(DeriveSeed(m, "c8"), threads); });
  run(9, [&] { return ConvexRate(DeriveSeed(m, "c9"), threads); });
  run(10, [&] { return OptimizationError(DeriveSeed(m, "c10"), threads); });
  run(11, [&] { return DpArithmetic(DeriveSeed(m, "c11")); });
  return out;
}

Report BuildReport(const AcceptanceOptions& options, const std::vector<CriterionResult>& criteria) {
  Report report;
  report.config["suite"] = "acceptance";
  report.config["master_seed"] = options.master_seed;
  for (const CriterionResult& c : criteria) {
    report.rows.insert(report.rows.end(), c.rows.begin(), c.rows.end());
  }
  return report;
}

}  // namespace

GeneratorSpec ConvexSuite(std::uint64_t master_seed) {
  GeneratorSpec s;
  s.kind = ProblemKind::kAbsoluteRegression;
  s.dim = 10;
  s.pool_size = 100000;
  s.planted_norm = 1.0;
  s.noise = 0.1;
  s.radius = 1.5;
  s.seed = DeriveSeed(master_seed, "convex_suite");
  return s;
}

GeneratorSpec WeaklyConvexSuite(std::uint64_t master_seed) {
  GeneratorSpec s;
  s.kind = ProblemKind::kPhaseRetrieval;
  s.dim = 10;
  s.pool_size = 100000;
  s.planted_norm = 0.1;
  s.offset_norm = 0.3;
  s.noise = 0.001;
  s.radius = 0.4;
  s.seed = DeriveSeed(master_seed, "weakly_convex_suite");
  return s;
}

GeneratorSpec NoisyWeaklyConvexSuite(std::uint64_t master_seed) {
  GeneratorSpec s;
  s.kind = ProblemKind::kPhaseRetrieval;
  s.dim = 10;
  s.pool_size = 100000;
  s.planted_norm = 0.3;
  s.offset_norm = 0.5;
  s.noise = 0.01;
  s.outlier_fraction = 0.2;
  s.radius = 0.7;
  s.seed = DeriveSeed(master_seed, "noisy_weakly_convex_suite");
  return s;
}

GeneratorSpec SmoothSuite(std::uint64_t master_seed) {
  GeneratorSpec s;
  s.kind = ProblemKind::kSmoothedRegression;
  s.dim = 10;
  s.pool_size = 100000;
  s.planted_norm = 1.0;
  s.noise = 1.0;
  s.radius = 1.5;
  s.seed = DeriveSeed(master_seed, "smooth_suite");
  return s;
}

AcceptanceOutcome RunAcceptance(const AcceptanceOptions& options,
                                const std::function<void(const CriterionResult&)>& on_result) {
  AcceptanceOutcome outcome;
  outcome.criteria = RunCriteria(options, on_result);
  outcome.report = BuildReport(options, outcome.criteria);

  if (Selected(options, 12)) {
    const auto start = std::chrono::steady_clock::now();
    Recorder rec(12, "determinism");
    AcceptanceOptions rerun = options;
    rerun.threads = options.alternate_threads > 0 ? options.alternate_threads
                                                  : (options.threads == 1 ? 3 : 1);
    rerun.only.clear();
    for (const CriterionResult& c : outcome.criteria) rerun.only.push_back(c.id);
    const std::vector<CriterionResult> again = RunCriteria(rerun, {});
    const std::string first = EmitReport(outcome.report, ReportFormat::kJson);
    const std::string second = EmitReport(BuildReport(options, again), ReportFormat::kJson);
    rec.Row("threads_first", static_cast<double>(std::max(1, options.threads)));
    rec.Row("threads_second", static_cast<double>(rerun.threads));
    rec.Row("report_bytes", static_cast<double>(first.size()));
    rec.Check(!outcome.criteria.empty(), "no criteria ran before the determinism check");
    rec.Check(first == second, "reports differ between thread budgets " +
                                   std::to_string(std::max(1, options.threads)) + " and " +
                                   std::to_string(rerun.threads));
    rec.Note("rerun with " + std::to_string(rerun.threads) + " threads: " +
             std::to_string(first.size()) + " report bytes " +
             (first == second ? "identical" : "DIFFER"));
    CriterionResult r = rec.Finish();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(r);
    outcome.report.rows.insert(outcome.report.rows.end(), r.rows.begin(), r.rows.end());
    outcome.criteria.push_back(std::move(r));
  }
  for (const CriterionResult& c : outcome.criteria) outcome.all_passed = outcome.all_passed && c.passed;
  return outcome;
}

std::string FormatCriterionLine(const CriterionResult& result) {
  std::ostringstream out;
  out << (result.passed ? "PASS" : "FAIL") << "  " << result.id << " " << result.name << "  "
      << result.detail;
  out.precision(3);
  out << "  (" << result.seconds << " s)";
  return out.str();
}

}  // namespace wcopt
