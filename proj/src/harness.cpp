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


#include "wcopt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "wcopt/errors.hpp"
#include "wcopt/moreau.hpp"
#include "wcopt/parallel.hpp"
#include "wcopt/rng.hpp"

namespace wcopt {
namespace {

using Json = nlohmann::ordered_json;

const std::set<std::string> kMetrics = {
    "population_risk",        "empirical_risk",        "excess_risk",
    "grad_population",        "grad_empirical",        "moreau_grad_population",
    "moreau_grad_empirical",  "moreau_gap_q90"};

bool NeedsGradients(const std::string& metric) {
  return metric == "grad_population" || metric == "grad_empirical";
}

bool NeedsMoreau(const std::string& metric) {
  return metric.rfind("moreau_", 0) == 0;
}

// Collects every violation instead of stopping at the first one.
class Reader {
 public:
  std::vector<std::string> errors;

  void Expect(bool ok, const std::string& message) {
    if (!ok) errors.push_back(message);
  }

  // Flags keys outside `allowed` in an object.
  void Keys(const Json& object, const std::string& path,
            std::initializer_list<const char*> allowed) {
    if (!object.is_object()) {
      errors.push_back(path + ": expected an object");
      return;
    }
    for (const auto& item : object.items()) {
      bool known = false;
      for (const char* key : allowed) known = known || item.key() == key;
      if (!known) errors.push_back(path + "." + item.key() + ": unknown key");
    }
  }

  const Json* Child(const Json& object, const char* key) {
    if (!object.is_object() || !object.contains(key) || object[key].is_null()) {
      return nullptr;
    }
    return &object[key];
  }

  template <typename T>
  std::optional<T> Get(const Json& object, const char* key, const std::string& path) {
    const Json* child = Child(object, key);
    if (child == nullptr) return std::nullopt;
    const std::string where = path + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!child->is_boolean()) return Bad<T>(where, "a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!child->is_string()) return Bad<T>(where, "a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!child->is_number_integer()) return Bad<T>(where, "an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (child->is_number_integer() && !child->is_number_unsigned() &&
            child->get<std::int64_t>() < 0) {
          return Bad<T>(where, "a nonnegative integer");
        }
      }
    } else {
      if (!child->is_number()) return Bad<T>(where, "a number");
    }
    return child->get<T>();
  }

  template <typename T>
  std::vector<T> GetList(const Json& object, const char* key, const std::string& path) {
    std::vector<T> out;
    const Json* child = Child(object, key);
    if (child == nullptr) return out;
    const std::string where = path + "." + key;
    if (!child->is_array()) {
      errors.push_back(where + ": expected a list");
      return out;
    }
    for (std::size_t i = 0; i < child->size(); ++i) {
      const Json& item = (*child)[i];
      const bool ok = std::is_same_v<T, std::string> ? item.is_string()
                      : std::is_integral_v<T>        ? item.is_number_integer()
                                                     : item.is_number();
      if (!ok) {
        errors.push_back(where + "[" + std::to_string(i) + "]: wrong type");
        continue;
      }
      out.push_back(item.get<T>());
    }
    return out;
  }

  // Enum parse that records the library's error message.
  template <typename Fn>
  auto Enum(const std::optional<std::string>& name, const std::string& where, Fn parse)
      -> std::optional<decltype(parse(std::string_view()))> {
    if (!name) return std::nullopt;
    try {
      return parse(*name);
    } catch (const Error& e) {
      errors.push_back(where + ": " + e.what());
      return std::nullopt;
    }
  }

 private:
  template <typename T>
  std::optional<T> Bad(const std::string& where, const char* what) {
    errors.push_back(where + ": expected " + what);
    return std::nullopt;
  }
};

template <typename T>
bool StrictlyIncreasing(const std::vector<T>& values) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) return false;
  }
  return true;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json ParseJsonText(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError({what + ": " + e.what()});
  }
}

Json ConstantsToJson(const ProblemConstants& k) {
  Json out = Json::object();
  out["lipschitz"] = k.lipschitz;
  out["weak_convexity"] = k.weak_convexity;
  if (k.smoothness) out["smoothness"] = *k.smoothness;
  if (k.value_bound) out["value_bound"] = *k.value_bound;
  if (k.radius) out["radius"] = *k.radius;
  if (k.minimizer_norm) out["minimizer_norm"] = *k.minimizer_norm;
  if (k.sgc_rho) out["sgc_rho"] = *k.sgc_rho;
  return out;
}

OptimizerConfig MakeOptimizerConfig(const ExperimentConfig& config,
                                    const ProblemInstance& instance,
                                    const GridPoint& point, std::uint64_t seed) {
  OptimizerConfig out;
  out.kind = config.optimizer;
  out.iterations = point.iterations;
  out.schedule = point.schedule;
  out.output = config.output;
  out.b0 = config.b0;
  out.seed = seed;
  out.record_iterates = false;
  if (config.project && instance.constants.radius && *instance.constants.radius > 0.0) {
    out.projection_radius = *instance.constants.radius;
  }
  if (config.optimizer == OptimizerKind::kDpSgd) {
    out.privacy = PrivacyBudget::Canonical(instance.constants.lipschitz, point.iterations,
                                           point.n, *config.privacy_epsilon,
                                           *config.privacy_delta);
  }
  out.Validate();
  return out;
}

// S for the stability estimate of grid point `index`, its pool indices, and
// the neighbor obtained by replacing the last example with a pool example
// drawn uniformly from the pool minus the replaced entry.
NeighborPair MakeStabilityPair(const ExperimentConfig& config, const PopulationPool& pool,
                               Index n, std::size_t index) {
  const DrawnDataset drawn =
      DrawDataset(pool, n, DeriveSeed(config.master_seed, "stability_data", {index}));
  const Index i = n - 1;
  const Index original = drawn.pool_indices[static_cast<std::size_t>(i)];
  Index pick = original;
  if (pool.size() > 1) {
    CounterRng rng(DeriveSeed(config.master_seed, "replacement", {index}), Substream::kData);
    pick = static_cast<Index>(rng.Below(static_cast<std::uint64_t>(pool.size() - 1)));
    if (pick >= original) ++pick;
  }
  return MakeNeighborPair(drawn.data, i, pool.example(pick));
}

ExampleTable MakeProbes(const ExperimentConfig& config, const PopulationPool& pool) {
  if (!config.stability.probes || *config.stability.probes >= pool.size()) return pool;
  CounterRng rng(DeriveSeed(config.master_seed, "probes"), Substream::kData);
  std::vector<Index> all(static_cast<std::size_t>(pool.size()));
  for (Index i = 0; i < pool.size(); ++i) all[static_cast<std::size_t>(i)] = i;
  // Partial Fisher-Yates.
  const auto k = static_cast<std::size_t>(*config.stability.probes);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t r = j + static_cast<std::size_t>(rng.Below(all.size() - j));
    std::swap(all[j], all[r]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return pool.Select(all);
}

std::vector<StabilityMeasure> AllMeasures(const ExperimentConfig& config) {
  if (!config.stability.measures.empty()) return config.stability.measures;
  return {StabilityMeasure::kFunctionValues, StabilityMeasure::kGradients,
          StabilityMeasure::kArguments};
}

ReportRow PointRow(std::string kind, const GridPoint& point, std::string measure,
                   double estimate) {
  ReportRow row;
  row.kind = std::move(kind);
  row.n = point.n;
  row.iterations = point.iterations;
  row.eta = point.schedule.eta;
  row.measure = std::move(measure);
  row.estimate = estimate;
  return row;
}

struct MeanAndError {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanAndError Summarize(const std::vector<double>& values) {
  MeanAndError out;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double count = static_cast<double>(values.size());
  out.mean = sum / count;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std_error = std::sqrt(ss / (count - 1.0) / count);
  }
  return out;
}

double AxisValue(SweepAxis axis, const GridPoint& point) {
  switch (axis) {
    case SweepAxis::kN:
      return static_cast<double>(point.n);
    case SweepAxis::kT:
      return static_cast<double>(point.iterations);
    case SweepAxis::kEta:
      return point.schedule.eta;
  }
  return 0.0;
}

}  // namespace

ProblemInstance LoadProblemJson(const Json& doc, double radius) {
  Reader r;
  r.Keys(doc, "problem", {"kind", "d", "pool", "constants", "offset", "level"});
  const auto kind = r.Enum(r.Get<std::string>(doc, "kind", "problem"), "problem.kind",
                           ProblemKindFromString);
  const auto d = r.Get<std::int64_t>(doc, "d", "problem");
  r.Expect(kind.has_value(), "problem.kind: required");
  r.Expect(d.has_value() && *d >= 1, "problem.d: required integer >= 1");
  const Json* pool = r.Child(doc, "pool");
  r.Expect(pool != nullptr && pool->is_array() && !pool->empty(),
           "problem.pool: required nonempty list of [[features...], target]");
  if (!r.errors.empty()) throw ValidationError(r.errors);

  const Index dim = static_cast<Index>(*d);
  Matrix features(dim, static_cast<Index>(pool->size()));
  Vector targets(static_cast<Index>(pool->size()));
  for (std::size_t i = 0; i < pool->size(); ++i) {
    const Json& entry = (*pool)[i];
    const std::string where = "problem.pool[" + std::to_string(i) + "]";
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_array() ||
        static_cast<Index>(entry[0].size()) != dim || !entry[1].is_number()) {
      r.errors.push_back(where + ": expected [[" + std::to_string(dim) +
                         " numbers], target]");
      continue;
    }
    for (Index j = 0; j < dim; ++j) {
      const Json& value = entry[0][static_cast<std::size_t>(j)];
      if (!value.is_number()) {
        r.errors.push_back(where + ": non-numeric feature");
        break;
      }
      features(j, static_cast<Index>(i)) = value.get<double>();
    }
    targets[static_cast<Index>(i)] = entry[1].get<double>();
  }
  const std::vector<double> offset = r.GetList<double>(doc, "offset", "problem");
  r.Expect(offset.empty() || static_cast<Index>(offset.size()) == dim,
           "problem.offset: must have d entries");
  const double level = r.Get<double>(doc, "level", "problem").value_or(1.0);
  if (!r.errors.empty()) throw ValidationError(r.errors);

  ProblemInstance out;
  switch (*kind) {
    case ProblemKind::kPhaseRetrieval:
      out.loss = LossProblem::PhaseRetrieval(
          dim, offset.empty() ? Vector() : Eigen::Map<const Vector>(offset.data(), dim));
      break;
    case ProblemKind::kAbsoluteRegression:
      out.loss = LossProblem::AbsoluteRegression(dim);
      break;
    case ProblemKind::kSmoothedRegression:
      out.loss = LossProblem::SmoothedRegression(dim);
      break;
    case ProblemKind::kQuadratic:
      out.loss = LossProblem::Quadratic(dim);
      break;
    case ProblemKind::kConstant:
      out.loss = LossProblem::Constant(dim, level);
      break;
  }
  out.pool = PopulationPool(ExampleTable(std::move(features), std::move(targets)));
  out.constants = CertifyConstants(out.loss, out.pool, radius);
  if (const Json* k = r.Child(doc, "constants")) {
    r.Keys(*k, "problem.constants",
           {"lipschitz", "weak_convexity", "smoothness", "value_bound", "radius",
            "minimizer_norm", "sgc_rho"});
    const std::string p = "problem.constants";
    if (auto v = r.Get<double>(*k, "lipschitz", p)) out.constants.lipschitz = *v;
    if (auto v = r.Get<double>(*k, "weak_convexity", p)) out.constants.weak_convexity = *v;
    if (auto v = r.Get<double>(*k, "smoothness", p)) out.constants.smoothness = *v;
    if (auto v = r.Get<double>(*k, "value_bound", p)) out.constants.value_bound = *v;
    if (auto v = r.Get<double>(*k, "radius", p)) out.constants.radius = *v;
    if (auto v = r.Get<double>(*k, "minimizer_norm", p)) out.constants.minimizer_norm = *v;
    if (auto v = r.Get<double>(*k, "sgc_rho", p)) out.constants.sgc_rho = *v;
    if (!r.errors.empty()) throw ValidationError(r.errors);
  }
  return out;
}

Json ProblemToJson(const ProblemInstance& instance) {
  Json doc = Json::object();
  doc["kind"] = ToString(instance.loss.kind());
  doc["d"] = instance.loss.dim();
  Json pool = Json::array();
  for (Index i = 0; i < instance.pool.size(); ++i) {
    Json features = Json::array();
    for (Index j = 0; j < instance.pool.dim(); ++j) {
      features.push_back(instance.pool.features(i)[j]);
    }
    pool.push_back(Json::array({std::move(features), instance.pool.target(i)}));
  }
  doc["pool"] = std::move(pool);
  doc["constants"] = ConstantsToJson(instance.constants);
  if (instance.loss.kind() == ProblemKind::kPhaseRetrieval &&
      instance.loss.offset().size() > 0 && instance.loss.offset().norm() > 0.0) {
    Json offset = Json::array();
    for (Index j = 0; j < instance.loss.dim(); ++j) offset.push_back(instance.loss.offset()[j]);
    doc["offset"] = std::move(offset);
  }
  if (instance.loss.kind() == ProblemKind::kConstant) doc["level"] = instance.loss.level();
  return doc;
}

ExperimentConfig ParseConfig(const Json& doc, const std::string& base_dir) {
  Reader r;
  ExperimentConfig c;
  r.Keys(doc, "config",
         {"schema", "problem", "pool", "optimizer", "regime", "grid", "trials", "stability",
          "gap", "master_seed", "output", "threads"});
  if (!doc.is_object()) throw ValidationError(r.errors);
  if (auto schema = r.Get<std::string>(doc, "schema", "config")) {
    r.Expect(*schema == "wcopt.config/1", "config.schema: expected 'wcopt.config/1'");
  }

  // problem
  if (const Json* p = r.Child(doc, "problem")) {
    r.Keys(*p, "problem",
           {"kind", "file", "dim", "feature_norm", "planted_norm", "offset_norm", "noise",
            "outlier_fraction", "level", "radius"});
    GeneratorSpec& g = c.problem.generator;
    if (auto kind = r.Enum(r.Get<std::string>(*p, "kind", "problem"), "problem.kind",
                           ProblemKindFromString)) {
      g.kind = *kind;
    }
    if (auto file = r.Get<std::string>(*p, "file", "problem")) {
      const std::filesystem::path path(*file);
      c.problem.file = path.is_absolute() ? *file : (std::filesystem::path(base_dir) / path).string();
    }
    r.Expect(p->contains("kind") || p->contains("file"), "problem.kind: required unless problem.file is given");
    if (auto v = r.Get<std::int64_t>(*p, "dim", "problem")) g.dim = *v;
    if (auto v = r.Get<double>(*p, "feature_norm", "problem")) g.feature_norm = *v;
    if (auto v = r.Get<double>(*p, "planted_norm", "problem")) g.planted_norm = *v;
    if (auto v = r.Get<double>(*p, "offset_norm", "problem")) g.offset_norm = *v;
    if (auto v = r.Get<double>(*p, "noise", "problem")) g.noise = *v;
    if (auto v = r.Get<double>(*p, "outlier_fraction", "problem")) g.outlier_fraction = *v;
    if (auto v = r.Get<double>(*p, "level", "problem")) g.level = *v;
    if (auto v = r.Get<double>(*p, "radius", "problem")) g.radius = *v;
    r.Expect(g.dim >= 1, "problem.dim: must be >= 1");
    r.Expect(g.feature_norm > 0.0, "problem.feature_norm: must be > 0");
    r.Expect(g.planted_norm >= 0.0, "problem.planted_norm: must be >= 0");
    r.Expect(g.offset_norm >= 0.0, "problem.offset_norm: must be >= 0");
    r.Expect(g.noise >= 0.0, "problem.noise: must be >= 0");
    r.Expect(g.outlier_fraction >= 0.0 && g.outlier_fraction <= 1.0,
             "problem.outlier_fraction: must lie in [0, 1]");
    r.Expect(g.radius > 0.0, "problem.radius: must be > 0");
  } else {
    r.errors.push_back("problem: required");
  }

  // pool
  if (const Json* p = r.Child(doc, "pool")) {
    r.Keys(*p, "pool", {"size", "seed"});
    if (auto v = r.Get<std::int64_t>(*p, "size", "pool")) c.problem.generator.pool_size = *v;
    if (auto v = r.Get<std::uint64_t>(*p, "seed", "pool")) c.problem.generator.seed = *v;
    r.Expect(c.problem.generator.pool_size >= 1, "pool.size: must be >= 1");
  }

  // optimizer
  if (const Json* o = r.Child(doc, "optimizer")) {
    r.Keys(*o, "optimizer",
           {"kind", "output", "b0", "project", "iterations", "schedule", "privacy"});
    if (auto v = r.Enum(r.Get<std::string>(*o, "kind", "optimizer"), "optimizer.kind",
                        OptimizerKindFromString)) {
      c.optimizer = *v;
    }
    if (auto v = r.Enum(r.Get<std::string>(*o, "output", "optimizer"), "optimizer.output",
                        OutputSelectorFromString)) {
      c.output = *v;
    }
    if (auto v = r.Get<double>(*o, "b0", "optimizer")) c.b0 = *v;
    if (auto v = r.Get<bool>(*o, "project", "optimizer")) c.project = *v;
    if (auto v = r.Get<std::int64_t>(*o, "iterations", "optimizer")) c.iterations = *v;
    if (const Json* s = r.Child(*o, "schedule")) {
      r.Keys(*s, "optimizer.schedule", {"kind", "eta", "c"});
      StepSchedule schedule;
      if (auto v = r.Enum(r.Get<std::string>(*s, "kind", "optimizer.schedule"),
                          "optimizer.schedule.kind", ScheduleKindFromString)) {
        schedule.kind = *v;
      }
      if (auto v = r.Get<double>(*s, "eta", "optimizer.schedule")) schedule.eta = *v;
      if (auto v = r.Get<double>(*s, "c", "optimizer.schedule")) schedule.c = *v;
      r.Expect(schedule.eta > 0.0, "optimizer.schedule.eta: must be > 0");
      r.Expect(schedule.c > 0.0, "optimizer.schedule.c: must be > 0");
      c.schedule = schedule;
    }
    if (const Json* pv = r.Child(*o, "privacy")) {
      r.Keys(*pv, "optimizer.privacy", {"epsilon", "delta"});
      c.privacy_epsilon = r.Get<double>(*pv, "epsilon", "optimizer.privacy");
      c.privacy_delta = r.Get<double>(*pv, "delta", "optimizer.privacy");
      r.Expect(c.privacy_epsilon && *c.privacy_epsilon > 0.0,
               "optimizer.privacy.epsilon: required, > 0");
      r.Expect(c.privacy_delta && *c.privacy_delta > 0.0 && *c.privacy_delta < 1.0,
               "optimizer.privacy.delta: required, in (0, 1)");
    }
    r.Expect(c.b0 > 0.0, "optimizer.b0: must be > 0");
    r.Expect(!c.iterations || *c.iterations >= 0, "optimizer.iterations: must be >= 0");
  }
  c.regime = r.Enum(r.Get<std::string>(doc, "regime", "config"), "config.regime",
                    RegimeFromString);

  // grid
  if (const Json* g = r.Child(doc, "grid")) {
    r.Keys(*g, "grid", {"n", "T", "eta"});
    c.grid.n = r.GetList<std::int64_t>(*g, "n", "grid");
    c.grid.iterations = r.GetList<std::int64_t>(*g, "T", "grid");
    c.grid.eta = r.GetList<double>(*g, "eta", "grid");
  }
  r.Expect(!c.grid.n.empty(), "grid.n: at least one dataset size is required");
  for (std::int64_t n : c.grid.n) {
    r.Expect(n >= 1, "grid.n: every n must be >= 1 (got " + std::to_string(n) + ")");
    if (!c.problem.file) {
      r.Expect(n <= c.problem.generator.pool_size,
               "grid.n: n = " + std::to_string(n) + " exceeds the pool size M = " +
                   std::to_string(c.problem.generator.pool_size));
    }
  }
  for (std::int64_t t : c.grid.iterations) r.Expect(t >= 0, "grid.T: every T must be >= 0");
  for (double e : c.grid.eta) r.Expect(e > 0.0, "grid.eta: every eta must be > 0");

  if (auto v = r.Get<std::int64_t>(doc, "trials", "config")) c.trials = *v;
  r.Expect(c.trials >= 1, "config.trials: must be >= 1");

  // stability
  if (const Json* s = r.Child(doc, "stability")) {
    r.Keys(*s, "stability", {"enabled", "measures", "probes"});
    c.stability.enabled = r.Get<bool>(*s, "enabled", "stability").value_or(true);
    for (const std::string& name : r.GetList<std::string>(*s, "measures", "stability")) {
      if (auto m = r.Enum(std::optional<std::string>(name), "stability.measures",
                          StabilityMeasureFromString)) {
        c.stability.measures.push_back(*m);
      }
    }
    if (auto v = r.Get<std::int64_t>(*s, "probes", "stability")) {
      r.Expect(*v >= 1, "stability.probes: must be >= 1");
      c.stability.probes = static_cast<Index>(*v);
    }
  }

  // gap
  if (const Json* g = r.Child(doc, "gap")) {
    r.Keys(*g, "gap", {"enabled", "kinds", "draws", "inner_tolerance", "metrics", "fit"});
    c.gap.enabled = r.Get<bool>(*g, "enabled", "gap").value_or(true);
    for (const std::string& name : r.GetList<std::string>(*g, "kinds", "gap")) {
      if (auto k = r.Enum(std::optional<std::string>(name), "gap.kinds", GapKindFromString)) {
        c.gap.kinds.push_back(*k);
      }
    }
    if (auto v = r.Get<std::int64_t>(*g, "draws", "gap")) c.gap.draws = *v;
    if (auto v = r.Get<double>(*g, "inner_tolerance", "gap")) c.gap.inner_tolerance = *v;
    c.gap.metrics = r.GetList<std::string>(*g, "metrics", "gap");
    c.gap.fit = r.GetList<std::string>(*g, "fit", "gap");
    r.Expect(c.gap.draws >= 1, "gap.draws: must be >= 1");
    r.Expect(c.gap.inner_tolerance > 0.0, "gap.inner_tolerance: must be > 0");
    for (const std::string& m : c.gap.metrics) {
      r.Expect(kMetrics.count(m) == 1, "gap.metrics: unknown metric '" + m + "'");
    }
    for (const std::string& m : c.gap.fit) {
      r.Expect(std::find(c.gap.metrics.begin(), c.gap.metrics.end(), m) != c.gap.metrics.end(),
               "gap.fit: '" + m + "' is not listed in gap.metrics");
    }
  }

  if (auto v = r.Get<std::uint64_t>(doc, "master_seed", "config")) c.master_seed = *v;
  c.output_path = r.Get<std::string>(doc, "output", "config");
  if (auto v = r.Get<std::int64_t>(doc, "threads", "config")) {
    r.Expect(*v >= 0, "config.threads: must be >= 0");
    c.threads = static_cast<int>(*v);
  }

  // Cross-field checks.
  const ProblemKind kind = c.problem.generator.kind;
  if (!c.problem.file) {
    const bool smooth = kind == ProblemKind::kSmoothedRegression ||
                        kind == ProblemKind::kQuadratic || kind == ProblemKind::kConstant;
    const bool convex = kind != ProblemKind::kPhaseRetrieval &&
                        kind != ProblemKind::kSmoothedRegression;
    bool wants_gradients =
        std::find(c.gap.kinds.begin(), c.gap.kinds.end(), GapKind::kGradients) != c.gap.kinds.end();
    for (const std::string& m : c.gap.metrics) wants_gradients = wants_gradients || NeedsGradients(m);
    r.Expect(!(c.gap.enabled && wants_gradients && !smooth),
             "gap: gradient gaps and gradient metrics need a smooth loss, not '" +
                 std::string(ToString(kind)) + "'");
    const bool wants_excess = std::find(c.gap.metrics.begin(), c.gap.metrics.end(),
                                        "excess_risk") != c.gap.metrics.end();
    r.Expect(!(c.gap.enabled && wants_excess && !convex),
             "gap.metrics: excess_risk needs a convex loss");
    r.Expect(!c.stability.probes || *c.stability.probes <= c.problem.generator.pool_size,
             "stability.probes: cannot exceed the pool size");
  }
  if (c.optimizer == OptimizerKind::kAdaGradNorm) {
    const bool ok = (c.regime && *c.regime == Regime::kAdaGrad) ||
                    (!c.regime && c.schedule && c.schedule->kind == ScheduleKind::kAdaGrad);
    r.Expect(ok, "optimizer.kind: adagrad_norm needs regime 'adagrad' or an adagrad schedule");
  } else {
    r.Expect(!(c.regime && *c.regime == Regime::kAdaGrad),
             "config.regime: 'adagrad' is only valid with optimizer adagrad_norm");
    r.Expect(!(c.schedule && c.schedule->kind == ScheduleKind::kAdaGrad),
             "optimizer.schedule.kind: 'adagrad' is only valid with optimizer adagrad_norm");
  }
  r.Expect(c.optimizer != OptimizerKind::kDpSgd || c.privacy_epsilon.has_value(),
           "optimizer.privacy: dp_sgd needs a privacy budget");
  r.Expect(c.regime.has_value() || c.iterations.has_value() || !c.grid.iterations.empty(),
           "optimizer.iterations: required when no regime is given");
  r.Expect(c.regime.has_value() || c.schedule.has_value() || !c.grid.eta.empty(),
           "optimizer.schedule: required when no regime is given");
  r.Expect(StrictlyIncreasing(c.grid.n), "grid.n: values must be strictly increasing");
  r.Expect(StrictlyIncreasing(c.grid.iterations), "grid.T: values must be strictly increasing");
  r.Expect(StrictlyIncreasing(c.grid.eta), "grid.eta: values must be strictly increasing");

  if (!r.errors.empty()) throw ValidationError(r.errors);
  return c;
}

ExperimentConfig LoadConfigFile(const std::string& path) {
  const Json doc = ParseJsonText(ReadFile(path), path);
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  return ParseConfig(doc, parent.empty() ? "." : parent.string());
}

Json ConfigToJson(const ExperimentConfig& c) {
  Json doc = Json::object();
  doc["schema"] = "wcopt.config/1";
  Json problem = Json::object();
  const GeneratorSpec& g = c.problem.generator;
  if (c.problem.file) {
    problem["file"] = *c.problem.file;
  } else {
    problem["kind"] = ToString(g.kind);
    problem["dim"] = g.dim;
    problem["feature_norm"] = g.feature_norm;
    problem["planted_norm"] = g.planted_norm;
    problem["offset_norm"] = g.offset_norm;
    problem["noise"] = g.noise;
    problem["outlier_fraction"] = g.outlier_fraction;
    problem["level"] = g.level;
  }
  problem["radius"] = g.radius;
  doc["problem"] = std::move(problem);
  if (!c.problem.file) doc["pool"] = Json{{"size", g.pool_size}, {"seed", g.seed}};

  Json optimizer = Json::object();
  optimizer["kind"] = ToString(c.optimizer);
  optimizer["output"] = ToString(c.output);
  optimizer["b0"] = c.b0;
  optimizer["project"] = c.project;
  if (c.iterations) optimizer["iterations"] = *c.iterations;
  if (c.schedule) {
    optimizer["schedule"] = Json{{"kind", ToString(c.schedule->kind)},
                                 {"eta", c.schedule->eta},
                                 {"c", c.schedule->c}};
  }
  if (c.privacy_epsilon) {
    optimizer["privacy"] = Json{{"epsilon", *c.privacy_epsilon}, {"delta", *c.privacy_delta}};
  }
  doc["optimizer"] = std::move(optimizer);
  if (c.regime) doc["regime"] = ToString(*c.regime);

  Json grid = Json::object();
  grid["n"] = c.grid.n;
  if (!c.grid.iterations.empty()) grid["T"] = c.grid.iterations;
  if (!c.grid.eta.empty()) grid["eta"] = c.grid.eta;
  doc["grid"] = std::move(grid);
  doc["trials"] = c.trials;

  Json stability = Json::object();
  stability["enabled"] = c.stability.enabled;
  Json measures = Json::array();
  for (StabilityMeasure m : c.stability.measures) measures.push_back(ToString(m));
  stability["measures"] = std::move(measures);
  if (c.stability.probes) stability["probes"] = *c.stability.probes;
  doc["stability"] = std::move(stability);

  Json gap = Json::object();
  gap["enabled"] = c.gap.enabled;
  Json kinds = Json::array();
  for (GapKind k : c.gap.kinds) kinds.push_back(ToString(k));
  gap["kinds"] = std::move(kinds);
  gap["draws"] = c.gap.draws;
  gap["inner_tolerance"] = c.gap.inner_tolerance;
  gap["metrics"] = c.gap.metrics;
  gap["fit"] = c.gap.fit;
  doc["gap"] = std::move(gap);
  doc["master_seed"] = c.master_seed;
  return doc;
}

SweepAxis SweepAxisFromString(std::string_view name) {
  if (name == "n") return SweepAxis::kN;
  if (name == "T") return SweepAxis::kT;
  if (name == "eta") return SweepAxis::kEta;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "' (expected n, T or eta)");
}

std::vector<GridPoint> PlanSweep(const ExperimentConfig& config,
                                 const ProblemConstants& constants, SweepAxis axis) {
  std::vector<std::string> violations;
  const bool fixed_t = config.iterations.has_value();
  const bool fixed_eta = config.schedule.has_value();
  if (axis != SweepAxis::kN && config.grid.n.size() != 1) {
    violations.push_back("grid.n: a T or eta sweep needs exactly one n");
  }
  if (axis == SweepAxis::kN && config.regime && (fixed_t || fixed_eta)) {
    violations.push_back(
        "optimizer: iterations/schedule conflict with the regime, which sets T and eta per n");
  }
  if (axis == SweepAxis::kT && config.grid.iterations.empty()) {
    violations.push_back("grid.T: required for a T sweep");
  }
  if (axis == SweepAxis::kEta && config.grid.eta.empty()) {
    violations.push_back("grid.eta: required for an eta sweep");
  }
  if (axis != SweepAxis::kT && !config.regime && !fixed_t && config.grid.iterations.size() != 1) {
    violations.push_back("optimizer.iterations: required (or a single grid.T value)");
  }
  if (axis != SweepAxis::kEta && !config.regime && !fixed_eta && config.grid.eta.size() != 1) {
    violations.push_back("optimizer.schedule: required (or a single grid.eta value)");
  }
  if (!violations.empty()) throw ValidationError(violations);

  std::vector<GridPoint> points;
  auto base = [&](std::int64_t n) {
    GridPoint p;
    p.n = static_cast<Index>(n);
    if (config.regime) {
      const TunedSchedule tuned = TuneSchedule(*config.regime, n, constants);
      p.iterations = tuned.iterations;
      p.schedule = tuned.schedule;
    }
    if (config.schedule) p.schedule = *config.schedule;
    if (config.iterations) p.iterations = *config.iterations;
    if (!config.regime && !fixed_t && config.grid.iterations.size() == 1) {
      p.iterations = config.grid.iterations.front();
    }
    if (!config.regime && !fixed_eta && config.grid.eta.size() == 1) {
      p.schedule.eta = config.grid.eta.front();
    }
    return p;
  };
  switch (axis) {
    case SweepAxis::kN:
      for (std::int64_t n : config.grid.n) points.push_back(base(n));
      break;
    case SweepAxis::kT:
      for (std::int64_t t : config.grid.iterations) {
        GridPoint p = base(config.grid.n.front());
        p.iterations = t;
        points.push_back(p);
      }
      break;
    case SweepAxis::kEta:
      for (double eta : config.grid.eta) {
        GridPoint p = base(config.grid.n.front());
        p.schedule.eta = eta;
        points.push_back(p);
      }
      break;
  }
  return points;
}

ProblemInstance BuildInstance(const ExperimentConfig& config) {
  ProblemInstance instance;
  if (config.problem.file) {
    instance = LoadProblemJson(ParseJsonText(ReadFile(*config.problem.file), *config.problem.file),
                               config.problem.generator.radius);
  } else {
    instance = GenerateInstance(config.problem.generator);
  }
  std::vector<std::string> violations;
  for (std::int64_t n : config.grid.n) {
    if (n > instance.pool.size()) {
      violations.push_back("grid.n: n = " + std::to_string(n) + " exceeds the pool size M = " +
                           std::to_string(instance.pool.size()));
    }
  }
  if (!violations.empty()) throw ValidationError(violations);
  return instance;
}

Report RunConfig(const ExperimentConfig& config) { return Sweep(config, SweepAxis::kN); }

Report Sweep(const ExperimentConfig& config, SweepAxis axis) {
  const ProblemInstance instance = BuildInstance(config);
  const std::vector<GridPoint> points = PlanSweep(config, instance.constants, axis);
  if (!config.gap.fit.empty() && points.size() < 4) {
    throw ValidationError({"gap.fit: a rate fit needs at least 4 sweep points"});
  }
  const int threads = ResolveThreadBudget(config.threads);
  const LossProblem& loss = instance.loss;
  const PopulationPool& pool = instance.pool;
  const ProblemConstants& constants = instance.constants;

  bool wants_gradients = std::find(config.gap.kinds.begin(), config.gap.kinds.end(),
                                   GapKind::kGradients) != config.gap.kinds.end();
  bool wants_moreau = std::find(config.gap.kinds.begin(), config.gap.kinds.end(),
                                GapKind::kMoreauGradients) != config.gap.kinds.end();
  for (const std::string& m : config.gap.metrics) {
    wants_gradients = wants_gradients || NeedsGradients(m);
    wants_moreau = wants_moreau || NeedsMoreau(m);
  }
  const MoreauConfig moreau =
      DefaultMoreauConfig(constants.weak_convexity, config.gap.inner_tolerance);
  std::optional<double> optimal_risk;
  if (config.gap.enabled && std::find(config.gap.metrics.begin(), config.gap.metrics.end(),
                                      "excess_risk") != config.gap.metrics.end()) {
    optimal_risk = OptimalRisk(loss, pool);
  }
  const ExampleTable probes = config.stability.enabled ? MakeProbes(config, pool) : ExampleTable();

  Report report;
  report.config = ConfigToJson(config);
  std::map<std::string, std::vector<std::pair<double, double>>> fit_points;

  for (std::size_t gi = 0; gi < points.size(); ++gi) {
    const GridPoint& point = points[gi];
    const OptimizerConfig opt = MakeOptimizerConfig(
        config, instance, point, DeriveSeed(config.master_seed, "point", {gi}));
    std::map<StabilityMeasure, StabilityReport> stability;
    if (config.stability.enabled) {
      const NeighborPair pair = MakeStabilityPair(config, pool, point.n, gi);
      StabilityOptions options;
      options.trials = config.trials;
      options.threads = threads;
      options.constants = constants;
      for (StabilityMeasure measure : AllMeasures(config)) {
        const StabilityReport s = CoupledStabilityEstimate(loss, pair, opt, measure, probes, options);
        ReportRow row = PointRow("stability", point, std::string(ToString(measure)), s.epsilon_hat);
        row.std_error = s.std_error;
        row.bound = s.theoretical_bound;
        report.rows.push_back(std::move(row));
        stability.emplace(measure, s);
      }
    }
    if (!config.gap.enabled) continue;

    DrawOptions options;
    options.draws = config.gap.draws;
    options.threads = threads;
    options.gradients = wants_gradients;
    options.weak_convexity = constants.weak_convexity;
    if (wants_moreau) options.moreau = moreau;
    const std::vector<DrawRecord> records = EvaluateDraws(loss, pool, point.n, opt, options);

    for (GapKind kind : config.gap.kinds) {
      std::optional<GapBoundInput> bound;
      const StabilityMeasure source = kind == GapKind::kFunctionValues ? StabilityMeasure::kFunctionValues
                                      : kind == GapKind::kGradients    ? StabilityMeasure::kGradients
                                                                       : StabilityMeasure::kArguments;
      if (auto it = stability.find(source); it != stability.end()) {
        bound = GapBoundInput{it->second.epsilon_hat + 3.0 * it->second.std_error, constants};
      }
      const GapReport gap = SummarizeGap(records, kind, point.n, opt,
                                         wants_moreau ? std::optional<double>(moreau.lambda)
                                                      : std::nullopt,
                                         bound);
      ReportRow row = PointRow("gap", point, std::string(ToString(kind)), gap.gap_estimate);
      row.std_error = gap.std_error;
      row.bound = gap.rhs_bound;
      report.rows.push_back(std::move(row));
      if (gap.variance_term) {
        report.rows.push_back(PointRow("gap", point, "variance_term", *gap.variance_term));
      }
      if (gap.inner_residual) {
        report.rows.push_back(
            PointRow("gap", point, "moreau_slack", 2.0 * *gap.inner_residual / *gap.lambda));
      }
    }

    for (const std::string& metric : config.gap.metrics) {
      std::vector<double> values;
      for (const DrawRecord& rec : records) {
        if (metric == "population_risk") values.push_back(rec.population_risk);
        if (metric == "empirical_risk") values.push_back(rec.empirical_risk);
        if (metric == "excess_risk") values.push_back(rec.population_risk - *optimal_risk);
        if (metric == "grad_population") values.push_back(rec.gradients->population_norm);
        if (metric == "grad_empirical") values.push_back(rec.gradients->empirical_norm);
        if (metric == "moreau_grad_population") values.push_back(rec.moreau->population_norm);
        if (metric == "moreau_grad_empirical") values.push_back(rec.moreau->empirical_norm);
        if (metric == "moreau_gap_q90") values.push_back(rec.moreau->gap);
      }
      ReportRow row;
      if (metric == "moreau_gap_q90") {
        row = PointRow("metric", point, metric, Quantile(values, 0.9));
      } else {
        const MeanAndError s = Summarize(values);
        row = PointRow("metric", point, metric, s.mean);
        row.std_error = s.std_error;
      }
      fit_points[metric].emplace_back(AxisValue(axis, point), row.estimate);
      report.rows.push_back(std::move(row));
    }
  }

  for (const std::string& metric : config.gap.fit) {
    const RateFit fit = FitRate(fit_points[metric]);
    ReportRow row;
    row.kind = "rate_fit";
    row.measure = metric;
    row.estimate = fit.intercept;
    row.slope = fit.slope;
    row.r2 = fit.r_squared;
    report.rows.push_back(std::move(row));
  }
  return report;
}

Report Enumerate(const ExperimentConfig& config) {
  const ProblemInstance instance = BuildInstance(config);
  const std::vector<GridPoint> points = PlanSweep(config, instance.constants, SweepAxis::kN);
  const ExampleTable probes = MakeProbes(config, instance.pool);
  Report report;
  report.config = ConfigToJson(config);
  for (std::size_t gi = 0; gi < points.size(); ++gi) {
    const GridPoint& point = points[gi];
    const OptimizerConfig opt = MakeOptimizerConfig(
        config, instance, point, DeriveSeed(config.master_seed, "point", {gi}));
    const NeighborPair pair = MakeStabilityPair(config, instance.pool, point.n, gi);
    for (StabilityMeasure measure : AllMeasures(config)) {
      const double exact = ExactExpectationEnumerate(instance.loss, pair, opt, measure, probes);
      report.rows.push_back(PointRow("exact", point, std::string(ToString(measure)), exact));
    }
    report.rows.push_back(PointRow(
        "inclusion", point, "exact",
        InclusionProbability(point.n, point.iterations, InclusionMode::kExact)));
    report.rows.push_back(PointRow(
        "inclusion", point, "bound",
        InclusionProbability(point.n, point.iterations, InclusionMode::kBound)));
    report.rows.push_back(PointRow("inclusion", point, "enumerated",
                                   EnumeratedInclusionFrequency(point.n, point.iterations)));
  }
  return report;
}

}  // namespace wcopt
