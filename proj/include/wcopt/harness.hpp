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


#ifndef WCOPT_HARNESS_HPP_
#define WCOPT_HARNESS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcopt/generalization.hpp"
#include "wcopt/optimizers.hpp"
#include "wcopt/problems.hpp"
#include "wcopt/report.hpp"
#include "wcopt/stability.hpp"

namespace wcopt {

// Problem JSON: {"kind", "d", "pool": [[[features...], target], ...],
// "constants": {...}} plus optional "offset" (phase retrieval) and "level"
// (constant loss). Missing constants are certified on `radius`.
ProblemInstance LoadProblemJson(const nlohmann::ordered_json& doc, double radius);
nlohmann::ordered_json ProblemToJson(const ProblemInstance& instance);

struct ProblemSpec {
  std::optional<std::string> file;  // problem JSON; overrides the generator
  GeneratorSpec generator;          // pool_size and seed form the pool spec
};

struct StabilitySettings {
  bool enabled = false;
  std::vector<StabilityMeasure> measures;
  std::optional<Index> probes;  // random subset of the pool; absent = all
};

struct GapSettings {
  bool enabled = false;
  std::vector<GapKind> kinds;
  std::int64_t draws = 20;
  double inner_tolerance = 1e-8;
  // Per-point summaries: population_risk, empirical_risk, excess_risk,
  // grad_population, grad_empirical, moreau_grad_population,
  // moreau_grad_empirical, moreau_gap_q90.
  std::vector<std::string> metrics;
  // Metrics fitted against the sweep axis after all points ran.
  std::vector<std::string> fit;
};

struct Grid {
  std::vector<std::int64_t> n;
  std::vector<std::int64_t> iterations;
  std::vector<double> eta;
};

struct ExperimentConfig {
  ProblemSpec problem;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  OutputSelector output = OutputSelector::kLast;
  double b0 = 1.0;
  bool project = true;  // projection radius = problem radius
  std::optional<Regime> regime;
  std::optional<std::int64_t> iterations;
  std::optional<StepSchedule> schedule;
  std::optional<double> privacy_epsilon;
  std::optional<double> privacy_delta;
  Grid grid;
  std::int64_t trials = 100;
  StabilitySettings stability;
  GapSettings gap;
  std::uint64_t master_seed = 0;
  std::optional<std::string> output_path;
  int threads = 0;  // 0 = resolve from WCOPT_THREADS / hardware
};

// Parses and validates; throws ValidationError listing every violation.
// Relative problem file paths resolve against `base_dir`.
ExperimentConfig ParseConfig(const nlohmann::ordered_json& doc,
                             const std::string& base_dir = ".");
ExperimentConfig LoadConfigFile(const std::string& path);

// Normalized config with every default filled in. Omits the thread budget and
// output path, which never change results.
nlohmann::ordered_json ConfigToJson(const ExperimentConfig& config);

enum class SweepAxis { kN, kT, kEta };
SweepAxis SweepAxisFromString(std::string_view name);

// The (n, T, eta) points a sweep visits.
struct GridPoint {
  Index n = 0;
  std::int64_t iterations = 0;
  StepSchedule schedule;
};
std::vector<GridPoint> PlanSweep(const ExperimentConfig& config,
                                 const ProblemConstants& constants, SweepAxis axis);

ProblemInstance BuildInstance(const ExperimentConfig& config);

// run_config is the n-axis sweep.
Report RunConfig(const ExperimentConfig& config);
Report Sweep(const ExperimentConfig& config, SweepAxis axis);

// Exhaustive small-case oracle: exact coupled stability for every grid point
// plus exact / bound / enumerated inclusion probabilities.
Report Enumerate(const ExperimentConfig& config);

}  // namespace wcopt

#endif  // WCOPT_HARNESS_HPP_
