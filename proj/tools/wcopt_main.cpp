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


// wcopt: command-line front end for configured experiments and the
// acceptance suite.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wcopt/acceptance.hpp"
#include "wcopt/errors.hpp"
#include "wcopt/harness.hpp"
#include "wcopt/parallel.hpp"
#include "wcopt/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNonConverged = 2;
constexpr int kExitAcceptance = 3;

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
  std::string format = "json";
};

void AddCommonFlags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "Master seed (overrides the config)");
  cmd->add_option("--threads", flags.threads, "Thread budget (overrides WCOPT_THREADS)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", flags.out, "Write the report here instead of stdout");
  cmd->add_option("--format", flags.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));
}

void WriteOutput(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw wcopt::ConfigError("cannot open output file '" + path + "'");
  file << text;
  if (!file) throw wcopt::ConfigError("failed writing '" + path + "'");
}

wcopt::ExperimentConfig Load(const std::string& path, const CommonFlags& flags) {
  wcopt::ExperimentConfig config = wcopt::LoadConfigFile(path);
  if (flags.seed) config.master_seed = *flags.seed;
  if (flags.threads > 0) config.threads = flags.threads;
  return config;
}

std::string Destination(const CommonFlags& flags, const wcopt::ExperimentConfig& config) {
  if (!flags.out.empty()) return flags.out;
  return config.output_path.value_or("");
}

int Emit(const wcopt::Report& report, const CommonFlags& flags, const std::string& dest) {
  WriteOutput(wcopt::EmitReport(report, wcopt::ReportFormatFromString(flags.format)), dest);
  return kExitOk;
}

int Verify(const CommonFlags& flags, int alternate, const std::vector<int>& only) {
  wcopt::AcceptanceOptions options;
  if (flags.seed) options.master_seed = *flags.seed;
  options.threads = wcopt::ResolveThreadBudget(flags.threads);
  options.alternate_threads = alternate;
  options.only = only;
  const wcopt::AcceptanceOutcome outcome =
      wcopt::RunAcceptance(options, [](const wcopt::CriterionResult& r) {
        std::cerr << wcopt::FormatCriterionLine(r) << std::endl;
      });
  int passed = 0;
  for (const auto& c : outcome.criteria) passed += c.passed ? 1 : 0;
  std::cerr << passed << "/" << outcome.criteria.size() << " criteria passed" << std::endl;
  if (!flags.out.empty()) Emit(outcome.report, flags, flags.out);
  return outcome.all_passed ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability and generalization experiments for first-order methods"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string config_path;
  std::string axis = "n";
  int alternate = 0;
  std::vector<int> only;

  CLI::App* run = app.add_subcommand("run", "Run a config over its n grid");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  AddCommonFlags(run, flags);

  CLI::App* sweep = app.add_subcommand("sweep", "Sweep one grid axis");
  sweep->add_option("config", config_path, "Experiment config (JSON)")->required();
  sweep->add_option("--axis", axis, "Axis to sweep")->check(CLI::IsMember({"n", "T", "eta"}));
  AddCommonFlags(sweep, flags);

  CLI::App* verify = app.add_subcommand("verify", "Run the acceptance suite");
  AddCommonFlags(verify, flags);
  verify->add_option("--alternate-threads", alternate,
                     "Thread budget for the determinism rerun (0: automatic)")
      ->check(CLI::NonNegativeNumber);
  verify->add_option("--only", only, "Criterion ids to run")->check(CLI::Range(1, 12));

  CLI::App* enumerate = app.add_subcommand("enumerate", "Exact expectations by enumeration");
  enumerate->add_option("config", config_path, "Experiment config (JSON)")->required();
  AddCommonFlags(enumerate, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*verify) return Verify(flags, alternate, only);
    const wcopt::ExperimentConfig config = Load(config_path, flags);
    const std::string dest = Destination(flags, config);
    if (*run) return Emit(wcopt::RunConfig(config), flags, dest);
    if (*sweep) return Emit(wcopt::Sweep(config, wcopt::SweepAxisFromString(axis)), flags, dest);
    return Emit(wcopt::Enumerate(config), flags, dest);
  } catch (const wcopt::NonConvergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNonConverged;
  } catch (const wcopt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
