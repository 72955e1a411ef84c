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


// Acceptance binary: runs the twelve criteria and prints one PASS/FAIL line
// for each. Exit status 3 when any criterion fails.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wcopt/acceptance.hpp"
#include "wcopt/parallel.hpp"
#include "wcopt/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"wcopt acceptance suite"};
  wcopt::AcceptanceOptions options;
  int threads = 0;
  std::string out;
  app.add_option("--seed", options.master_seed, "Master seed");
  app.add_option("--threads", threads, "Thread budget (overrides WCOPT_THREADS)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--alternate-threads", options.alternate_threads,
                 "Thread budget of the determinism rerun")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--only", options.only, "Criterion ids to run")->check(CLI::Range(1, 12));
  app.add_option("--out", out, "Write the JSON report here");
  CLI11_PARSE(app, argc, argv);
  options.threads = wcopt::ResolveThreadBudget(threads);

  const wcopt::AcceptanceOutcome outcome =
      wcopt::RunAcceptance(options, [](const wcopt::CriterionResult& r) {
        std::cout << wcopt::FormatCriterionLine(r) << std::endl;
      });
  int passed = 0;
  for (const auto& c : outcome.criteria) passed += c.passed ? 1 : 0;
  std::cout << passed << "/" << outcome.criteria.size() << " criteria passed" << std::endl;
  if (!out.empty()) {
    std::ofstream(out, std::ios::binary)
        << wcopt::EmitReport(outcome.report, wcopt::ReportFormat::kJson);
  }
  return outcome.all_passed ? 0 : 3;
}
