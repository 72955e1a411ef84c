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


#ifndef WCOPT_ACCEPTANCE_HPP_
#define WCOPT_ACCEPTANCE_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wcopt/problems.hpp"
#include "wcopt/report.hpp"

namespace wcopt {

// Instances the acceptance suite runs on. The pool seed is derived from the
// master seed.
GeneratorSpec ConvexSuite(std::uint64_t master_seed);         // absolute regression
GeneratorSpec WeaklyConvexSuite(std::uint64_t master_seed);   // phase retrieval
GeneratorSpec NoisyWeaklyConvexSuite(std::uint64_t master_seed);
GeneratorSpec SmoothSuite(std::uint64_t master_seed);         // smoothed regression

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  std::vector<ReportRow> rows;
  double seconds = 0.0;  // wall time; never part of the report
};

struct AcceptanceOptions {
  std::uint64_t master_seed = 20260101;
  int threads = 1;
  // Criterion 12 reruns criteria 1-11 with this budget (0: pick one that
  // differs from `threads`) and compares report bytes.
  int alternate_threads = 0;
  // Criterion ids to run; empty runs all twelve.
  std::vector<int> only;
};

struct AcceptanceOutcome {
  std::vector<CriterionResult> criteria;
  Report report;
  bool all_passed = true;
};

// Runs the suite; `on_result` sees each criterion as soon as it finishes.
AcceptanceOutcome RunAcceptance(
    const AcceptanceOptions& options,
    const std::function<void(const CriterionResult&)>& on_result = {});

// "PASS  3 exhaustive_oracle  <detail>" style line.
std::string FormatCriterionLine(const CriterionResult& result);

}  // namespace wcopt

#endif  // WCOPT_ACCEPTANCE_HPP_
