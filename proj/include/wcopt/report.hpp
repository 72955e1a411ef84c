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


#ifndef WCOPT_REPORT_HPP_
#define WCOPT_REPORT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wcopt {

inline constexpr std::string_view kReportSchema = "wcopt.report/1";
inline constexpr std::string_view kCsvHeader =
    "kind,n,T,eta,measure,estimate,std_error,bound,slope,r2";

// One CSV line. kind is one of stability, gap, metric, rate_fit, exact,
// inclusion, acceptance.
struct ReportRow {
  std::string kind;
  std::optional<std::int64_t> n;
  std::optional<std::int64_t> iterations;
  std::optional<double> eta;
  std::string measure;
  double estimate = 0.0;
  std::optional<double> std_error;
  std::optional<double> bound;
  std::optional<double> slope;
  std::optional<double> r2;

  bool operator==(const ReportRow&) const = default;
};

struct Report {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<ReportRow> rows;
};

enum class ReportFormat { kJson, kCsv };
ReportFormat ReportFormatFromString(std::string_view name);

// Shortest decimal string that parses back to the same double.
std::string FormatDouble(double value);

// json: one schema-tagged document; csv: fixed header then one line per row.
std::string EmitReport(const Report& report, ReportFormat format);

// Inverses of EmitReport, used by round-trip checks and by tools reading
// archived reports. Throw ConfigError on malformed input.
Report ParseJsonReport(std::string_view text);
std::vector<ReportRow> ParseCsvRows(std::string_view text);

}  // namespace wcopt

#endif  // WCOPT_REPORT_HPP_
