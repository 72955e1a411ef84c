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


#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "wcopt/errors.hpp"
#include "wcopt/report.hpp"

namespace wcopt {
namespace {

ReportRow StabilityRow() {
  ReportRow r;
  r.kind = "stability";
  r.n = 100;
  r.iterations = 20;
  r.eta = 0.1;
  r.measure = "arguments";
  r.estimate = 0.1 + 0.2;  // 0.30000000000000004
  r.std_error = 1.0 / 3.0;
  r.bound = 0.6;
  return r;
}

int CountLines(const std::string& s) {
  int lines = 0;
  for (char c : s) lines += c == '\n';
  return lines;
}

TEST(EmitReport, EmptyReportIsHeaderOnlyCsv) {
  EXPECT_EQ(EmitReport(Report{}, ReportFormat::kCsv), std::string(kCsvHeader) + "\n");
}

TEST(EmitReport, OneRowIsTwoCsvLines) {
  Report r;
  r.rows.push_back(StabilityRow());
  const std::string csv = EmitReport(r, ReportFormat::kCsv);
  EXPECT_EQ(CountLines(csv), 2);
  EXPECT_EQ(csv.substr(csv.find('\n') + 1),
            "stability,100,20,0.1,arguments,0.30000000000000004,0.3333333333333333,0.6,,\n");
}

TEST(EmitReport, JsonIsSchemaTagged) {
  Report r;
  r.config["master_seed"] = 3;
  r.rows.push_back(StabilityRow());
  const auto doc = nlohmann::json::parse(EmitReport(r, ReportFormat::kJson));
  EXPECT_EQ(doc.at("schema"), std::string(kReportSchema));
  EXPECT_EQ(doc.at("config").at("master_seed"), 3);
  EXPECT_EQ(doc.at("rows").size(), 1u);
  EXPECT_TRUE(doc.at("rows")[0].at("slope").is_null());
}

TEST(EmitReport, JsonCsvRoundTripPreservesNumbers) {
  Report r;
  ReportRow a = StabilityRow();
  ReportRow b;
  b.kind = "rate_fit";
  b.measure = "excess_risk";
  b.estimate = std::nextafter(1.0, 2.0);
  b.slope = -1.0 / 3.0;
  b.r2 = 0.987654321987654321;
  ReportRow c = StabilityRow();
  c.estimate = 5e-324;
  c.eta = 1e300;
  r.rows = {a, b, c};
  const Report back = ParseJsonReport(EmitReport(r, ReportFormat::kJson));
  EXPECT_EQ(back.rows, r.rows);
  const std::vector<ReportRow> csv = ParseCsvRows(EmitReport(back, ReportFormat::kCsv));
  EXPECT_EQ(csv, r.rows);
}

TEST(EmitReport, NonFiniteValuesRejected) {
  Report r;
  ReportRow row = StabilityRow();
  row.estimate = std::numeric_limits<double>::quiet_NaN();
  r.rows.push_back(row);
  EXPECT_THROW(EmitReport(r, ReportFormat::kCsv), Error);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(1e-7), "1e-07");
  for (double v : {1.0 / 3.0, 2.0 / 7.0, 123456.789, -4.5e-300}) {
    EXPECT_EQ(std::stod(FormatDouble(v)), v);
  }
}

TEST(ParseReport, MalformedInput) {
  EXPECT_THROW(ParseJsonReport("{not json"), ConfigError);
  EXPECT_THROW(ParseJsonReport(R"({"schema":"other/1","config":{},"rows":[]})"), ConfigError);
  EXPECT_THROW(ParseCsvRows("kind,n\n"), ConfigError);
  EXPECT_THROW(ParseCsvRows(std::string(kCsvHeader) + "\nstability,1,2\n"), ConfigError);
}

TEST(ReportFormat, Names) {
  EXPECT_EQ(ReportFormatFromString("json"), ReportFormat::kJson);
  EXPECT_EQ(ReportFormatFromString("csv"), ReportFormat::kCsv);
  EXPECT_THROW(ReportFormatFromString("xml"), ConfigError);
}

}  // namespace
}  // namespace wcopt
