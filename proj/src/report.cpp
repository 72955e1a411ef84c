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


#include "wcopt/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <system_error>

#include "wcopt/errors.hpp"

namespace wcopt {
namespace {

using Json = nlohmann::ordered_json;

template <typename T>
Json OptionalToJson(const std::optional<T>& value) {
  return value ? Json(*value) : Json(nullptr);
}

template <typename T>
std::optional<T> OptionalFromJson(const Json& object, const char* key) {
  if (!object.contains(key) || object[key].is_null()) return std::nullopt;
  return object[key].get<T>();
}

void AppendOptional(std::string& out, const std::optional<double>& value) {
  if (value) out += FormatDouble(*value);
}

void AppendOptional(std::string& out, const std::optional<std::int64_t>& value) {
  if (value) out += std::to_string(*value);
}

std::vector<std::string> SplitLine(std::string_view line) {
  std::vector<std::string> fields(1);
  for (char c : line) {
    if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

double ParseDouble(const std::string& field) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size()) {
    throw ConfigError("malformed number '" + field + "' in CSV report");
  }
  return value;
}

std::optional<double> ParseOptionalDouble(const std::string& field) {
  if (field.empty()) return std::nullopt;
  return ParseDouble(field);
}

std::optional<std::int64_t> ParseOptionalInt(const std::string& field) {
  if (field.empty()) return std::nullopt;
  std::int64_t value = 0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size()) {
    throw ConfigError("malformed integer '" + field + "' in CSV report");
  }
  return value;
}

}  // namespace

ReportFormat ReportFormatFromString(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  throw ConfigError("unknown report format '" + std::string(name) + "'");
}

std::string FormatDouble(double value) {
  if (!std::isfinite(value)) {
    throw ConfigError("reports carry finite numbers only");
  }
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

std::string EmitReport(const Report& report, ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const ReportRow& row : report.rows) {
      out += row.kind;
      out += ',';
      AppendOptional(out, row.n);
      out += ',';
      AppendOptional(out, row.iterations);
      out += ',';
      AppendOptional(out, row.eta);
      out += ',';
      out += row.measure;
      out += ',';
      out += FormatDouble(row.estimate);
      out += ',';
      AppendOptional(out, row.std_error);
      out += ',';
      AppendOptional(out, row.bound);
      out += ',';
      AppendOptional(out, row.slope);
      out += ',';
      AppendOptional(out, row.r2);
      out += '\n';
    }
    return out;
  }
  Json doc = Json::object();
  doc["schema"] = kReportSchema;
  doc["config"] = report.config;
  Json rows = Json::array();
  for (const ReportRow& row : report.rows) {
    FormatDouble(row.estimate);  // rejects non-finite values like the CSV path
    Json r = Json::object();
    r["kind"] = row.kind;
    r["n"] = OptionalToJson(row.n);
    r["T"] = OptionalToJson(row.iterations);
    r["eta"] = OptionalToJson(row.eta);
    r["measure"] = row.measure;
    r["estimate"] = row.estimate;
    r["std_error"] = OptionalToJson(row.std_error);
    r["bound"] = OptionalToJson(row.bound);
    r["slope"] = OptionalToJson(row.slope);
    r["r2"] = OptionalToJson(row.r2);
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

Report ParseJsonReport(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed JSON report: ") + e.what());
  }
  if (!doc.is_object() || doc.value("schema", "") != kReportSchema) {
    throw ConfigError("JSON report lacks the schema tag " + std::string(kReportSchema));
  }
  Report report;
  report.config = doc.value("config", Json::object());
  try {
    for (const Json& r : doc.at("rows")) {
      ReportRow row;
      row.kind = r.at("kind").get<std::string>();
      row.n = OptionalFromJson<std::int64_t>(r, "n");
      row.iterations = OptionalFromJson<std::int64_t>(r, "T");
      row.eta = OptionalFromJson<double>(r, "eta");
      row.measure = r.at("measure").get<std::string>();
      row.estimate = r.at("estimate").get<double>();
      row.std_error = OptionalFromJson<double>(r, "std_error");
      row.bound = OptionalFromJson<double>(r, "bound");
      row.slope = OptionalFromJson<double>(r, "slope");
      row.r2 = OptionalFromJson<double>(r, "r2");
      report.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed report row: ") + e.what());
  }
  return report;
}

std::vector<ReportRow> ParseCsvRows(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ConfigError("CSV report does not start with the fixed header");
  }
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitLine(line);
    if (f.size() != 10) throw ConfigError("CSV report line has the wrong field count");
    ReportRow row;
    row.kind = f[0];
    row.n = ParseOptionalInt(f[1]);
    row.iterations = ParseOptionalInt(f[2]);
    row.eta = ParseOptionalDouble(f[3]);
    row.measure = f[4];
    row.estimate = ParseDouble(f[5]);
    row.std_error = ParseOptionalDouble(f[6]);
    row.bound = ParseOptionalDouble(f[7]);
    row.slope = ParseOptionalDouble(f[8]);
    row.r2 = ParseOptionalDouble(f[9]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace wcopt
