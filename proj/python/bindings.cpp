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


// Python module wcopt._wcopt. Configs and reports cross the boundary as JSON
// text; the wcopt package wraps them in dicts.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wcopt/acceptance.hpp"
#include "wcopt/errors.hpp"
#include "wcopt/generalization.hpp"
#include "wcopt/harness.hpp"
#include "wcopt/moreau.hpp"
#include "wcopt/optimizers.hpp"
#include "wcopt/report.hpp"
#include "wcopt/stability.hpp"

namespace py = pybind11;

namespace {

std::vector<double> ToList(const wcopt::Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

wcopt::ExperimentConfig ParseConfigText(const std::string& text,
                                        const std::string& base_dir, int threads) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw wcopt::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  auto config = wcopt::ParseConfig(doc, base_dir);
  if (threads > 0) config.threads = threads;
  return config;
}

std::string Emit(const wcopt::Report& report, const std::string& format) {
  return wcopt::EmitReport(report, wcopt::ReportFormatFromString(format));
}

}  // namespace

PYBIND11_MODULE(_wcopt, m) {
  m.doc() = "Native core of the wcopt package";

  auto error = py::register_exception<wcopt::Error>(m, "Error", PyExc_RuntimeError);
  auto config_error =
      py::register_exception<wcopt::ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<wcopt::ValidationError>(m, "ValidationError",
                                                 config_error.ptr());
  py::register_exception<wcopt::DomainError>(m, "DomainError", error.ptr());
  py::register_exception<wcopt::UnsupportedError>(m, "UnsupportedError", error.ptr());
  py::register_exception<wcopt::NonConvergedError>(m, "NonConvergedError", error.ptr());

  m.def(
      "prox_oracle_1d",
      [](const std::string& kind, double lam, double w) {
        const auto r =
            wcopt::ProxOracle1d(wcopt::ClosedFormKindFromString(kind), lam, w);
        py::dict out;
        out["prox_point"] = r.prox_point(0);
        out["envelope_value"] = r.envelope_value;
        out["envelope_gradient"] = r.envelope_gradient(0);
        return out;
      },
      py::arg("kind"), py::arg("lam"), py::arg("w"),
      "Closed-form prox of 0.5 w^2 ('quadratic') or |w| ('absolute').");

  m.def("dp_noise_scale", &wcopt::DpNoiseScale, py::arg("lipschitz"),
        py::arg("iterations"), py::arg("n"), py::arg("epsilon"), py::arg("delta"),
        py::arg("beta"), "DP-SGD noise variance sigma^2.");

  m.def(
      "dp_privacy_precheck",
      [](std::int64_t iterations, std::int64_t n, double epsilon, double delta) {
        const auto c = wcopt::DpPrivacyPrecheck(iterations, n, epsilon, delta);
        return std::make_pair(c.ok, c.beta);
      },
      py::arg("iterations"), py::arg("n"), py::arg("epsilon"), py::arg("delta"),
      "Returns (ok, beta).");

  m.def(
      "inclusion_probability",
      [](std::int64_t n, std::int64_t iterations, const std::string& mode) {
        if (mode != "exact" && mode != "bound") {
          throw wcopt::ConfigError("mode must be 'exact' or 'bound', got '" + mode + "'");
        }
        return wcopt::InclusionProbability(
            n, iterations,
            mode == "exact" ? wcopt::InclusionMode::kExact : wcopt::InclusionMode::kBound);
      },
      py::arg("n"), py::arg("iterations"), py::arg("mode") = "exact");

  m.def("enumerated_inclusion_frequency", &wcopt::EnumeratedInclusionFrequency,
        py::arg("n"), py::arg("iterations"));

  m.def(
      "fit_rate",
      [](const std::vector<std::pair<double, double>>& points) {
        const auto fit = wcopt::FitRate(points);
        py::dict out;
        out["slope"] = fit.slope;
        out["intercept"] = fit.intercept;
        out["r_squared"] = fit.r_squared;
        return out;
      },
      py::arg("points"), "Least-squares slope of log(value) against log(n).");

  m.def(
      "run_config",
      [](const std::string& config_json, const std::string& base_dir, int threads,
         const std::string& format) {
        const auto config = ParseConfigText(config_json, base_dir, threads);
        py::gil_scoped_release release;
        return Emit(wcopt::RunConfig(config), format);
      },
      py::arg("config_json"), py::arg("base_dir") = ".", py::arg("threads") = 0,
      py::arg("format") = "json");

  m.def(
      "sweep",
      [](const std::string& config_json, const std::string& axis,
         const std::string& base_dir, int threads, const std::string& format) {
        const auto config = ParseConfigText(config_json, base_dir, threads);
        const auto which = wcopt::SweepAxisFromString(axis);
        py::gil_scoped_release release;
        return Emit(wcopt::Sweep(config, which), format);
      },
      py::arg("config_json"), py::arg("axis"), py::arg("base_dir") = ".",
      py::arg("threads") = 0, py::arg("format") = "json");

  m.def(
      "enumerate",
      [](const std::string& config_json, const std::string& base_dir, int threads,
         const std::string& format) {
        const auto config = ParseConfigText(config_json, base_dir, threads);
        py::gil_scoped_release release;
        return Emit(wcopt::Enumerate(config), format);
      },
      py::arg("config_json"), py::arg("base_dir") = ".", py::arg("threads") = 0,
      py::arg("format") = "json");

  m.def(
      "normalize_config",
      [](const std::string& config_json, const std::string& base_dir) {
        return wcopt::ConfigToJson(ParseConfigText(config_json, base_dir, 0)).dump();
      },
      py::arg("config_json"), py::arg("base_dir") = ".",
      "Validated config with every default filled in, as JSON text.");

  m.def(
      "run_acceptance",
      [](const std::vector<int>& only, std::uint64_t seed, int threads,
         int alternate_threads) {
        wcopt::AcceptanceOptions options;
        options.only = only;
        options.master_seed = seed;
        options.threads = threads;
        options.alternate_threads = alternate_threads;
        wcopt::AcceptanceOutcome outcome;
        {
          py::gil_scoped_release release;
          outcome = wcopt::RunAcceptance(options);
        }
        py::list out;
        for (const auto& c : outcome.criteria) {
          py::dict row;
          row["id"] = c.id;
          row["name"] = c.name;
          row["passed"] = c.passed;
          row["detail"] = c.detail;
          out.append(row);
        }
        return out;
      },
      py::arg("only") = std::vector<int>{}, py::arg("seed") = 20260101,
      py::arg("threads") = 1, py::arg("alternate_threads") = 0,
      "Runs the acceptance criteria (all twelve when `only` is empty).");

  m.def(
      "project_to_ball",
      [](const std::vector<double>& w, double radius) {
        wcopt::Vector v = Eigen::Map<const wcopt::Vector>(w.data(),
                                                          static_cast<Eigen::Index>(w.size()));
        return ToList(wcopt::ProjectToBall(v, radius));
      },
      py::arg("w"), py::arg("radius"));
}
