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

#ifndef WCOPT_ERRORS_HPP_
#define WCOPT_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace wcopt {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs that do not describe a valid problem, dataset or run.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A config file that failed validation. Carries every violation found, not
// just the first one.
class ValidationError : public ConfigError {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : ConfigError(Join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string Join(const std::vector<std::string>& items) {
    std::string out = "invalid config:";
    for (const auto& item : items) out += "\n  - " + item;
    return out;
  }

  std::vector<std::string> violations_;
};

// Arguments outside the mathematical domain of an operation (e.g. beta >= 1,
// lambda >= 1/rho).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A well-formed request the library deliberately does not handle.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// The prox inner solver ran out of iterations before meeting its tolerance.
class NonConvergedError : public Error {
 public:
  NonConvergedError(const std::string& what, Eigen::VectorXd best_iterate,
                    double residual)
      : Error(what), best_iterate_(std::move(best_iterate)),
        residual_(residual) {}

  const Eigen::VectorXd& best_iterate() const { return best_iterate_; }
  double residual() const { return residual_; }

 private:
  Eigen::VectorXd best_iterate_;
  double residual_;
};

}  // namespace wcopt

#endif  // WCOPT_ERRORS_HPP_
