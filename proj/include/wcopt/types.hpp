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

#ifndef WCOPT_TYPES_HPP_
#define WCOPT_TYPES_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace wcopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// One data point z = (features, target).
struct Example {
  Vector features;
  double target = 0.0;
};

// Column-major storage for a list of examples: column i holds the features of
// example i. Shared by Dataset and PopulationPool.
class ExampleTable {
 public:
  ExampleTable() = default;
  // Throws ConfigError on non-finite entries or mismatched sizes.
  ExampleTable(Matrix features, Vector targets);

  static ExampleTable FromExamples(std::span<const Example> examples);

  Index size() const { return targets_.size(); }
  Index dim() const { return features_.rows(); }
  bool empty() const { return size() == 0; }

  auto features(Index i) const { return features_.col(i); }
  double target(Index i) const { return targets_[i]; }
  Example example(Index i) const;

  const Matrix& feature_matrix() const { return features_; }
  const Vector& targets() const { return targets_; }

  // Rows picked by `indices`, in the given order (duplicates allowed).
  ExampleTable Select(std::span<const Index> indices) const;
  // Copy with position i overwritten by `replacement`.
  ExampleTable WithReplaced(Index i, const Example& replacement) const;

 private:
  Matrix features_;
  Vector targets_;
};

// A training sample S of size n.
class Dataset : public ExampleTable {
 public:
  Dataset() = default;
  explicit Dataset(ExampleTable table) : ExampleTable(std::move(table)) {}
  using ExampleTable::ExampleTable;
};

// Finite ground-truth population: the data distribution is uniform over these
// M examples, so population risks are exact averages.
class PopulationPool : public ExampleTable {
 public:
  PopulationPool() = default;
  explicit PopulationPool(ExampleTable table) : ExampleTable(std::move(table)) {}
  using ExampleTable::ExampleTable;
};

}  // namespace wcopt

#endif  // WCOPT_TYPES_HPP_
