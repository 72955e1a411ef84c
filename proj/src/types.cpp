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

#include "wcopt/types.hpp"

#include <cmath>
#include <string>

#include "wcopt/errors.hpp"

namespace wcopt {

ExampleTable::ExampleTable(Matrix features, Vector targets)
    : features_(std::move(features)), targets_(std::move(targets)) {
  if (features_.cols() != targets_.size()) {
    throw ConfigError("example table: " + std::to_string(features_.cols()) +
                      " feature columns but " +
                      std::to_string(targets_.size()) + " targets");
  }
  if (!features_.allFinite() || !targets_.allFinite()) {
    throw ConfigError("example table: non-finite entry");
  }
}

ExampleTable ExampleTable::FromExamples(std::span<const Example> examples) {
  if (examples.empty()) return ExampleTable(Matrix(0, 0), Vector(0));
  const Index d = examples.front().features.size();
  Matrix features(d, static_cast<Index>(examples.size()));
  Vector targets(static_cast<Index>(examples.size()));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].features.size() != d) {
      throw ConfigError("example table: example " + std::to_string(i) +
                        " has dimension " +
                        std::to_string(examples[i].features.size()) +
                        ", expected " + std::to_string(d));
    }
    features.col(static_cast<Index>(i)) = examples[i].features;
    targets[static_cast<Index>(i)] = examples[i].target;
  }
  return ExampleTable(std::move(features), std::move(targets));
}

Example ExampleTable::example(Index i) const {
  return Example{features_.col(i), targets_[i]};
}

ExampleTable ExampleTable::Select(std::span<const Index> indices) const {
  Matrix features(dim(), static_cast<Index>(indices.size()));
  Vector targets(static_cast<Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    features.col(static_cast<Index>(k)) = features_.col(indices[k]);
    targets[static_cast<Index>(k)] = targets_[indices[k]];
  }
  return ExampleTable(std::move(features), std::move(targets));
}

ExampleTable ExampleTable::WithReplaced(Index i,
                                        const Example& replacement) const {
  if (i < 0 || i >= size()) {
    throw ConfigError("replacement index " + std::to_string(i) +
                      " out of range [0, " + std::to_string(size()) + ")");
  }
  if (replacement.features.size() != dim()) {
    throw ConfigError("replacement example has the wrong dimension");
  }
  ExampleTable out = *this;
  out.features_.col(i) = replacement.features;
  out.targets_[i] = replacement.target;
  if (!out.features_.col(i).allFinite() || !std::isfinite(out.targets_[i])) {
    throw ConfigError("replacement example has a non-finite entry");
  }
  return out;
}

}  // namespace wcopt
