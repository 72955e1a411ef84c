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


#ifndef WCOPT_TESTS_TEST_UTIL_HPP_
#define WCOPT_TESTS_TEST_UTIL_HPP_

#include <initializer_list>
#include <vector>

#include "wcopt/types.hpp"

namespace wcopt::testing {

// Examples from (features, target) pairs.
inline ExampleTable Table(std::initializer_list<std::pair<std::vector<double>, double>> rows) {
  const Index n = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(rows.begin()->first.size());
  Matrix f(d, n);
  Vector t(n);
  Index j = 0;
  for (const auto& [x, y] : rows) {
    for (Index k = 0; k < d; ++k) f(k, j) = x[static_cast<std::size_t>(k)];
    t[j++] = y;
  }
  return ExampleTable(std::move(f), std::move(t));
}

// One-dimensional points z with target 0 (the quadratic loss reads z from
// the feature).
inline Dataset Points(std::initializer_list<double> zs) {
  Matrix f(1, static_cast<Index>(zs.size()));
  Index j = 0;
  for (double z : zs) f(0, j++) = z;
  return Dataset(ExampleTable(std::move(f), Vector::Zero(static_cast<Index>(zs.size()))));
}

inline Example Point(double z) { return Example{Vector::Constant(1, z), 0.0}; }

inline Vector Vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index j = 0;
  for (double x : xs) v[j++] = x;
  return v;
}

}  // namespace wcopt::testing

#endif  // WCOPT_TESTS_TEST_UTIL_HPP_
