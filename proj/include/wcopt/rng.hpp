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

#ifndef WCOPT_RNG_HPP_
#define WCOPT_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace wcopt {

// SplitMix64 output finalizer. Bijective on 64-bit words.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// FNV-1a, used to turn purpose tags into seed-tree keys.
constexpr std::uint64_t HashTag(std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Seed tree: hashes a path of logical coordinates (purpose tag, grid index,
// trial index, ...) under a master seed. Identical paths give identical seeds
// on every thread and every run.
std::uint64_t DeriveSeed(std::uint64_t master,
                         std::initializer_list<std::uint64_t> path);
std::uint64_t DeriveSeed(std::uint64_t master, std::string_view tag,
                         std::initializer_list<std::uint64_t> path = {});

// Substreams of one optimizer run.
enum class Substream : std::uint64_t {
  kIndex = 1,  // i_t draws and the output index r
  kNoise = 2,  // DP-SGD Gaussian noise
  kData = 3,   // anything else a caller wants to key off the same seed
};

// Counter-based generator: draw k of stream (key, stream) is a pure function of
// (key, stream, k). No hidden global state.
class CounterRng {
 public:
  CounterRng(std::uint64_t key, Substream stream)
      : CounterRng(key, static_cast<std::uint64_t>(stream)) {}
  CounterRng(std::uint64_t key, std::uint64_t stream)
      : base_(Mix64(Mix64(key) ^ (stream * 0xD6E8FEB86659FD93ull))) {}

  std::uint64_t NextU64() {
    return Mix64(base_ + (counter_++) * 0x9E3779B97F4A7C15ull);
  }

  // Uniform on the open interval (0, 1), 53 bits.
  double Uniform() {
    return (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Unbiased (Lemire's multiply-and-reject).
  std::uint64_t Below(std::uint64_t bound);

  // Standard normal via Box-Muller; the second variate is cached.
  double Normal();

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace wcopt

#endif  // WCOPT_RNG_HPP_
