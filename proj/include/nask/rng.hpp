// Copyright 2026 The nasklab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NASK_RNG_HPP_
#define NASK_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace nask {

/// mt19937_64 wrapper with a fixed value layout, so sampled streams are
/// reproducible for a given (seed) across standard-library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  /// Substream for item `index` under a dataset-level seed; (seed, index)
  /// fully determines the stream.
  static Rng for_index(uint64_t seed, uint64_t index) {
    return Rng(mix(seed, index));
  }

  uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

  /// Standard normal via Box–Muller.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  static uint64_t mix(uint64_t a, uint64_t b) {
    // splitmix64 finalizer over the pair
    uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 eng_;
};

}  // namespace nask

#endif  // NASK_RNG_HPP_
