// Copyright (c) 2026 dasr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DASR_RNG_HPP_
#define DASR_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dasr/common.hpp"

namespace dasr {

// Deterministic random stream. std::mt19937_64 is bit-exact by the standard;
// the distributions below are hand-rolled because the standard library's
// distribution objects are not portable across implementations.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  int64_t UniformInt(int64_t lo, int64_t hi) {
    if (hi < lo) throw ValidationError("UniformInt: empty range");
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    // Rejection sampling to stay unbiased.
    uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + static_cast<int64_t>(x % span);
  }

  // Standard normal via Box-Muller. One draw per call, no caching, so the
  // stream position is a pure function of the call count.
  double Normal() {
    double u1 = Uniform();
    double u2 = Uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }

  // Categorical draw by CDF inversion over unnormalized non-negative weights.
  int Categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw NumericError("Categorical: non-positive mass");
    double r = Uniform() * total;
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (r < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size() - 1);
  }

  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent stream for a (seed, purpose, step, index) tuple.
// Stateless by construction: resuming a run at step k reproduces the exact
// draws of an unbroken run.
inline SeededRng DeriveRng(uint64_t seed, const std::string& purpose,
                           uint64_t step = 0, uint64_t index = 0) {
  uint64_t h = HashCombine(seed, HashString(purpose));
  h = HashCombine(h, step + 1);
  h = HashCombine(h, index + 1);
  return SeededRng(h);
}

}  // namespace dasr

#endif  // DASR_RNG_HPP_
