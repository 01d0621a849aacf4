// s2t/rng.h

// Copyright 2026  The s2t Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef S2T_RNG_H_
#define S2T_RNG_H_

#include <cstdint>
#include <string_view>
#include <vector>

namespace s2t {

// Counter-based generator (splitmix64). The same seed and call sequence
// yields the same draws on every platform; distributions below are
// hand-rolled so no libstdc++-specific behavior leaks in.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t NextU64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  uint64_t UniformInt(uint64_t n);

  bool Bernoulli(double p) { return Uniform() < p; }

  // Standard normal via the Marsaglia polar method (sqrt/log only).
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }

  // Knuth's product-of-uniforms sampler; fine for small lambda.
  int Poisson(double lambda);

  template <typename T>
  void Shuffle(std::vector<T>* v) {
    for (size_t i = v->size(); i > 1; --i) {
      size_t j = static_cast<size_t>(UniformInt(i));
      std::swap((*v)[i - 1], (*v)[j]);
    }
  }

  std::vector<int> Permutation(int n);

  // Independent child stream; the parent's state is not advanced.
  Rng Derive(std::string_view label) const;

 private:
  uint64_t state_;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace s2t

#endif  // S2T_RNG_H_
