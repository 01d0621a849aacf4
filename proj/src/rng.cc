// s2t/rng.cc

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

#include "s2t/rng.h"

#include <cmath>
#include <limits>
#include <numeric>

namespace s2t {

uint64_t Rng::UniformInt(uint64_t n) {
  if (n <= 1) return 0;
  const uint64_t limit =
      std::numeric_limits<uint64_t>::max() -
      std::numeric_limits<uint64_t>::max() % n;
  uint64_t v;
  do {
    v = NextU64();
  } while (v >= limit);
  return v % n;
}

double Rng::Normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * Uniform() - 1.0;
    v = 2.0 * Uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * scale;
  have_cached_normal_ = true;
  return u * scale;
}

int Rng::Poisson(double lambda) {
  const double threshold = std::exp(-lambda);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= Uniform();
  } while (p > threshold);
  return k - 1;
}

std::vector<int> Rng::Permutation(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  Shuffle(&p);
  return p;
}

Rng Rng::Derive(std::string_view label) const {
  // FNV-1a over the label, mixed into the current state.
  uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return Rng(state_ ^ h);
}

}  // namespace s2t
