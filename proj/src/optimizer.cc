// s2t/optimizer.cc

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

#include "s2t/optimizer.h"

#include <cmath>

namespace s2t {

AdamOptimizer::AdamOptimizer(ParamStore* store, const AdamConfig& config)
    : store_(store), config_(config) {
  state_.m.reserve(store->params().size());
  state_.v.reserve(store->params().size());
  for (const auto& p : store->params()) {
    state_.m.emplace_back(p.tensor.numel(), 0.0);
    state_.v.emplace_back(p.tensor.numel(), 0.0);
  }
}

double AdamOptimizer::CurrentLearningRate() const {
  const int64_t step = state_.step + 1;  // rate used by the upcoming update
  if (config_.warmup_steps > 0 && step < config_.warmup_steps) {
    return config_.learning_rate * static_cast<double>(step) /
           static_cast<double>(config_.warmup_steps);
  }
  return config_.learning_rate;
}

void AdamOptimizer::Step() {
  const double lr = CurrentLearningRate();
  ++state_.step;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(state_.step));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(state_.step));
  auto& params = store_->mutable_params();
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& t = params[i].tensor;
    if (!t.requires_grad()) continue;
    if (!t.grad_allocated()) continue;  // no gradient reached this parameter
    const auto& g = t.grad();
    auto& m = state_.m[i];
    auto& v = state_.v[i];
    auto& value = t.mutable_data();
    for (size_t j = 0; j < value.size(); ++j) {
      m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
      v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      value[j] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
}

}  // namespace s2t
