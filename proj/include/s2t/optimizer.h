// s2t/optimizer.h

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

#ifndef S2T_OPTIMIZER_H_
#define S2T_OPTIMIZER_H_

#include <cstdint>
#include <vector>

#include "s2t/nn.h"

namespace s2t {

// Adaptive per-parameter moment estimates with optional linear warmup to the
// base learning rate, constant afterwards.
struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;
  int64_t warmup_steps = 0;
};

class AdamOptimizer {
 public:
  AdamOptimizer(ParamStore* store, const AdamConfig& config);

  // Applies one update to every parameter currently marked trainable
  // (requires_grad). Frozen parameters and their moments are untouched, so
  // freezing is bit-exact. Gradients are left in place; call
  // store->ZeroAllGrads() between steps.
  void Step();

  double CurrentLearningRate() const;  // includes warmup scaling
  int64_t step_count() const { return state_.step; }

  // Moment buffers index-align with the store's registration order; exposed
  // for checkpointing.
  struct State {
    int64_t step = 0;
    std::vector<std::vector<double>> m, v;
  };
  const State& state() const { return state_; }
  State* mutable_state() { return &state_; }

 private:
  ParamStore* store_;
  AdamConfig config_;
  State state_;
};

}  // namespace s2t

#endif  // S2T_OPTIMIZER_H_
