// s2t/grad_check.h

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

#ifndef S2T_GRAD_CHECK_H_
#define S2T_GRAD_CHECK_H_

#include <functional>
#include <string>
#include <vector>

#include "s2t/tensor.h"

namespace s2t {

// Result of comparing analytic gradients against central finite differences.
struct GradCheckResult {
  double max_rel_error = 0.0;  // max over all checked entries
  int64_t checked = 0;         // number of coordinates perturbed
  std::string worst;           // "name[i]" of the worst coordinate
};

// loss_fn must rebuild the computation from scratch on every call using the
// current values in `params` and return the scalar loss value. Each call to
// loss_fn happens under NoGradGuard, so nothing is recorded.
//
// For each parameter coordinate, the analytic gradient (already present in
// the tensors' grad buffers) is compared against the symmetric difference
// (f(x+h) - f(x-h)) / 2h. The relative error of a coordinate is
//   |analytic - numeric| / max(|analytic|, |numeric|, 1e-8),
// except that coordinates where both magnitudes fall below 1e-6 count as
// agreeing (a finite difference of a genuinely flat direction yields only
// rounding noise, which cannot be compared in relative terms).
//
// `max_coords` limits how many coordinates per tensor are probed (evenly
// strided); <= 0 checks all of them.
GradCheckResult CheckGradients(
    const std::vector<std::pair<std::string, Tensor>>& params,
    const std::function<double()>& loss_fn, double step = 1e-5,
    int64_t max_coords = 0);

// One named entry of the standard layer sweep.
struct NamedGradCheck {
  std::string layer;
  GradCheckResult result;
};

// Finite-difference checks for each layer family the model is built from:
// 1d convolution, multi-head attention, layer norm, embedding lookup,
// feed-forward, and label-smoothed cross entropy. Inputs are drawn from
// the seed, so a report is reproducible.
std::vector<NamedGradCheck> StandardLayerGradChecks(uint64_t seed = 3);

}  // namespace s2t

#endif  // S2T_GRAD_CHECK_H_
