// s2t/grad_check.cc

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

#include "s2t/grad_check.h"

#include <algorithm>
#include <cmath>

#include "s2t/nn.h"
#include "s2t/rng.h"

namespace s2t {
namespace {

// Below this magnitude a finite-difference estimate is dominated by
// floating-point cancellation, so such coordinates cannot be compared in
// relative terms.
constexpr double kZeroThreshold = 1e-6;

}  // namespace

GradCheckResult CheckGradients(
    const std::vector<std::pair<std::string, Tensor>>& params,
    const std::function<double()>& loss_fn, double step, int64_t max_coords) {
  GradCheckResult result;
  NoGradGuard guard;
  for (const auto& [name, tensor] : params) {
    Tensor t = tensor;
    const int64_t n = t.numel();
    int64_t stride = 1;
    if (max_coords > 0 && n > max_coords) stride = n / max_coords;
    const std::vector<double> analytic = t.grad();
    auto& values = t.mutable_data();
    for (int64_t i = 0; i < n; i += stride) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = loss_fn();
      values[i] = saved - step;
      const double down = loss_fn();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      ++result.checked;
      // Coordinates where both gradients are tiny are treated as agreeing:
      // when the true derivative is zero, the symmetric difference returns
      // rounding noise of order ulp(loss) / step, and a relative comparison
      // against noise is meaningless.
      if (std::abs(analytic[i]) < kZeroThreshold &&
          std::abs(numeric) < kZeroThreshold) {
        continue;
      }
      const double denom =
          std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic[i] - numeric) / denom;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

namespace {

using Params = std::vector<std::pair<std::string, Tensor>>;

// Runs forward once to populate analytic gradients, then compares them
// against central differences of the same closure.
NamedGradCheck RunScenario(const std::string& layer, const Params& params,
                           const std::function<Tensor()>& forward) {
  forward().Backward();
  return {layer,
          CheckGradients(params, [&]() { return forward().item(); })};
}

}  // namespace

std::vector<NamedGradCheck> StandardLayerGradChecks(uint64_t seed) {
  std::vector<NamedGradCheck> report;
  Rng rng(seed);

  {
    Tensor x = Tensor::Randn({2, 12}, &rng, 1.0, true);
    Tensor w = Tensor::Randn({3, 2, 3}, &rng, 0.5, true);
    Tensor b = Tensor::Randn({3}, &rng, 0.1, true);
    report.push_back(RunScenario(
        "conv1d", {{"x", x}, {"w", w}, {"b", b}}, [&]() {
          Tensor y = Conv1d(x, w, b, 2, 1);
          return Sum(Mul(y, y));
        }));
  }
  {
    ParamStore store;
    MultiHeadAttention attn(&store, "attn", Owner::kDecoder,
                            ParamRole::kEncoderAttn, 8, 2, &rng);
    Tensor x = Tensor::Randn({5, 8}, &rng, 1.0, true);
    Tensor memory = Tensor::Randn({4, 8}, &rng, 1.0, true);
    Params params{{"x", x}, {"memory", memory}};
    for (const auto& p : store.params()) params.emplace_back(p.name, p.tensor);
    report.push_back(RunScenario("attention", params, [&]() {
      Tensor self = attn.Forward(x, x, /*causal=*/true);
      Tensor cross = attn.Forward(self, memory, /*causal=*/false);
      return Sum(Mul(cross, cross));
    }));
  }
  {
    Tensor x = Tensor::Randn({3, 8}, &rng, 1.0, true);
    Tensor gain = Tensor::RandUniform({8}, &rng, 0.5, 1.5, true);
    Tensor shift = Tensor::Randn({8}, &rng, 0.2, true);
    report.push_back(RunScenario(
        "layer_norm", {{"x", x}, {"gain", gain}, {"shift", shift}}, [&]() {
          Tensor y = LayerNorm(x, gain, shift);
          return Sum(Mul(y, y));
        }));
  }
  {
    // A repeated id exercises the scatter-add of the backward pass.
    Tensor table = Tensor::Randn({7, 6}, &rng, 1.0, true);
    const std::vector<int> ids{0, 3, 6, 3};
    report.push_back(RunScenario("embedding", {{"table", table}}, [&]() {
      Tensor y = EmbeddingRows(table, ids);
      return Mean(Mul(y, y));
    }));
  }
  {
    ParamStore store;
    FeedForward ffn(&store, "ffn", Owner::kEncoder, 6, 12, &rng);
    Tensor x = Tensor::Randn({4, 6}, &rng, 1.0, true);
    Params params{{"x", x}};
    for (const auto& p : store.params()) params.emplace_back(p.name, p.tensor);
    report.push_back(RunScenario("feed_forward", params, [&]() {
      Tensor y = ffn.Forward(x);
      return Sum(Mul(y, y));
    }));
  }
  {
    Tensor logits = Tensor::Randn({5, 9}, &rng, 2.0, true);
    const std::vector<int> targets{3, 0, -100, 8, 5};
    report.push_back(
        RunScenario("label_smoothed_ce", {{"logits", logits}}, [&]() {
          return SoftmaxCrossEntropy(logits, targets, 0.3, -100);
        }));
  }
  return report;
}

}  // namespace s2t
