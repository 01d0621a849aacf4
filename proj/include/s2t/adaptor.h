// s2t/adaptor.h

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

#ifndef S2T_ADAPTOR_H_
#define S2T_ADAPTOR_H_

#include <string>
#include <vector>

#include "s2t/nn.h"
#include "s2t/rng.h"
#include "s2t/tensor.h"

namespace s2t {

// The bridge between the speech encoder and the text decoder: a stack of
// 1-dimensional convolutions that projects encoder output to the decoder
// width and shrinks its length by roughly stride^layer_count, closing the
// gap between audio frame rates and text token rates.
struct AdaptorConfig {
  int64_t layer_count = 3;   // number of conv layers (n)
  int64_t stride = 2;        // temporal downsampling per applied layer (s)
  int64_t kernel = 3;        // conv kernel width (k); padding is k/2
  double layer_drop = 0.0;   // per-layer skip probability during training (p)
  bool use_layer_norm = false;
  std::string activation = "gelu";  // "gelu" or "relu", applied after each conv
  int64_t in_dim = 64;
  int64_t out_dim = 64;

  // Throws std::invalid_argument unless
  //   layer_count >= 1, stride >= 1, kernel >= stride, 0 <= layer_drop < 1,
  //   dims >= 1, and activation is a known name.
  void Validate() const;

  // Length after one applied conv layer: (t + 2*(k/2) - k)/s + 1.
  // For odd k and s=2 this is the ceiling of t/2.
  int64_t LayerOutputLength(int64_t t) const;
};

// Length after the full stack when layer i is skipped iff dropped[i].
// Skipped layers leave the length unchanged. Pure function;
// dropped.size() must equal config.layer_count.
int64_t AdaptedLength(int64_t t, const AdaptorConfig& config,
                      const std::vector<bool>& dropped);

// Convenience: length in evaluation mode (no layer is dropped).
int64_t AdaptedLength(int64_t t, const AdaptorConfig& config);

class Adaptor {
 public:
  // Registers parameters under "adaptor." in the store. When
  // in_dim != out_dim, a pointwise linear projection precedes the conv
  // stack so that every conv layer maps out_dim -> out_dim and can be
  // skipped as a full identity.
  Adaptor(ParamStore* store, const AdaptorConfig& config, Rng* init_rng);

  // Draws the per-layer skip decisions for one training step. In
  // evaluation mode (train = false) nothing is ever skipped.
  std::vector<bool> SampleDrops(bool train, Rng* rng) const;

  // Applies the stack to encoder output (time x in_dim), skipping layer i
  // where dropped[i] is true. A skipped layer is a full identity: neither
  // its transformation nor its downsampling happens. Each applied layer is
  // conv -> activation -> (layer norm when enabled).
  Tensor Apply(const Tensor& encoder_out,
               const std::vector<bool>& dropped) const;

  // Train mode samples drops from rng; eval mode applies every layer.
  Tensor Apply(const Tensor& encoder_out, bool train, Rng* rng) const;

  const AdaptorConfig& config() const { return config_; }

 private:
  AdaptorConfig config_;
  Linear projection_;  // defined only when in_dim != out_dim
  bool has_projection_ = false;
  std::vector<Tensor> weights_;  // out_dim x out_dim(/in_dim) x kernel
  std::vector<Tensor> biases_;
  std::vector<LayerNormLayer> norms_;
};

// One row of the adaptor design grid explored for the ablation report.
// reference_bleu is the published en->de score for that configuration and
// is carried along purely to annotate report output.
struct AdaptorGridRow {
  AdaptorConfig config;
  double reference_bleu = 0.0;
};

// The eight (stride, layers, layer-drop, layer-norm) combinations of the
// published ablation, in report order. Dimensions are left at their
// defaults; callers override in_dim/out_dim to fit their pipeline.
std::vector<AdaptorGridRow> EnumerateAdaptorGrid();

}  // namespace s2t

#endif  // S2T_ADAPTOR_H_
