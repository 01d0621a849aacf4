// s2t/speech_encoder.h

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

#ifndef S2T_SPEECH_ENCODER_H_
#define S2T_SPEECH_ENCODER_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "s2t/nn.h"
#include "s2t/optimizer.h"
#include "s2t/rng.h"
#include "s2t/tensor.h"

namespace s2t {

// Raw-waveform encoder: a temporal convolution stack maps samples to latent
// frames Z, a transformer stack with learned positions maps (optionally
// span-masked) latents to context frames C. Pretrained with a contrastive
// objective against quantized latent targets.

struct FeatureEncoderConfig {
  struct ConvLayer {
    int64_t out_channels;
    int64_t kernel;
    int64_t stride;
  };
  std::vector<ConvLayer> layers{{32, 8, 4}, {64, 4, 2}, {64, 4, 2}};

  int64_t TotalStride() const;
  // Smallest sample count that yields at least one latent frame.
  int64_t MinInputSamples() const;
  // Composed conv length formula (padding 0 per layer).
  int64_t OutputLength(int64_t samples) const;
  int64_t OutputDim() const { return layers.back().out_channels; }
};

struct ContextEncoderConfig {
  int64_t layer_count = 4;
  int64_t model_dim = 64;
  int64_t head_count = 4;
  int64_t ffn_dim = 128;
  int64_t max_positions = 1024;
};

// Independent Bernoulli span starts of fixed length; overlaps merge.
struct MaskSpec {
  double mask_probability = 0.065;  // per-frame span-start probability
  int64_t span_length = 10;
};

std::vector<bool> SampleSpanMask(int64_t frames, const MaskSpec& spec,
                                 Rng* rng);
// Expected masked fraction of the span process above, edge effects included.
double ExpectedMaskFraction(int64_t frames, const MaskSpec& spec);

class SpeechEncoder {
 public:
  SpeechEncoder(ParamStore* store, const FeatureEncoderConfig& feature_config,
                const ContextEncoderConfig& context_config, Rng* rng);

  // samples -> latent frames Z (time x dim). Throws when fewer samples than
  // one receptive field.
  Tensor EncodeWaveform(const std::vector<double>& samples) const;

  // Z -> C. Masked rows are replaced by the learned mask embedding, learned
  // positional embeddings are added, then the transformer stack runs.
  // mask.size() must equal Z's frame count; pass {} for no masking.
  Tensor Contextualize(const Tensor& z, const std::vector<bool>& mask) const;

  const FeatureEncoderConfig& feature_config() const { return feature_config_; }
  const ContextEncoderConfig& context_config() const { return context_config_; }

 private:
  FeatureEncoderConfig feature_config_;
  ContextEncoderConfig context_config_;
  std::vector<Tensor> conv_weights_, conv_biases_;
  Tensor mask_embedding_;   // 1 x dim
  Tensor positions_;        // max_positions x dim
  std::vector<TransformerEncoderLayer> layers_;
  LayerNormLayer final_ln_;  // applied only when layer_count > 0
};

// Product quantizer: the latent dimension is split into equal groups, each
// group is matched against its own codebook. Training uses a straight-through
// softmax over negative squared distances; evaluation takes the hard nearest
// entry.
struct QuantizerConfig {
  int64_t group_count = 2;
  int64_t entries_per_group = 8;
  double temperature = 1.0;  // softens the distance softmax
};

struct QuantizeResult {
  Tensor quantized;   // time x dim
  double diversity;   // mean over groups of sum_e (mean selection prob)^2
};

class Quantizer {
 public:
  Quantizer(ParamStore* store, const std::string& prefix,
            const QuantizerConfig& config, int64_t latent_dim, Rng* rng);

  // train=true uses the straight-through relaxation (differentiable);
  // train=false selects hard nearest entries with no recorded graph.
  QuantizeResult Quantize(const Tensor& z, bool train) const;

  const QuantizerConfig& config() const { return config_; }

 private:
  QuantizerConfig config_;
  int64_t group_dim_ = 0;
  std::vector<Tensor> codebooks_;  // per group: entries x group_dim
};

// Mean over masked frames of -log softmax over {true target} + K distractors
// of cosine similarity / kappa. Distractors are drawn uniformly without
// replacement from the other masked frames; when fewer than K exist, all are
// used. Throws when the mask selects no frames.
Tensor ContrastiveLoss(const Tensor& context, const Tensor& targets,
                       const std::vector<bool>& mask, int64_t distractor_count,
                       double kappa, Rng* rng);

// Self-supervised pretraining driver: owns a private parameter store with an
// encoder, quantizer and optimizer-ready parameters. One step = encode a
// waveform batch, sample span masks, contextualize the masked latents, and
// minimize the contrastive loss against quantized unmasked latents.
struct ContrastivePretrainConfig {
  FeatureEncoderConfig feature;
  ContextEncoderConfig context;
  QuantizerConfig quantizer;
  MaskSpec mask;
  int64_t distractor_count = 8;
  double kappa = 0.1;
  double learning_rate = 1e-3;
  int64_t warmup_steps = 20;
};

class ContrastivePretrainer {
 public:
  ContrastivePretrainer(const ContrastivePretrainConfig& config, uint64_t seed);

  // Runs one optimizer step over the batch; returns the batch loss.
  double Step(const std::vector<std::vector<double>>& waveforms);

  ParamStore* store() { return &store_; }
  SpeechEncoder* encoder() { return encoder_.get(); }
  int64_t steps_done() const { return steps_done_; }

 private:
  ContrastivePretrainConfig config_;
  ParamStore store_;
  std::unique_ptr<SpeechEncoder> encoder_;
  std::unique_ptr<Quantizer> quantizer_;
  std::unique_ptr<AdamOptimizer> optimizer_;
  Rng rng_;
  int64_t steps_done_ = 0;
};

}  // namespace s2t

#endif  // S2T_SPEECH_ENCODER_H_
