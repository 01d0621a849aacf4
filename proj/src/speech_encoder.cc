// s2t/speech_encoder.cc

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

#include "s2t/speech_encoder.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace s2t {

int64_t FeatureEncoderConfig::TotalStride() const {
  int64_t s = 1;
  for (const auto& l : layers) s *= l.stride;
  return s;
}

int64_t FeatureEncoderConfig::MinInputSamples() const {
  // Work backwards: one output frame per layer needs (t_out-1)*stride+kernel
  // input frames.
  int64_t t = 1;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    t = (t - 1) * it->stride + it->kernel;
  }
  return t;
}

int64_t FeatureEncoderConfig::OutputLength(int64_t samples) const {
  int64_t t = samples;
  for (const auto& l : layers) t = Conv1dOutputLength(t, l.kernel, l.stride, 0);
  return t;
}

std::vector<bool> SampleSpanMask(int64_t frames, const MaskSpec& spec,
                                 Rng* rng) {
  std::vector<bool> mask(static_cast<size_t>(frames), false);
  for (int64_t t = 0; t < frames; ++t) {
    if (!rng->Bernoulli(spec.mask_probability)) continue;
    const int64_t end = std::min(frames, t + spec.span_length);
    for (int64_t i = t; i < end; ++i) mask[static_cast<size_t>(i)] = true;
  }
  return mask;
}

double ExpectedMaskFraction(int64_t frames, const MaskSpec& spec) {
  // Frame t is covered if any span start in [max(0, t-span+1), t] fires:
  // min(t+1, span) independent Bernoulli chances.
  double total = 0.0;
  for (int64_t t = 0; t < frames; ++t) {
    const double chances =
        static_cast<double>(std::min<int64_t>(t + 1, spec.span_length));
    total += 1.0 - std::pow(1.0 - spec.mask_probability, chances);
  }
  return total / static_cast<double>(frames);
}

SpeechEncoder::SpeechEncoder(ParamStore* store,
                             const FeatureEncoderConfig& feature_config,
                             const ContextEncoderConfig& context_config,
                             Rng* rng)
    : feature_config_(feature_config), context_config_(context_config) {
  if (feature_config_.layers.empty()) {
    throw std::invalid_argument("SpeechEncoder: feature encoder needs at least one conv layer");
  }
  if (feature_config_.OutputDim() != context_config_.model_dim) {
    throw std::invalid_argument(
        "SpeechEncoder: last conv channels (" +
        std::to_string(feature_config_.OutputDim()) +
        ") must equal context model_dim (" +
        std::to_string(context_config_.model_dim) + ")");
  }
  if (context_config_.model_dim % context_config_.head_count != 0) {
    throw std::invalid_argument("SpeechEncoder: model_dim not divisible by head_count");
  }
  int64_t c_in = 1;
  for (size_t i = 0; i < feature_config_.layers.size(); ++i) {
    const auto& l = feature_config_.layers[i];
    const double stddev = 1.0 / std::sqrt(static_cast<double>(c_in * l.kernel));
    conv_weights_.push_back(store->Register(
        "encoder.feature." + std::to_string(i) + ".w",
        Tensor::Randn({l.out_channels, c_in, l.kernel}, rng, stddev),
        Owner::kEncoder, ParamRole::kConvFeature));
    conv_biases_.push_back(store->Register(
        "encoder.feature." + std::to_string(i) + ".b",
        Tensor::Zeros({l.out_channels}), Owner::kEncoder,
        ParamRole::kConvFeature));
    c_in = l.out_channels;
  }
  const int64_t dim = context_config_.model_dim;
  mask_embedding_ = store->Register("encoder.mask_embed",
                                    Tensor::Randn({1, dim}, rng, 0.1),
                                    Owner::kEncoder, ParamRole::kEmbedding);
  positions_ = store->Register(
      "encoder.positions",
      Tensor::Randn({context_config_.max_positions, dim}, rng, 0.1),
      Owner::kEncoder, ParamRole::kPositional);
  for (int64_t i = 0; i < context_config_.layer_count; ++i) {
    layers_.emplace_back(store, "encoder.layers." + std::to_string(i),
                         Owner::kEncoder, dim, context_config_.head_count,
                         context_config_.ffn_dim, rng);
  }
  if (context_config_.layer_count > 0) {
    final_ln_ = LayerNormLayer(store, "encoder.final_ln", Owner::kEncoder, dim);
  }
}

Tensor SpeechEncoder::EncodeWaveform(const std::vector<double>& samples) const {
  const int64_t min_samples = feature_config_.MinInputSamples();
  if (static_cast<int64_t>(samples.size()) < min_samples) {
    throw std::invalid_argument(
        "EncodeWaveform: " + std::to_string(samples.size()) +
        " samples is shorter than the receptive field (" +
        std::to_string(min_samples) + " samples)");
  }
  Tensor x = Tensor::FromData({1, static_cast<int64_t>(samples.size())},
                              samples);
  for (size_t i = 0; i < conv_weights_.size(); ++i) {
    const auto& l = feature_config_.layers[i];
    x = Gelu(Conv1d(x, conv_weights_[i], conv_biases_[i], l.stride, 0));
  }
  return Transpose(x);  // time x dim
}

Tensor SpeechEncoder::Contextualize(const Tensor& z,
                                    const std::vector<bool>& mask) const {
  const int64_t frames = z.dim(0);
  const int64_t dim = z.dim(1);
  if (!mask.empty() && static_cast<int64_t>(mask.size()) != frames) {
    throw std::invalid_argument(
        "Contextualize: mask length " + std::to_string(mask.size()) +
        " does not match " + std::to_string(frames) + " frames");
  }
  if (frames > context_config_.max_positions) {
    throw std::invalid_argument(
        "Contextualize: " + std::to_string(frames) +
        " frames exceed max positions " +
        std::to_string(context_config_.max_positions));
  }
  Tensor x = z;
  const bool any_masked =
      std::any_of(mask.begin(), mask.end(), [](bool b) { return b; });
  if (any_masked) {
    std::vector<double> keep(static_cast<size_t>(frames * dim), 1.0);
    std::vector<double> replace(static_cast<size_t>(frames * dim), 0.0);
    for (int64_t t = 0; t < frames; ++t) {
      if (!mask[static_cast<size_t>(t)]) continue;
      for (int64_t j = 0; j < dim; ++j) {
        keep[t * dim + j] = 0.0;
        replace[t * dim + j] = 1.0;
      }
    }
    Tensor mask_rows = EmbeddingRows(
        mask_embedding_, std::vector<int>(static_cast<size_t>(frames), 0));
    x = Add(Mul(x, Tensor::FromData({frames, dim}, std::move(keep))),
            Mul(mask_rows, Tensor::FromData({frames, dim}, std::move(replace))));
  }
  x = Add(x, SliceRows(positions_, 0, frames));
  for (const auto& layer : layers_) x = layer.Forward(x);
  if (!layers_.empty()) x = final_ln_.Forward(x);
  return x;
}

// ---------------------------------------------------------------------------

Quantizer::Quantizer(ParamStore* store, const std::string& prefix,
                     const QuantizerConfig& config, int64_t latent_dim,
                     Rng* rng)
    : config_(config) {
  if (config_.group_count < 1 || latent_dim % config_.group_count != 0) {
    throw std::invalid_argument(
        "Quantizer: latent dim " + std::to_string(latent_dim) +
        " not divisible into " + std::to_string(config_.group_count) +
        " groups");
  }
  group_dim_ = latent_dim / config_.group_count;
  for (int64_t g = 0; g < config_.group_count; ++g) {
    // Codebook rows start with equal norms so that the nearest-entry
    // ranking depends on the latent frame (through the z.e term) rather
    // than on per-entry norm differences. Unequal norms make every frame
    // select the same entry at initialization, which is a zero-gradient
    // fixed point of the contrastive objective (all candidates identical).
    Tensor book =
        Tensor::Randn({config_.entries_per_group, group_dim_}, rng, 1.0);
    auto& rows = book.mutable_data();
    for (int64_t e = 0; e < config_.entries_per_group; ++e) {
      double norm2 = 0.0;
      for (int64_t j = 0; j < group_dim_; ++j) {
        const double v = rows[e * group_dim_ + j];
        norm2 += v * v;
      }
      const double inv = 1.0 / std::sqrt(std::max(norm2, 1e-12));
      for (int64_t j = 0; j < group_dim_; ++j) rows[e * group_dim_ + j] *= inv;
    }
    codebooks_.push_back(store->Register(
        prefix + ".group" + std::to_string(g) + ".codebook", book,
        Owner::kEncoder, ParamRole::kOther));
  }
}

QuantizeResult Quantizer::Quantize(const Tensor& z, bool train) const {
  const int64_t frames = z.dim(0);
  if (z.dim(1) != group_dim_ * config_.group_count) {
    throw std::invalid_argument("Quantizer: input dim " + std::to_string(z.dim(1)) +
                                " does not match codebooks");
  }
  const int64_t entries = config_.entries_per_group;
  std::vector<Tensor> parts;
  double diversity = 0.0;
  for (int64_t g = 0; g < config_.group_count; ++g) {
    Tensor zg = SliceCols(z, g * group_dim_, group_dim_);
    Tensor dist = PairwiseSqDist(zg, codebooks_[g]);
    Tensor soft = SoftmaxRows(Scale(dist, -1.0 / config_.temperature));
    // Hard one-hot selection per frame.
    std::vector<double> onehot(static_cast<size_t>(frames * entries), 0.0);
    std::vector<double> usage(static_cast<size_t>(entries), 0.0);
    for (int64_t t = 0; t < frames; ++t) {
      const double* row = soft.data().data() + t * entries;
      int64_t best = 0;
      for (int64_t e = 1; e < entries; ++e) {
        if (row[e] > row[best]) best = e;
      }
      onehot[t * entries + best] = 1.0;
    }
    // Selection statistic: concentration of the average selection
    // distribution; 1/entries when uniform.
    for (int64_t t = 0; t < frames; ++t) {
      const double* row = train ? soft.data().data() + t * entries
                                : onehot.data() + t * entries;
      for (int64_t e = 0; e < entries; ++e) usage[e] += row[e];
    }
    double concentration = 0.0;
    for (int64_t e = 0; e < entries; ++e) {
      const double mean_p = usage[e] / static_cast<double>(frames);
      concentration += mean_p * mean_p;
    }
    diversity += concentration;
    Tensor hard = Tensor::FromData({frames, entries}, std::move(onehot));
    Tensor selection =
        train ? Add(soft, Sub(hard, Detach(soft)))  // value hard, grad soft
              : hard;
    parts.push_back(MatMul(selection, codebooks_[g]));
  }
  QuantizeResult result;
  result.quantized = ConcatCols(parts);
  result.diversity = diversity / static_cast<double>(config_.group_count);
  return result;
}

// ---------------------------------------------------------------------------

Tensor ContrastiveLoss(const Tensor& context, const Tensor& targets,
                       const std::vector<bool>& mask, int64_t distractor_count,
                       double kappa, Rng* rng) {
  if (context.shape() != targets.shape()) {
    throw std::invalid_argument("ContrastiveLoss: context and target shapes differ");
  }
  const int64_t frames = context.dim(0);
  if (static_cast<int64_t>(mask.size()) != frames) {
    throw std::invalid_argument("ContrastiveLoss: mask length mismatch");
  }
  std::vector<int64_t> masked;
  for (int64_t t = 0; t < frames; ++t) {
    if (mask[static_cast<size_t>(t)]) masked.push_back(t);
  }
  if (masked.empty()) {
    throw std::invalid_argument("ContrastiveLoss: mask selects no frames");
  }
  Tensor total = Tensor::Scalar(0.0);
  for (const int64_t t : masked) {
    // Distractors: other masked frames, sampled without replacement.
    std::vector<int64_t> pool;
    pool.reserve(masked.size() - 1);
    for (const int64_t u : masked) {
      if (u != t) pool.push_back(u);
    }
    const int64_t k =
        std::min<int64_t>(distractor_count, static_cast<int64_t>(pool.size()));
    for (int64_t i = 0; i < k; ++i) {
      const int64_t j =
          i + static_cast<int64_t>(rng->UniformInt(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    Tensor c_t = SliceRows(context, t, 1);
    std::vector<Tensor> logits;
    logits.reserve(static_cast<size_t>(k) + 1);
    logits.push_back(
        Reshape(Scale(CosineSim(c_t, SliceRows(targets, t, 1)), 1.0 / kappa),
                {1, 1}));
    for (int64_t i = 0; i < k; ++i) {
      logits.push_back(Reshape(
          Scale(CosineSim(c_t, SliceRows(targets, pool[i], 1)), 1.0 / kappa),
          {1, 1}));
    }
    Tensor row = logits.size() == 1 ? logits[0] : ConcatCols(logits);
    total = Add(total, SoftmaxCrossEntropy(row, {0}));
  }
  return Scale(total, 1.0 / static_cast<double>(masked.size()));
}

// ---------------------------------------------------------------------------

ContrastivePretrainer::ContrastivePretrainer(
    const ContrastivePretrainConfig& config, uint64_t seed)
    : config_(config), rng_(seed) {
  Rng init_rng = rng_.Derive("init");
  encoder_ = std::make_unique<SpeechEncoder>(&store_, config_.feature,
                                             config_.context, &init_rng);
  quantizer_ = std::make_unique<Quantizer>(&store_, "quantizer",
                                           config_.quantizer,
                                           config_.context.model_dim, &init_rng);
  AdamConfig adam;
  adam.learning_rate = config_.learning_rate;
  adam.warmup_steps = config_.warmup_steps;
  optimizer_ = std::make_unique<AdamOptimizer>(&store_, adam);
}

double ContrastivePretrainer::Step(
    const std::vector<std::vector<double>>& waveforms) {
  if (waveforms.empty()) {
    throw std::invalid_argument("ContrastivePretrainer: empty batch");
  }
  store_.ZeroAllGrads();
  Tensor total = Tensor::Scalar(0.0);
  for (const auto& samples : waveforms) {
    Tensor z = encoder_->EncodeWaveform(samples);
    std::vector<bool> mask = SampleSpanMask(z.dim(0), config_.mask, &rng_);
    if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
      // Guarantee at least one span so every utterance contributes.
      const int64_t start =
          static_cast<int64_t>(rng_.UniformInt(static_cast<uint64_t>(z.dim(0))));
      const int64_t end =
          std::min<int64_t>(z.dim(0), start + config_.mask.span_length);
      for (int64_t i = start; i < end; ++i) mask[static_cast<size_t>(i)] = true;
    }
    QuantizeResult q = quantizer_->Quantize(z, /*train=*/true);
    Tensor c = encoder_->Contextualize(z, mask);
    total = Add(total, ContrastiveLoss(c, q.quantized, mask,
                                       config_.distractor_count, config_.kappa,
                                       &rng_));
  }
  Tensor loss = Scale(total, 1.0 / static_cast<double>(waveforms.size()));
  const double value = loss.item();
  loss.Backward();
  optimizer_->Step();
  ++steps_done_;
  return value;
}

}  // namespace s2t
