// s2t/text_decoder.cc

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

#include "s2t/text_decoder.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace s2t {

void DecoderConfig::Validate() const {
  if (layer_count < 0) {
    throw std::invalid_argument("DecoderConfig: negative layer_count");
  }
  if (model_dim < 1 || ffn_dim < 1 || head_count < 1 || max_positions < 1) {
    throw std::invalid_argument("DecoderConfig: dims must be >= 1");
  }
  if (model_dim % head_count != 0) {
    throw std::invalid_argument(
        "DecoderConfig: model_dim " + std::to_string(model_dim) +
        " not divisible by head_count " + std::to_string(head_count));
  }
}

TextDecoder::TextDecoder(ParamStore* store, const DecoderConfig& config,
                         const Vocabulary* vocab, Rng* init_rng)
    : config_(config), vocab_(vocab) {
  config_.Validate();
  if (vocab_ == nullptr || vocab_->language_count() == 0) {
    throw std::invalid_argument(
        "TextDecoder: vocabulary with at least one language tag required");
  }
  embed_ = EmbeddingTable(store, "decoder.embed", Owner::kDecoder,
                          ParamRole::kEmbedding, vocab_->size(),
                          config_.model_dim, init_rng);
  positions_ = store->Register(
      "decoder.positions",
      Tensor::Zeros({config_.max_positions, config_.model_dim}),
      Owner::kDecoder, ParamRole::kPositional);
  for (int64_t i = 0; i < config_.layer_count; ++i) {
    layers_.emplace_back(store, "decoder.layers." + std::to_string(i),
                         Owner::kDecoder, config_.model_dim,
                         config_.head_count, config_.ffn_dim, init_rng);
  }
  if (config_.layer_count > 0) {
    final_ln_ =
        LayerNormLayer(store, "decoder.final_ln", Owner::kDecoder,
                       config_.model_dim);
  }
  if (!config_.tie_output_to_embedding) {
    out_proj_ = Linear(store, "decoder.out_proj", Owner::kDecoder,
                       ParamRole::kEmbedding, config_.model_dim,
                       vocab_->size(), init_rng);
  }
}

Tensor TextDecoder::EmbedTokens(const std::vector<int64_t>& tokens) const {
  if (tokens.empty()) {
    throw std::invalid_argument("TextDecoder: empty token sequence");
  }
  const int64_t len = static_cast<int64_t>(tokens.size());
  if (len > config_.max_positions) {
    throw std::invalid_argument(
        "TextDecoder: sequence of length " + std::to_string(len) +
        " exceeds max positions " + std::to_string(config_.max_positions));
  }
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (int64_t t : tokens) {
    if (t < 0 || t >= vocab_->size()) {
      throw std::invalid_argument("TextDecoder: token id " +
                                  std::to_string(t) + " outside vocabulary");
    }
    ids.push_back(static_cast<int>(t));
  }
  return Add(embed_.Forward(ids), SliceRows(positions_, 0, len));
}

Tensor TextDecoder::DecodeForward(const std::vector<int64_t>& prefix,
                                  const Tensor& memory) const {
  if (prefix.empty()) {
    throw std::invalid_argument("TextDecoder: empty prefix");
  }
  if (!vocab_->IsLanguageTag(prefix.front())) {
    throw std::invalid_argument(
        "TextDecoder: prefix must start with a language tag, got token " +
        std::to_string(prefix.front()) +
        (prefix.front() >= 0 && prefix.front() < vocab_->size()
             ? " ('" + vocab_->TokenText(prefix.front()) + "')"
             : ""));
  }
  Tensor h = EmbedTokens(prefix);
  for (const TransformerDecoderLayer& layer : layers_) {
    h = memory.defined() ? layer.Forward(h, memory) : layer.Forward(h);
  }
  if (config_.layer_count > 0) h = final_ln_.Forward(h);
  if (config_.tie_output_to_embedding) {
    return MatMul(h, Transpose(embed_.table));
  }
  return out_proj_.Forward(h);
}

Tensor TextDecoder::DecodeForward(const std::vector<int64_t>& prefix) const {
  return DecodeForward(prefix, Tensor());
}

std::vector<double> TextDecoder::NextTokenLogProbs(
    const std::vector<int64_t>& prefix, const Tensor& memory) const {
  NoGradGuard guard;
  Tensor logits = DecodeForward(prefix, memory);
  Tensor last = LogSoftmaxRows(SliceRows(logits, logits.dim(0) - 1, 1));
  return last.data();
}

Tensor LabelSmoothedCe(const Tensor& logits, const std::vector<int>& targets,
                       double epsilon, int64_t ignore_id) {
  return SoftmaxCrossEntropy(logits, targets, epsilon,
                             static_cast<int>(ignore_id));
}

void NoiseConfig::Validate() const {
  if (mask_ratio < 0.0 || mask_ratio > 1.0) {
    throw std::invalid_argument("NoiseConfig: mask_ratio must lie in [0, 1]");
  }
  if (span_lambda <= 0.0) {
    throw std::invalid_argument("NoiseConfig: span_lambda must be positive");
  }
}

std::vector<int64_t> ApplyNoise(const std::vector<int64_t>& x,
                                const NoiseConfig& noise, Rng* rng) {
  noise.Validate();
  if (x.empty()) {
    throw std::invalid_argument("ApplyNoise: empty sequence");
  }
  const size_t n = x.size();
  std::vector<bool> covered(n, false);
  const double target = noise.mask_ratio * static_cast<double>(n);
  int64_t covered_count = 0;
  while (static_cast<double>(covered_count) < target) {
    int64_t span = 0;
    while (span == 0) span = rng->Poisson(noise.span_lambda);
    const size_t start = static_cast<size_t>(rng->UniformInt(n));
    const size_t stop = std::min(n, start + static_cast<size_t>(span));
    for (size_t i = start; i < stop; ++i) {
      if (!covered[i]) {
        covered[i] = true;
        ++covered_count;
      }
    }
  }
  // Each maximal covered run collapses to a single mask token.
  std::vector<int64_t> result;
  result.reserve(n);
  for (size_t i = 0; i < n;) {
    if (!covered[i]) {
      result.push_back(x[i]);
      ++i;
      continue;
    }
    result.push_back(noise.mask_id);
    while (i < n && covered[i]) ++i;
  }
  if (noise.permute_sentences) {
    std::vector<std::vector<int64_t>> units;
    std::vector<int64_t> unit;
    for (int64_t token : result) {
      unit.push_back(token);
      if (token == noise.separator_id) {
        units.push_back(std::move(unit));
        unit.clear();
      }
    }
    if (!unit.empty()) units.push_back(std::move(unit));
    const std::vector<int> order =
        rng->Permutation(static_cast<int>(units.size()));
    result.clear();
    for (int u : order) {
      const auto& picked = units[static_cast<size_t>(u)];
      result.insert(result.end(), picked.begin(), picked.end());
    }
  }
  return result;
}

DenoisingPretrainer::DenoisingPretrainer(const DenoisingPretrainConfig& config,
                                         const Vocabulary& vocab,
                                         uint64_t seed)
    : config_(config), vocab_(vocab), rng_(seed) {
  if (config_.text_encoder_layers < 0) {
    throw std::invalid_argument(
        "DenoisingPretrainer: negative text_encoder_layers");
  }
  Rng init = rng_.Derive("init");
  decoder_ = std::make_unique<TextDecoder>(&store_, config_.decoder, &vocab_,
                                           &init);
  for (int64_t i = 0; i < config_.text_encoder_layers; ++i) {
    text_encoder_.emplace_back(&store_, "textenc.layers." + std::to_string(i),
                               Owner::kDecoder, config_.decoder.model_dim,
                               config_.decoder.head_count,
                               config_.decoder.ffn_dim, &init);
  }
  if (config_.text_encoder_layers > 0) {
    text_encoder_ln_ = LayerNormLayer(&store_, "textenc.final_ln",
                                      Owner::kDecoder,
                                      config_.decoder.model_dim);
  }
  AdamConfig adam;
  adam.learning_rate = config_.learning_rate;
  adam.warmup_steps = config_.warmup_steps;
  optimizer_ = std::make_unique<AdamOptimizer>(&store_, adam);
}

Tensor DenoisingPretrainer::EncodeText(
    const std::vector<int64_t>& tokens) const {
  Tensor h = decoder_->EmbedTokens(tokens);
  for (const TransformerEncoderLayer& layer : text_encoder_) {
    h = layer.Forward(h);
  }
  if (config_.text_encoder_layers > 0) h = text_encoder_ln_.Forward(h);
  return h;
}

Tensor DenoisingPretrainer::Loss(const std::vector<std::vector<int64_t>>& batch,
                                 Rng* noise_rng) {
  if (batch.empty()) {
    throw std::invalid_argument("DenoisingPretrainer: empty batch");
  }
  Tensor total = Tensor::Scalar(0.0);
  for (const std::vector<int64_t>& sample : batch) {
    if (sample.size() < 2 || !vocab_.IsLanguageTag(sample.front())) {
      throw std::invalid_argument(
          "DenoisingPretrainer: each sample is a language tag plus content");
    }
    const std::vector<int64_t> content(sample.begin() + 1, sample.end());
    const std::vector<int64_t> corrupted =
        ApplyNoise(content, config_.noise, noise_rng);
    Tensor memory = EncodeText(corrupted);
    Tensor logits = decoder_->DecodeForward(sample, memory);
    std::vector<int> targets;
    targets.reserve(sample.size());
    for (size_t i = 1; i < sample.size(); ++i) {
      targets.push_back(static_cast<int>(sample[i]));
    }
    targets.push_back(static_cast<int>(Vocabulary::kEos));
    total = Add(total, SoftmaxCrossEntropy(logits, targets));
  }
  return Scale(total, 1.0 / static_cast<double>(batch.size()));
}

double DenoisingPretrainer::Step(
    const std::vector<std::vector<int64_t>>& batch) {
  store_.ZeroAllGrads();
  Rng noise_rng = rng_.Derive("noise@" + std::to_string(optimizer_->step_count()));
  Tensor loss = Loss(batch, &noise_rng);
  loss.Backward();
  optimizer_->Step();
  return loss.item();
}

double NormalizedScore(const Hypothesis& hyp) {
  const size_t len = hyp.tokens.size();
  return hyp.score / static_cast<double>(std::max<size_t>(len, 1));
}

std::vector<Hypothesis> BeamSearch(const StepScorer& scorer,
                                   const std::vector<int64_t>& start_prefix,
                                   int64_t eos_id, int beam,
                                   int64_t max_new_tokens) {
  if (beam < 1) throw std::invalid_argument("BeamSearch: beam must be >= 1");
  if (max_new_tokens < 1) {
    throw std::invalid_argument("BeamSearch: max_new_tokens must be >= 1");
  }
  std::vector<Hypothesis> live{Hypothesis{}};
  std::vector<Hypothesis> done;
  for (int64_t step = 0; step < max_new_tokens && !live.empty(); ++step) {
    struct Candidate {
      size_t parent;
      int64_t token;
      double score;
    };
    std::vector<Candidate> candidates;
    for (size_t h = 0; h < live.size(); ++h) {
      std::vector<int64_t> prefix = start_prefix;
      prefix.insert(prefix.end(), live[h].tokens.begin(),
                    live[h].tokens.end());
      const std::vector<double> log_probs = scorer(prefix);
      for (size_t v = 0; v < log_probs.size(); ++v) {
        candidates.push_back(
            {h, static_cast<int64_t>(v), live[h].score + log_probs[v]});
      }
    }
    // Highest cumulative score first; ties resolved toward the lower token
    // id of the earlier parent, matching greedy argmax at beam 1.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       return a.score > b.score;
                     });
    std::vector<Hypothesis> next;
    const size_t take =
        std::min(candidates.size(), static_cast<size_t>(beam));
    for (size_t c = 0; c < take; ++c) {
      Hypothesis ext = live[candidates[c].parent];
      ext.tokens.push_back(candidates[c].token);
      ext.score = candidates[c].score;
      if (candidates[c].token == eos_id) {
        ext.finished = true;
        done.push_back(std::move(ext));
      } else {
        next.push_back(std::move(ext));
      }
    }
    live = std::move(next);
  }
  // Length budget exhausted: surviving hypotheses are reported unfinished.
  for (Hypothesis& h : live) done.push_back(std::move(h));
  std::stable_sort(done.begin(), done.end(),
                   [](const Hypothesis& a, const Hypothesis& b) {
                     return NormalizedScore(a) > NormalizedScore(b);
                   });
  return done;
}

}  // namespace s2t
