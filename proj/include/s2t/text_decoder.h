// s2t/text_decoder.h

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

#ifndef S2T_TEXT_DECODER_H_
#define S2T_TEXT_DECODER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "s2t/nn.h"
#include "s2t/optimizer.h"
#include "s2t/rng.h"
#include "s2t/tensor.h"
#include "s2t/vocab.h"

namespace s2t {

// Multilingual autoregressive transformer decoder. Every target sequence is
// prefixed with a language tag token that selects the output language.
struct DecoderConfig {
  int64_t layer_count = 2;
  int64_t model_dim = 64;
  int64_t head_count = 4;
  int64_t ffn_dim = 128;
  int64_t max_positions = 512;
  bool tie_output_to_embedding = true;

  void Validate() const;  // throws std::invalid_argument on bad settings
};

class TextDecoder {
 public:
  // Registers parameters under "decoder." in the store. The vocabulary must
  // outlive the decoder. Positional embeddings start at zero so that a
  // freshly built zero-layer tied decoder scores a prefix purely by
  // embedding similarity.
  TextDecoder(ParamStore* store, const DecoderConfig& config,
              const Vocabulary* vocab, Rng* init_rng);

  // Teacher-forced scoring: returns (prefix length x vocab) logits, one row
  // per next-token distribution. The prefix must start with a language tag.
  // `memory` is adaptor (or text-encoder) output attended to by every
  // layer's cross-attention; pass an undefined Tensor for pure
  // language-model scoring, which bypasses cross-attention entirely.
  Tensor DecodeForward(const std::vector<int64_t>& prefix,
                       const Tensor& memory) const;
  Tensor DecodeForward(const std::vector<int64_t>& prefix) const;

  // Log-probabilities of the next token after `prefix` (no graph recorded).
  std::vector<double> NextTokenLogProbs(const std::vector<int64_t>& prefix,
                                        const Tensor& memory) const;

  // Embeds tokens (embedding + positions), shared with the denoising text
  // encoder.
  Tensor EmbedTokens(const std::vector<int64_t>& tokens) const;

  const DecoderConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return *vocab_; }
  const EmbeddingTable& embedding() const { return embed_; }

 private:
  DecoderConfig config_;
  const Vocabulary* vocab_;
  EmbeddingTable embed_;
  Tensor positions_;
  std::vector<TransformerDecoderLayer> layers_;
  LayerNormLayer final_ln_;
  Linear out_proj_;  // only when untied
};

// Label-smoothed cross entropy: (1-eps)*NLL(target) + eps*(mean NLL over
// the vocabulary), averaged over rows whose target is not ignore_id.
Tensor LabelSmoothedCe(const Tensor& logits, const std::vector<int>& targets,
                       double epsilon = 0.3,
                       int64_t ignore_id = Vocabulary::kPad);

// Corruption applied to pretraining text: span masking plus optional
// sentence-order permutation.
struct NoiseConfig {
  double mask_ratio = 0.35;  // stop once this fraction of tokens is covered
  double span_lambda = 3.5;  // Poisson parameter for span lengths (>= 1)
  bool permute_sentences = false;
  int64_t mask_id = Vocabulary::kMask;
  int64_t separator_id = Vocabulary::kEos;  // sentence unit delimiter

  void Validate() const;
};

// Draws spans with Poisson(lambda) lengths (conditioned on >= 1) at uniform
// positions until at least mask_ratio of the tokens are covered, replaces
// every maximal covered run by one mask token, then (optionally) permutes
// sentence units. Deterministic given the rng state.
std::vector<int64_t> ApplyNoise(const std::vector<int64_t>& x,
                                const NoiseConfig& noise, Rng* rng);

// Denoising pretraining: reconstruct x from its corruption g(x). A small
// text encoder reads g(x) as cross-attention memory; it shares the
// decoder's embedding and positions, is trained jointly here, and is
// discarded afterwards (the translation pipeline keeps only the decoder).
struct DenoisingPretrainConfig {
  DecoderConfig decoder;
  NoiseConfig noise;
  int64_t text_encoder_layers = 2;
  double learning_rate = 1e-3;
  int64_t warmup_steps = 20;
};

class DenoisingPretrainer {
 public:
  DenoisingPretrainer(const DenoisingPretrainConfig& config,
                      const Vocabulary& vocab, uint64_t seed);

  // One optimizer step on a batch of samples, each a language tag followed
  // by content tokens. Returns the batch loss (mean over samples of mean
  // negative log-likelihood).
  double Step(const std::vector<std::vector<int64_t>>& batch);

  // Builds the differentiable batch loss without updating anything.
  Tensor Loss(const std::vector<std::vector<int64_t>>& batch, Rng* noise_rng);

  TextDecoder& decoder() { return *decoder_; }
  ParamStore& store() { return store_; }

 private:
  Tensor EncodeText(const std::vector<int64_t>& tokens) const;

  DenoisingPretrainConfig config_;
  Vocabulary vocab_;
  ParamStore store_;
  Rng rng_;
  std::unique_ptr<TextDecoder> decoder_;
  std::vector<TransformerEncoderLayer> text_encoder_;
  LayerNormLayer text_encoder_ln_;
  std::unique_ptr<AdamOptimizer> optimizer_;
};

// One beam-search candidate. `tokens` holds only the generated tokens
// (the fixed start prefix is not repeated), `score` is the sum of their
// per-step log-probabilities, and `finished` is true only when generation
// ended at the terminal token rather than at the length limit.
struct Hypothesis {
  std::vector<int64_t> tokens;
  double score = 0.0;
  bool finished = false;
};

// Ranking key: average per-token log-probability.
double NormalizedScore(const Hypothesis& hyp);

// Log-probabilities over the vocabulary for the token following `prefix`.
using StepScorer =
    std::function<std::vector<double>(const std::vector<int64_t>& prefix)>;

// Standard beam expansion: each step extends every live hypothesis with
// every token, keeps the `beam` best extensions by cumulative score, and
// retires those ending at eos_id. Hypotheses still live after
// max_new_tokens are returned force-finished with finished=false. The
// result is ranked by NormalizedScore, best first. beam=1 reproduces
// greedy argmax decoding exactly.
std::vector<Hypothesis> BeamSearch(const StepScorer& scorer,
                                   const std::vector<int64_t>& start_prefix,
                                   int64_t eos_id, int beam,
                                   int64_t max_new_tokens);

}  // namespace s2t

#endif  // S2T_TEXT_DECODER_H_
