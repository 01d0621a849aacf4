// pipeline.cc

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

#include "s2t/pipeline.h"

#include <algorithm>
#include <stdexcept>

namespace s2t {

void PipelineConfig::Validate() const {
  adaptor.Validate();
  decoder.Validate();
  if (feature.OutputDim() != context.model_dim) {
    throw std::invalid_argument(
        "PipelineConfig: feature encoder emits " +
        std::to_string(feature.OutputDim()) + " channels but the context "
        "encoder expects " + std::to_string(context.model_dim));
  }
  if (adaptor.in_dim != context.model_dim) {
    throw std::invalid_argument(
        "PipelineConfig: adaptor input width " + std::to_string(adaptor.in_dim) +
        " does not match the encoder width " +
        std::to_string(context.model_dim));
  }
  if (adaptor.out_dim != decoder.model_dim) {
    throw std::invalid_argument(
        "PipelineConfig: adaptor output width " +
        std::to_string(adaptor.out_dim) + " does not match the decoder width " +
        std::to_string(decoder.model_dim));
  }
}

TranslationPipeline::TranslationPipeline(const PipelineConfig& config,
                                         const Vocabulary& vocab,
                                         uint64_t seed)
    : config_(config), vocab_(vocab) {
  config_.Validate();
  Rng root(seed);
  Rng enc_rng = root.Derive("encoder");
  Rng ad_rng = root.Derive("adaptor");
  Rng dec_rng = root.Derive("decoder");
  encoder_ = std::make_unique<SpeechEncoder>(&store_, config_.feature,
                                             config_.context, &enc_rng);
  adaptor_ = std::make_unique<Adaptor>(&store_, config_.adaptor, &ad_rng);
  decoder_ =
      std::make_unique<TextDecoder>(&store_, config_.decoder, &vocab_, &dec_rng);
}

Tensor TranslationPipeline::EncodeMemory(const std::vector<double>& waveform,
                                         bool train, Rng* drop_rng) {
  Tensor z = encoder_->EncodeWaveform(waveform);
  Tensor context = encoder_->Contextualize(z, {});
  const std::vector<bool> dropped = adaptor_->SampleDrops(train, drop_rng);
  Tensor memory = adaptor_->Apply(context, dropped);

  const int64_t expected = AdaptedLength(z.dim(0), config_.adaptor, dropped);
  if (memory.dim(0) != expected) {
    throw std::logic_error(
        "pipeline length contract violated: encoder produced " +
        std::to_string(z.dim(0)) + " frames, adaptor returned " +
        std::to_string(memory.dim(0)) + " rows but the length formula gives " +
        std::to_string(expected));
  }
  return memory;
}

void TranslationPipeline::BuildTeacherForcing(const ManifestRow& row,
                                              std::vector<int64_t>* prefix,
                                              std::vector<int>* targets) const {
  const int64_t tag = vocab_.LanguageTag(row.tgt_lang);
  prefix->clear();
  prefix->push_back(tag);
  prefix->insert(prefix->end(), row.tgt_text.begin(), row.tgt_text.end());
  targets->clear();
  for (int64_t id : row.tgt_text) targets->push_back(static_cast<int>(id));
  targets->push_back(static_cast<int>(Vocabulary::kEos));
}

Tensor TranslationPipeline::UtteranceLoss(const Utterance& utt,
                                          double label_smoothing, bool train,
                                          Rng* drop_rng) {
  if (utt.waveform == nullptr || utt.row == nullptr) {
    throw std::invalid_argument("UtteranceLoss: utterance not populated");
  }
  std::vector<int64_t> prefix;
  std::vector<int> targets;
  BuildTeacherForcing(*utt.row, &prefix, &targets);
  Tensor memory = EncodeMemory(*utt.waveform, train, drop_rng);
  Tensor logits = decoder_->DecodeForward(prefix, memory);
  return LabelSmoothedCe(logits, targets, label_smoothing);
}

Tensor TranslationPipeline::BatchLoss(const std::vector<Utterance>& batch,
                                      double label_smoothing, bool train,
                                      Rng* drop_rng) {
  if (batch.empty()) {
    throw std::invalid_argument("BatchLoss: empty batch");
  }
  Tensor total;
  for (const Utterance& utt : batch) {
    Tensor loss = UtteranceLoss(utt, label_smoothing, train, drop_rng);
    total = total.defined() ? Add(total, loss) : loss;
  }
  return Scale(total, 1.0 / static_cast<double>(batch.size()));
}

double TranslationPipeline::TokenAccuracy(const std::vector<Utterance>& utts) {
  NoGradGuard guard;
  int64_t hits = 0, count = 0;
  for (const Utterance& utt : utts) {
    std::vector<int64_t> prefix;
    std::vector<int> targets;
    BuildTeacherForcing(*utt.row, &prefix, &targets);
    Tensor memory = EncodeMemory(*utt.waveform, /*train=*/false, nullptr);
    Tensor logits = decoder_->DecodeForward(prefix, memory);
    const int64_t vocab_size = logits.dim(1);
    for (size_t t = 0; t < targets.size(); ++t) {
      const double* row = logits.data().data() + t * vocab_size;
      const int64_t best =
          std::max_element(row, row + vocab_size) - row;
      hits += best == targets[t] ? 1 : 0;
      ++count;
    }
  }
  return count > 0 ? static_cast<double>(hits) / static_cast<double>(count)
                   : 0.0;
}

std::vector<int64_t> TranslationPipeline::Decode(
    const std::vector<double>& waveform, const std::string& tgt_lang, int beam,
    int64_t max_new_tokens) {
  NoGradGuard guard;
  Tensor memory = EncodeMemory(waveform, /*train=*/false, nullptr);
  const auto scorer = [&](const std::vector<int64_t>& prefix) {
    return decoder_->NextTokenLogProbs(prefix, memory);
  };
  const std::vector<Hypothesis> hyps =
      BeamSearch(scorer, {vocab_.LanguageTag(tgt_lang)}, Vocabulary::kEos,
                 beam, max_new_tokens);
  std::vector<int64_t> tokens = hyps.front().tokens;
  if (hyps.front().finished && !tokens.empty()) {
    tokens.pop_back();  // drop the end-of-sequence symbol
  }
  return tokens;
}

std::vector<std::string> CopyMatchingParams(const ParamStore& source,
                                            ParamStore* destination) {
  std::vector<std::string> copied;
  for (ParamInfo& p : destination->mutable_params()) {
    const ParamInfo* src = source.Find(p.name);
    if (src == nullptr) continue;
    if (src->tensor.data().size() != p.tensor.data().size()) {
      throw std::runtime_error(
          "CopyMatchingParams: '" + p.name + "' has " +
          std::to_string(p.tensor.data().size()) + " elements here but " +
          std::to_string(src->tensor.data().size()) + " in the source");
    }
    p.tensor.mutable_data() = src->tensor.data();
    copied.push_back(p.name);
  }
  return copied;
}

}  // namespace s2t
