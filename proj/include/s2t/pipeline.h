// s2t/pipeline.h

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

#ifndef S2T_PIPELINE_H_
#define S2T_PIPELINE_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "s2t/adaptor.h"
#include "s2t/manifest.h"
#include "s2t/speech_encoder.h"
#include "s2t/text_decoder.h"
#include "s2t/vocab.h"

namespace s2t {

// Cross-module dimensions of the speech-to-text pipeline.
struct PipelineConfig {
  FeatureEncoderConfig feature;
  ContextEncoderConfig context;
  AdaptorConfig adaptor;
  DecoderConfig decoder;

  // Checks every boundary: feature channels feed the context width, the
  // adaptor maps context width to decoder width. Throws on mismatch.
  void Validate() const;
};

// One utterance handed to the pipeline; nothing is owned.
struct Utterance {
  const std::vector<double>* waveform = nullptr;
  const ManifestRow* row = nullptr;
};

// Speech encoder -> length adaptor -> text decoder over a shared parameter
// store. Construction is deterministic under the seed.
class TranslationPipeline {
 public:
  TranslationPipeline(const PipelineConfig& config, const Vocabulary& vocab,
                      uint64_t seed);

  ParamStore* store() { return &store_; }
  const ParamStore& store() const { return store_; }
  const Vocabulary& vocab() const { return vocab_; }
  const PipelineConfig& config() const { return config_; }
  SpeechEncoder* encoder() { return encoder_.get(); }
  Adaptor* adaptor() { return adaptor_.get(); }
  TextDecoder* decoder() { return decoder_.get(); }

  // Waveform -> decoder memory. Verifies at runtime that the adaptor output
  // length equals the composed length formula for the encoder's frame count
  // (throws std::logic_error on violation).
  Tensor EncodeMemory(const std::vector<double>& waveform, bool train,
                      Rng* drop_rng);

  // Teacher-forced label-smoothed loss of one utterance.
  Tensor UtteranceLoss(const Utterance& utt, double label_smoothing,
                       bool train, Rng* drop_rng);

  // Mean teacher-forced loss over a batch.
  Tensor BatchLoss(const std::vector<Utterance>& batch, double label_smoothing,
                   bool train, Rng* drop_rng);

  // Fraction of teacher-forced argmax hits over the utterances (gradient-free,
  // adaptor in eval mode).
  double TokenAccuracy(const std::vector<Utterance>& utts);

  // Beam decode. Returns generated token ids without the language tag or the
  // final end-of-sequence symbol.
  std::vector<int64_t> Decode(const std::vector<double>& waveform,
                              const std::string& tgt_lang, int beam,
                              int64_t max_new_tokens);

 private:
  // Tag-prefixed decoder input and the shifted targets for one row.
  void BuildTeacherForcing(const ManifestRow& row,
                           std::vector<int64_t>* prefix,
                           std::vector<int>* targets) const;

  PipelineConfig config_;
  Vocabulary vocab_;
  ParamStore store_;
  std::unique_ptr<SpeechEncoder> encoder_;
  std::unique_ptr<Adaptor> adaptor_;
  std::unique_ptr<TextDecoder> decoder_;
};

// Copies values of every parameter whose name exists in both stores.
// A shared name with a different element count signals a configuration
// mismatch and throws. Returns the copied names.
std::vector<std::string> CopyMatchingParams(const ParamStore& source,
                                            ParamStore* destination);

}  // namespace s2t

#endif  // S2T_PIPELINE_H_
