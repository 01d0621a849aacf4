// s2t/train.h

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

#ifndef S2T_TRAIN_H_
#define S2T_TRAIN_H_

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "s2t/config.h"
#include "s2t/pipeline.h"
#include "s2t/speech_encoder.h"
#include "s2t/synth_data.h"
#include "s2t/text_decoder.h"

namespace s2t {

// One row of the learning-curve record.
struct CurvePoint {
  int64_t step = 0;
  double wall_seconds = 0.0;
  double train_loss = 0.0;      // mean over the interval
  double valid_loss = 0.0;
  double token_accuracy = 0.0;  // teacher-forced, on the validation subset
};

// Writes points as a column-oriented text file with a header row.
void WriteCurve(const std::string& path, const std::vector<CurvePoint>& curve);

struct CandidateResult {
  double lr = 0.0;
  bool failed = false;          // loss diverged to a non-finite value
  double best_valid_loss = 0.0;
  int64_t best_step = 0;
  std::vector<CurvePoint> curve;
  std::string curve_path;       // empty when no output directory is set
};

struct TrainResult {
  double best_lr = 0.0;
  double best_valid_loss = 0.0;
  int64_t best_step = 0;
  std::vector<CandidateResult> candidates;
  std::string checkpoint_path;  // empty when no output directory is set
  // Pipeline restored to the best checkpoint, ready for evaluation.
  std::unique_ptr<TranslationPipeline> pipeline;
};

// Self-supervised warmup over the training split: contrastive pretraining of
// the speech encoder and denoising pretraining of the text decoder. Either
// phase is skipped when its step budget is zero. The returned object owns
// the pretrained parameter stores.
struct PretrainedModels {
  std::unique_ptr<ContrastivePretrainer> speech;
  std::unique_ptr<DenoisingPretrainer> text;

  // Stores to seed a pipeline from (skipping null phases).
  std::vector<const ParamStore*> Stores() const;
};
PretrainedModels RunPretraining(const ExperimentConfig& config,
                                const SynthDataset& data);

// Finetunes per the config: one run per learning-rate candidate from an
// identical initialization (config seed, plus `pretrained` weights copied
// in), best checkpoint = lowest validation loss across candidates and
// intervals. Bilingual mode trains on one pair; multilingual mode samples
// the pooled training split, which interleaves pairs proportionally to
// size. Divergent candidates are marked failed; throws only when every
// candidate fails.
TrainResult Train(const ExperimentConfig& config, const SynthDataset& data,
                  const std::vector<const ParamStore*>& pretrained = {});

// Languages whose BLEU is scored at the character level.
const std::set<std::string>& CharScoredLanguages();

struct EvalResult {
  double bleu = 0.0;  // pooled corpus BLEU over every utterance, word mode
  std::map<std::string, double> per_language_bleu;  // char mode when tagged
  double token_accuracy = 0.0;
  int64_t utterance_count = 0;
};

// Beam-decodes every utterance and scores against the references.
EvalResult Evaluate(TranslationPipeline* pipeline,
                    const std::vector<Utterance>& utterances, int beam,
                    int64_t max_new_tokens);

// Utterance views over a dataset split, optionally restricted to one pair.
std::vector<Utterance> SplitUtterances(const SynthDataset& data,
                                       const std::string& split);
std::vector<Utterance> PairUtterances(const SynthDataset& data,
                                      const std::string& split,
                                      const SynthPairSpec& pair);

// The pair a bilingual run works on: `bilingual_pair` ("src->tgt") when set,
// otherwise the first configured pair. Throws when the name matches nothing.
SynthPairSpec ResolveBilingualPair(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Ablation grids

struct AblationCell {
  std::string label;
  double reference_bleu = 0.0;  // published annotation for this cell
  bool failed = false;
  std::string error;
  double valid_loss = 0.0;
  double token_accuracy = 0.0;
  // Published-architecture budget (strategy grids only).
  int64_t budget_trainable = 0;
  double budget_fraction = 0.0;
};

struct AblationReport {
  std::vector<AblationCell> cells;
  std::string table;  // rendered column-oriented text
};

// Trains every published finetuning strategy at the base config's scale.
// `max_cells` > 0 truncates the grid (a single cell equals one Train call).
AblationReport RunStrategyAblation(
    const ExperimentConfig& base, const SynthDataset& data,
    const std::vector<const ParamStore*>& pretrained = {}, int max_cells = -1);

// Trains every published adaptor configuration at the base config's scale.
AblationReport RunAdaptorAblation(
    const ExperimentConfig& base, const SynthDataset& data,
    const std::vector<const ParamStore*>& pretrained = {}, int max_cells = -1);

}  // namespace s2t

#endif  // S2T_TRAIN_H_
