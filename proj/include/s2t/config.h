// s2t/config.h

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

#ifndef S2T_CONFIG_H_
#define S2T_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "s2t/finetune.h"
#include "s2t/pipeline.h"
#include "s2t/synth_data.h"

namespace s2t {

// Everything one experiment needs, serializable as JSON. Defaults follow the
// documented setup: label smoothing 0.3, beam size 5, and a learning-rate
// sweep selected by validation loss.
struct ExperimentConfig {
  PipelineConfig pipeline;
  SynthTaskSpec data;
  FinetuneStrategy strategy;  // defaulted to the best published combination
  std::string mode = "bilingual";  // "bilingual" | "multilingual"
  // Pair trained in bilingual mode, as "src->tgt"; empty selects the first.
  std::string bilingual_pair;
  std::vector<double> lr_candidates = {3e-3, 1e-3};
  int64_t batch_size = 8;
  int64_t step_budget = 400;
  int64_t warmup_steps = 20;    // linear learning-rate warmup
  int64_t eval_interval = 40;   // steps between validation passes
  int64_t valid_cap = 32;       // utterances per periodic validation pass
  double label_smoothing = 0.3;
  int beam_size = 5;
  int64_t max_new_tokens = 16;  // decode length cap
  uint64_t seed = 1;
  std::string out_dir = "out";
  // Self-supervised warmup budgets that precede finetuning.
  int64_t contrastive_steps = 150;
  int64_t denoising_steps = 200;
  double contrastive_lr = 1e-3;
  double denoising_lr = 1e-3;

  ExperimentConfig();

  void Validate() const;  // throws std::invalid_argument
};

// The reference toy setup: 32-token vocabulary, one en->de pair with 2000
// training utterances, 16 nominal frames per token.
ExperimentConfig DefaultToyConfig();

// JSON round trip; text form is what config files and checkpoints embed.
std::string ToJsonText(const ExperimentConfig& config);
ExperimentConfig FromJsonText(const std::string& text);

ExperimentConfig LoadExperimentConfig(const std::string& path);
void SaveExperimentConfig(const std::string& path,
                          const ExperimentConfig& config);

}  // namespace s2t

#endif  // S2T_CONFIG_H_
