// s2t/finetune.h

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

#ifndef S2T_FINETUNE_H_
#define S2T_FINETUNE_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "s2t/nn.h"

namespace s2t {

// Which parameter groups a finetuning run updates. Roles are matched per
// owner; the adaptor has no pretrained state, so it stays trainable by
// default regardless of the role sets.
struct FinetuneStrategy {
  std::set<ParamRole> encoder_roles;
  bool encoder_all = false;
  std::set<ParamRole> decoder_roles;
  bool decoder_all = false;
  // Decoder discards its pretrained state and trains fully from random
  // initialization (the re-initialization itself happens where the
  // pipeline is assembled; selection-wise this equals decoder_all).
  bool decoder_from_scratch = false;
  bool adaptor_trainable = true;
  std::string label;  // human-readable "encoder roles / decoder roles"
};

// Groups every parameter into exactly one role bucket. Throws if a
// transformer-layer parameter carries the catch-all role, which would mean
// a registration bug rather than a legitimately unclassified tensor.
std::map<ParamRole, std::vector<std::string>> PartitionByRole(
    const ParamStore& store);

// Marks exactly the parameters selected by the strategy as trainable
// (requires_grad true) and freezes everything else. Returns the trainable
// names in store order; warns on stderr when the selection is empty.
std::vector<std::string> SelectTrainable(ParamStore* store,
                                         const FinetuneStrategy& strategy);

// Zeroes any gradient recorded on parameters outside the trainable set.
// Frozen parameters never enter the autodiff graph once SelectTrainable
// has run, so this is a guard for gradients recorded before freezing.
void ApplyGradientMask(ParamStore* store,
                       const std::vector<std::string>& trainable);

// Full-size reference architecture used only for analytic parameter
// counting; it is never instantiated as tensors. Layer counts follow from
// the published budget increments.
struct ReferenceArchSpec {
  int64_t encoder_layers = 24;
  int64_t encoder_dim = 1024;
  int64_t encoder_heads = 16;
  int64_t encoder_ffn = 4096;
  int64_t decoder_layers = 12;
  int64_t decoder_dim = 1024;
  int64_t decoder_heads = 16;
  int64_t decoder_ffn = 4096;
  int64_t vocab = 250054;
  int64_t adaptor_layers = 3;
  int64_t adaptor_kernel = 3;
  bool tie_output_to_embedding = true;
  bool decoder_learned_positions = true;
  int64_t decoder_max_positions = 1024;
  // Parameters that train in every strategy but are not derivable from the
  // fields above (e.g. the audio feature extractor and encoder positional
  // convolutions); included in the total and in every trainable count.
  int64_t always_trained_extras = 0;
};

// Analytic building blocks (biases included in every block).
int64_t AttentionBlockParams(int64_t dim);            // 4*(d^2 + d)
int64_t FeedForwardParams(int64_t dim, int64_t ffn);  // 2*d*f + f + d
int64_t LayerNormParams(int64_t dim);                 // 2*d

struct BudgetResult {
  int64_t trainable = 0;
  int64_t total = 0;
  double fraction = 0.0;
};

// Trainable-parameter budget of a strategy under the reference
// architecture; fraction is trainable / full pipeline total.
BudgetResult CountBudget(const ReferenceArchSpec& arch,
                         const FinetuneStrategy& strategy);

// One line of the published finetuning-selection study: the strategy plus
// its reported BLEU, carried along only to annotate report output.
struct StrategyGridRow {
  FinetuneStrategy strategy;
  double reference_bleu = 0.0;
};

// The seven published encoder/decoder finetuning combinations, in report
// order. Row 3 (encoder layer_norm + self_attn, decoder layer_norm +
// encoder_attn + self_attn) is the published best.
std::vector<StrategyGridRow> PublishedStrategyGrid();

// Renders the budget table: one line per strategy with the reference BLEU
// annotation, trainable count, and percentage of the total.
std::string EmitBudgetTable(const ReferenceArchSpec& arch,
                            const std::vector<StrategyGridRow>& rows);

}  // namespace s2t

#endif  // S2T_FINETUNE_H_
