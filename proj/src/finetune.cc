// finetune.cc

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

#include "s2t/finetune.h"

#include <algorithm>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace s2t {

std::map<ParamRole, std::vector<std::string>> PartitionByRole(
    const ParamStore& store) {
  std::map<ParamRole, std::vector<std::string>> buckets;
  for (const ParamInfo& p : store.params()) {
    if (p.role == ParamRole::kOther &&
        p.name.find(".layers.") != std::string::npos) {
      throw std::logic_error(
          "parameter '" + p.name +
          "' belongs to a transformer layer but carries the catch-all role; "
          "fix its registration");
    }
    buckets[p.role].push_back(p.name);
  }
  return buckets;
}

namespace {

bool StrategySelects(const FinetuneStrategy& s, Owner owner, ParamRole role) {
  switch (owner) {
    case Owner::kAdaptor:
      return s.adaptor_trainable;
    case Owner::kEncoder:
      return s.encoder_all || s.encoder_roles.count(role) > 0;
    case Owner::kDecoder:
      // Training from scratch re-initializes the decoder, so every decoder
      // parameter necessarily updates.
      return s.decoder_all || s.decoder_from_scratch ||
             s.decoder_roles.count(role) > 0;
  }
  return false;
}

}  // namespace

std::vector<std::string> SelectTrainable(ParamStore* store,
                                         const FinetuneStrategy& strategy) {
  std::vector<std::string> trainable;
  for (ParamInfo& p : store->mutable_params()) {
    const bool on = StrategySelects(strategy, p.owner, p.role);
    p.tensor.set_requires_grad(on);
    if (on) {
      trainable.push_back(p.name);
    }
  }
  if (trainable.empty()) {
    std::cerr << "warning: finetune strategy '" << strategy.label
              << "' selects no trainable parameters\n";
  }
  return trainable;
}

void ApplyGradientMask(ParamStore* store,
                       const std::vector<std::string>& trainable) {
  std::unordered_set<std::string> keep(trainable.begin(), trainable.end());
  for (ParamInfo& p : store->mutable_params()) {
    if (keep.count(p.name) > 0 || !p.tensor.grad_allocated()) {
      continue;
    }
    std::vector<double>& g = p.tensor.mutable_grad();
    std::fill(g.begin(), g.end(), 0.0);
  }
}

// ---------------------------------------------------------------------------
// Analytic budget under the reference architecture.

int64_t AttentionBlockParams(int64_t dim) {
  // Query/key/value/output projections, each dim x dim plus a bias.
  return 4 * (dim * dim + dim);
}

int64_t FeedForwardParams(int64_t dim, int64_t ffn) {
  // Two projections dim->ffn->dim with biases.
  return dim * ffn + ffn + ffn * dim + dim;
}

int64_t LayerNormParams(int64_t dim) { return 2 * dim; }

namespace {

// Per-role parameter counts for one side of the pipeline.
struct RoleCounts {
  std::map<ParamRole, int64_t> by_role;
  int64_t Total() const {
    int64_t sum = 0;
    for (const auto& [role, n] : by_role) sum += n;
    return sum;
  }
  int64_t Sum(const std::set<ParamRole>& roles) const {
    int64_t sum = 0;
    for (ParamRole r : roles) {
      auto it = by_role.find(r);
      if (it != by_role.end()) sum += it->second;
    }
    return sum;
  }
};

RoleCounts EncoderCounts(const ReferenceArchSpec& a) {
  RoleCounts c;
  // Each layer normalizes before attention and before the feed-forward
  // block; one more normalization closes the stack.
  c.by_role[ParamRole::kLayerNorm] =
      (2 * a.encoder_layers + 1) * LayerNormParams(a.encoder_dim);
  c.by_role[ParamRole::kSelfAttn] =
      a.encoder_layers * AttentionBlockParams(a.encoder_dim);
  c.by_role[ParamRole::kFfn] =
      a.encoder_layers * FeedForwardParams(a.encoder_dim, a.encoder_ffn);
  return c;
}

RoleCounts DecoderCounts(const ReferenceArchSpec& a) {
  RoleCounts c;
  // Three normalizations per layer (self-attention, memory attention,
  // feed-forward) plus the final one.
  c.by_role[ParamRole::kLayerNorm] =
      (3 * a.decoder_layers + 1) * LayerNormParams(a.decoder_dim);
  c.by_role[ParamRole::kSelfAttn] =
      a.decoder_layers * AttentionBlockParams(a.decoder_dim);
  c.by_role[ParamRole::kEncoderAttn] =
      a.decoder_layers * AttentionBlockParams(a.decoder_dim);
  c.by_role[ParamRole::kFfn] =
      a.decoder_layers * FeedForwardParams(a.decoder_dim, a.decoder_ffn);
  int64_t embedding = a.vocab * a.decoder_dim;
  if (!a.tie_output_to_embedding) {
    embedding += a.decoder_dim * a.vocab + a.vocab;  // separate output head
  }
  c.by_role[ParamRole::kEmbedding] = embedding;
  c.by_role[ParamRole::kPositional] =
      a.decoder_learned_positions ? a.decoder_max_positions * a.decoder_dim
                                  : 0;
  return c;
}

int64_t AdaptorCount(const ReferenceArchSpec& a) {
  // Convolutions map decoder_dim channels to decoder_dim channels (the
  // encoder and decoder widths match in the reference architecture).
  const int64_t d = a.decoder_dim;
  int64_t per_layer = d * d * a.adaptor_kernel + d;
  int64_t total = a.adaptor_layers * per_layer;
  if (a.encoder_dim != a.decoder_dim) {
    total += a.encoder_dim * a.decoder_dim + a.decoder_dim;  // projection
  }
  return total;
}

}  // namespace

BudgetResult CountBudget(const ReferenceArchSpec& arch,
                         const FinetuneStrategy& strategy) {
  const RoleCounts enc = EncoderCounts(arch);
  const RoleCounts dec = DecoderCounts(arch);
  const int64_t adaptor = AdaptorCount(arch);

  BudgetResult r;
  r.total = enc.Total() + dec.Total() + adaptor + arch.always_trained_extras;

  r.trainable = arch.always_trained_extras;
  r.trainable +=
      strategy.encoder_all ? enc.Total() : enc.Sum(strategy.encoder_roles);
  r.trainable += (strategy.decoder_all || strategy.decoder_from_scratch)
                     ? dec.Total()
                     : dec.Sum(strategy.decoder_roles);
  if (strategy.adaptor_trainable) {
    r.trainable += adaptor;
  }
  r.fraction =
      r.total > 0 ? static_cast<double>(r.trainable) / r.total : 0.0;
  return r;
}

namespace {

FinetuneStrategy MakeStrategy(std::set<ParamRole> enc, bool enc_all,
                              std::set<ParamRole> dec, bool dec_all,
                              bool dec_scratch, std::string label) {
  FinetuneStrategy s;
  s.encoder_roles = std::move(enc);
  s.encoder_all = enc_all;
  s.decoder_roles = std::move(dec);
  s.decoder_all = dec_all;
  s.decoder_from_scratch = dec_scratch;
  s.label = std::move(label);
  return s;
}

}  // namespace

std::vector<StrategyGridRow> PublishedStrategyGrid() {
  using R = ParamRole;
  const std::set<R> ln = {R::kLayerNorm};
  const std::set<R> ln_ea = {R::kLayerNorm, R::kEncoderAttn};
  const std::set<R> ln_ea_sa = {R::kLayerNorm, R::kEncoderAttn, R::kSelfAttn};
  const std::set<R> ln_sa = {R::kLayerNorm, R::kSelfAttn};

  std::vector<StrategyGridRow> rows;
  rows.push_back({MakeStrategy(ln, false, ln, false, false,
                               "enc:ln / dec:ln"),
                  19.8});
  rows.push_back({MakeStrategy(ln, false, ln_ea, false, false,
                               "enc:ln / dec:ln+enc_attn"),
                  20.3});
  rows.push_back({MakeStrategy(ln, false, ln_ea_sa, false, false,
                               "enc:ln / dec:ln+enc_attn+self_attn"),
                  18.9});
  rows.push_back({MakeStrategy(ln_sa, false, ln_ea_sa, false, false,
                               "enc:ln+self_attn / dec:ln+enc_attn+self_attn"),
                  21.5});
  rows.push_back({MakeStrategy(ln_sa, false, {}, true, false,
                               "enc:ln+self_attn / dec:all"),
                  17.0});
  rows.push_back({MakeStrategy({}, true, {}, true, false, "enc:all / dec:all"),
                  20.2});
  rows.push_back({MakeStrategy(ln_sa, false, {}, false, true,
                               "enc:ln+self_attn / dec:scratch"),
                  2.2});
  return rows;
}

std::string EmitBudgetTable(const ReferenceArchSpec& arch,
                            const std::vector<StrategyGridRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(48) << "strategy" << std::right << std::setw(14)
      << "trainable(M)" << std::setw(12) << "share(%)" << std::setw(10)
      << "bleu" << "\n";
  out << std::string(84, '-') << "\n";
  for (const StrategyGridRow& row : rows) {
    const BudgetResult b = CountBudget(arch, row.strategy);
    out << std::left << std::setw(48) << row.strategy.label << std::right
        << std::setw(14) << std::fixed << std::setprecision(2)
        << b.trainable / 1e6 << std::setw(12) << std::setprecision(1)
        << 100.0 * b.fraction << std::setw(10) << std::setprecision(2)
        << row.reference_bleu << "\n";
  }
  return out.str();
}

}  // namespace s2t
