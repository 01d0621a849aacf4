// train.cc

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

#include "s2t/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "s2t/bleu.h"
#include "s2t/checkpoint.h"
#include "s2t/optimizer.h"

namespace s2t {

void WriteCurve(const std::string& path, const std::vector<CurvePoint>& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write curve: " + path);
  out << "step\twall_seconds\ttrain_loss\tvalid_loss\ttoken_accuracy\n";
  out << std::setprecision(10);
  for (const CurvePoint& p : curve) {
    out << p.step << '\t' << p.wall_seconds << '\t' << p.train_loss << '\t'
        << p.valid_loss << '\t' << p.token_accuracy << "\n";
  }
}

std::vector<const ParamStore*> PretrainedModels::Stores() const {
  std::vector<const ParamStore*> stores;
  if (speech) stores.push_back(speech->store());
  if (text) stores.push_back(&text->store());
  return stores;
}

PretrainedModels RunPretraining(const ExperimentConfig& config,
                                const SynthDataset& data) {
  config.Validate();
  if (data.train.empty()) {
    throw std::invalid_argument("RunPretraining: empty training split");
  }
  PretrainedModels models;

  if (config.contrastive_steps > 0) {
    ContrastivePretrainConfig cc;
    cc.feature = config.pipeline.feature;
    cc.context = config.pipeline.context;
    cc.learning_rate = config.contrastive_lr;
    models.speech = std::make_unique<ContrastivePretrainer>(
        cc, Rng(config.seed).Derive("contrastive-pretrain").NextU64());
    const size_t n = data.train.size();
    for (int64_t step = 0; step < config.contrastive_steps; ++step) {
      const std::vector<std::vector<double>> batch = {
          data.train[(2 * step) % n].waveform,
          data.train[(2 * step + 1) % n].waveform};
      models.speech->Step(batch);
    }
  }

  if (config.denoising_steps > 0) {
    DenoisingPretrainConfig dc;
    dc.decoder = config.pipeline.decoder;
    dc.learning_rate = config.denoising_lr;
    models.text = std::make_unique<DenoisingPretrainer>(
        dc, data.vocab, Rng(config.seed).Derive("denoising-pretrain").NextU64());
    const size_t n = data.train.size();
    size_t cursor = 0;
    for (int64_t step = 0; step < config.denoising_steps; ++step) {
      std::vector<std::vector<int64_t>> batch;
      for (int b = 0; b < 4; ++b) {
        const ManifestRow& row = data.train[cursor % n].row;
        ++cursor;
        std::vector<int64_t> sample = {data.vocab.LanguageTag(row.tgt_lang)};
        sample.insert(sample.end(), row.tgt_text.begin(), row.tgt_text.end());
        batch.push_back(std::move(sample));
      }
      models.text->Step(batch);
    }
  }
  return models;
}

namespace {

std::vector<Utterance> ToUtterances(const std::vector<SynthSample>& samples) {
  std::vector<Utterance> utts;
  utts.reserve(samples.size());
  for (const SynthSample& s : samples) {
    utts.push_back({&s.waveform, &s.row});
  }
  return utts;
}

std::vector<Utterance> FilterPair(const std::vector<SynthSample>& samples,
                                  const std::string& src,
                                  const std::string& tgt) {
  std::vector<Utterance> utts;
  for (const SynthSample& s : samples) {
    if (s.row.src_lang == src && s.row.tgt_lang == tgt) {
      utts.push_back({&s.waveform, &s.row});
    }
  }
  return utts;
}

// Mean teacher-forced loss over a fixed subset, without recording gradients.
double ValidLoss(TranslationPipeline* pipeline,
                 const std::vector<Utterance>& valid, int64_t cap,
                 double label_smoothing) {
  NoGradGuard guard;
  const size_t n = std::min<size_t>(valid.size(), static_cast<size_t>(cap));
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    total += pipeline
                 ->UtteranceLoss(valid[i], label_smoothing, /*train=*/false,
                                 nullptr)
                 .data()[0];
  }
  return total / static_cast<double>(n);
}

std::vector<Utterance> Subset(const std::vector<Utterance>& utts, int64_t cap) {
  return std::vector<Utterance>(
      utts.begin(),
      utts.begin() + std::min<size_t>(utts.size(), static_cast<size_t>(cap)));
}

using Snapshot = std::vector<std::pair<std::string, std::vector<double>>>;

Snapshot TakeSnapshot(const ParamStore& store) {
  Snapshot snap;
  snap.reserve(store.params().size());
  for (const ParamInfo& p : store.params()) {
    snap.emplace_back(p.name, p.tensor.data());
  }
  return snap;
}

void RestoreSnapshot(const Snapshot& snap, ParamStore* store) {
  for (const auto& [name, values] : snap) {
    bool found = false;
    for (ParamInfo& p : store->mutable_params()) {
      if (p.name == name) {
        p.tensor.mutable_data() = values;
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::logic_error("snapshot parameter '" + name + "' not in store");
    }
  }
}

std::unique_ptr<TranslationPipeline> BuildPipeline(
    const ExperimentConfig& config, const Vocabulary& vocab,
    const std::vector<const ParamStore*>& pretrained) {
  auto pipeline = std::make_unique<TranslationPipeline>(config.pipeline, vocab,
                                                        config.seed);
  for (const ParamStore* src : pretrained) {
    CopyMatchingParams(*src, pipeline->store());
  }
  return pipeline;
}

}  // namespace

std::vector<Utterance> SplitUtterances(const SynthDataset& data,
                                       const std::string& split) {
  return ToUtterances(data.Split(split));
}

std::vector<Utterance> PairUtterances(const SynthDataset& data,
                                      const std::string& split,
                                      const SynthPairSpec& pair) {
  return FilterPair(data.Split(split), pair.src_lang, pair.tgt_lang);
}

SynthPairSpec ResolveBilingualPair(const ExperimentConfig& config) {
  if (config.bilingual_pair.empty()) {
    return config.data.pairs.front();
  }
  const size_t arrow = config.bilingual_pair.find("->");
  if (arrow == std::string::npos) {
    throw std::invalid_argument("bilingual_pair must look like 'src->tgt', got '" +
                                config.bilingual_pair + "'");
  }
  const std::string src = config.bilingual_pair.substr(0, arrow);
  const std::string tgt = config.bilingual_pair.substr(arrow + 2);
  for (const SynthPairSpec& p : config.data.pairs) {
    if (p.src_lang == src && p.tgt_lang == tgt) return p;
  }
  throw std::invalid_argument("bilingual_pair '" + config.bilingual_pair +
                              "' is not one of the configured pairs");
}

TrainResult Train(const ExperimentConfig& config, const SynthDataset& data,
                  const std::vector<const ParamStore*>& pretrained) {
  config.Validate();

  std::vector<Utterance> train_utts, valid_utts;
  if (config.mode == "bilingual") {
    const SynthPairSpec pair = ResolveBilingualPair(config);
    train_utts = PairUtterances(data, "train", pair);
    valid_utts = PairUtterances(data, "valid", pair);
  } else {
    train_utts = SplitUtterances(data, "train");
    valid_utts = SplitUtterances(data, "valid");
  }
  if (train_utts.empty() || valid_utts.empty()) {
    throw std::invalid_argument("Train: no data for the selected mode/pair");
  }

  const bool write_files = !config.out_dir.empty();
  if (write_files) {
    std::filesystem::create_directories(config.out_dir);
  }

  TrainResult result;
  result.best_valid_loss = std::numeric_limits<double>::infinity();
  Snapshot best_snapshot;

  for (size_t k = 0; k < config.lr_candidates.size(); ++k) {
    CandidateResult cand;
    cand.lr = config.lr_candidates[k];
    cand.best_valid_loss = std::numeric_limits<double>::infinity();

    // Identical starting point for every candidate: same construction seed,
    // same pretrained weights, and the same batch stream.
    auto pipeline = BuildPipeline(config, data.vocab, pretrained);
    const std::vector<std::string> trainable =
        SelectTrainable(pipeline->store(), config.strategy);

    AdamConfig adam;
    adam.learning_rate = cand.lr;
    adam.warmup_steps = config.warmup_steps;
    AdamOptimizer optimizer(pipeline->store(), adam);

    Rng batch_rng = Rng(config.seed).Derive("batches");
    Rng drop_rng = Rng(config.seed).Derive("layer-drop");

    Snapshot cand_snapshot;
    const auto started = std::chrono::steady_clock::now();
    double interval_loss = 0.0;
    int64_t interval_count = 0;

    for (int64_t step = 1; step <= config.step_budget; ++step) {
      std::vector<Utterance> batch;
      batch.reserve(static_cast<size_t>(config.batch_size));
      for (int64_t b = 0; b < config.batch_size; ++b) {
        batch.push_back(
            train_utts[batch_rng.UniformInt(train_utts.size())]);
      }

      pipeline->store()->ZeroAllGrads();
      Tensor loss = pipeline->BatchLoss(batch, config.label_smoothing,
                                        /*train=*/true, &drop_rng);
      const double loss_value = loss.data()[0];
      if (!std::isfinite(loss_value)) {
        cand.failed = true;
        std::cerr << "learning rate " << cand.lr << " diverged at step "
                  << step << "\n";
        break;
      }
      if (!trainable.empty()) {
        loss.Backward();
        optimizer.Step();
      }
      interval_loss += loss_value;
      ++interval_count;

      if (step % config.eval_interval == 0 || step == config.step_budget) {
        CurvePoint point;
        point.step = step;
        point.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          started)
                .count();
        point.train_loss = interval_loss / static_cast<double>(interval_count);
        interval_loss = 0.0;
        interval_count = 0;
        point.valid_loss = ValidLoss(pipeline.get(), valid_utts,
                                     config.valid_cap, config.label_smoothing);
        point.token_accuracy =
            pipeline->TokenAccuracy(Subset(valid_utts, config.valid_cap));
        cand.curve.push_back(point);

        if (point.valid_loss < cand.best_valid_loss) {
          cand.best_valid_loss = point.valid_loss;
          cand.best_step = step;
          cand_snapshot = TakeSnapshot(*pipeline->store());
        }
      }
    }

    if (write_files && !cand.curve.empty()) {
      cand.curve_path = config.out_dir + "/curve-" + config.mode + "-lr" +
                        std::to_string(k) + ".tsv";
      WriteCurve(cand.curve_path, cand.curve);
    }
    if (!cand.failed && cand.best_valid_loss < result.best_valid_loss) {
      result.best_valid_loss = cand.best_valid_loss;
      result.best_lr = cand.lr;
      result.best_step = cand.best_step;
      best_snapshot = std::move(cand_snapshot);
    }
    result.candidates.push_back(std::move(cand));
  }

  if (!std::isfinite(result.best_valid_loss)) {
    throw std::runtime_error("every learning-rate candidate diverged");
  }

  result.pipeline = BuildPipeline(config, data.vocab, pretrained);
  RestoreSnapshot(best_snapshot, result.pipeline->store());
  SelectTrainable(result.pipeline->store(), config.strategy);

  if (write_files) {
    result.checkpoint_path = config.out_dir + "/best.ckpt";
    WriteCheckpoint(result.checkpoint_path, *result.pipeline->store(),
                    /*optimizer=*/nullptr, ToJsonText(config),
                    result.best_step, result.best_valid_loss);
  }
  return result;
}

const std::set<std::string>& CharScoredLanguages() {
  static const std::set<std::string> langs = {"ja", "zh"};
  return langs;
}

EvalResult Evaluate(TranslationPipeline* pipeline,
                    const std::vector<Utterance>& utterances, int beam,
                    int64_t max_new_tokens) {
  if (utterances.empty()) {
    throw std::invalid_argument("Evaluate: no utterances");
  }
  const Vocabulary& vocab = pipeline->vocab();

  std::vector<std::string> hyps, refs;
  std::map<std::string, std::pair<std::vector<std::string>,
                                  std::vector<std::string>>>
      by_language;
  for (const Utterance& utt : utterances) {
    const std::vector<int64_t> decoded = pipeline->Decode(
        *utt.waveform, utt.row->tgt_lang, beam, max_new_tokens);
    std::string hyp, ref;
    for (size_t i = 0; i < decoded.size(); ++i) {
      if (i > 0) hyp += ' ';
      hyp += vocab.TokenText(decoded[i]);
    }
    for (size_t i = 0; i < utt.row->tgt_text.size(); ++i) {
      if (i > 0) ref += ' ';
      ref += vocab.TokenText(utt.row->tgt_text[i]);
    }
    hyps.push_back(hyp);
    refs.push_back(ref);
    by_language[utt.row->tgt_lang].first.push_back(hyp);
    by_language[utt.row->tgt_lang].second.push_back(ref);
  }

  EvalResult result;
  result.utterance_count = static_cast<int64_t>(utterances.size());
  result.bleu = CorpusBleu(hyps, refs).score;
  for (const auto& [lang, pair] : by_language) {
    const bool char_level = CharScoredLanguages().count(lang) > 0;
    result.per_language_bleu[lang] =
        CorpusBleu(pair.first, pair.second, char_level).score;
  }
  result.token_accuracy = pipeline->TokenAccuracy(utterances);
  return result;
}

// ---------------------------------------------------------------------------
// Ablation grids

namespace {

std::string RenderAblationTable(const std::string& title,
                                const std::vector<AblationCell>& cells,
                                bool with_budget) {
  std::ostringstream out;
  out << title << "\n";
  out << std::left << std::setw(50) << "cell" << std::right << std::setw(10)
      << "ref_bleu";
  if (with_budget) {
    out << std::setw(14) << "trainable(M)" << std::setw(10) << "share(%)";
  }
  out << std::setw(12) << "valid_loss" << std::setw(11) << "token_acc"
      << std::setw(9) << "status" << "\n";
  for (const AblationCell& cell : cells) {
    out << std::left << std::setw(50) << cell.label << std::right
        << std::setw(10) << std::fixed << std::setprecision(2)
        << cell.reference_bleu;
    if (with_budget) {
      out << std::setw(14) << std::setprecision(2)
          << cell.budget_trainable / 1e6 << std::setw(10)
          << std::setprecision(1) << 100.0 * cell.budget_fraction;
    }
    if (cell.failed) {
      out << std::setw(12) << "-" << std::setw(11) << "-" << std::setw(9)
          << "FAILED";
    } else {
      out << std::setw(12) << std::setprecision(4) << cell.valid_loss
          << std::setw(11) << std::setprecision(3) << cell.token_accuracy
          << std::setw(9) << "ok";
    }
    out << "\n";
  }
  return out.str();
}

// Runs one grid cell; exceptions become a failed cell, not a failed grid.
void RunCell(const ExperimentConfig& config, const SynthDataset& data,
             const std::vector<const ParamStore*>& pretrained,
             AblationCell* cell) {
  try {
    TrainResult r = Train(config, data, pretrained);
    cell->valid_loss = r.best_valid_loss;
    const std::vector<Utterance> valid =
        config.mode == "bilingual"
            ? PairUtterances(data, "valid", ResolveBilingualPair(config))
            : SplitUtterances(data, "valid");
    cell->token_accuracy = r.pipeline->TokenAccuracy(
        Subset(valid, config.valid_cap));
  } catch (const std::exception& e) {
    cell->failed = true;
    cell->error = e.what();
  }
}

}  // namespace

AblationReport RunStrategyAblation(
    const ExperimentConfig& base, const SynthDataset& data,
    const std::vector<const ParamStore*>& pretrained, int max_cells) {
  const std::vector<StrategyGridRow> grid = PublishedStrategyGrid();
  const ReferenceArchSpec reference;
  AblationReport report;
  for (size_t i = 0; i < grid.size(); ++i) {
    if (max_cells >= 0 && static_cast<int>(i) >= max_cells) break;
    AblationCell cell;
    cell.label = grid[i].strategy.label;
    cell.reference_bleu = grid[i].reference_bleu;
    const BudgetResult budget = CountBudget(reference, grid[i].strategy);
    cell.budget_trainable = budget.trainable;
    cell.budget_fraction = budget.fraction;

    ExperimentConfig config = base;
    config.strategy = grid[i].strategy;
    config.out_dir.clear();  // grid cells keep no per-cell artifacts
    RunCell(config, data, pretrained, &cell);
    report.cells.push_back(std::move(cell));
  }
  report.table = RenderAblationTable("finetuning strategies", report.cells,
                                     /*with_budget=*/true);
  return report;
}

AblationReport RunAdaptorAblation(
    const ExperimentConfig& base, const SynthDataset& data,
    const std::vector<const ParamStore*>& pretrained, int max_cells) {
  const std::vector<AdaptorGridRow> grid = EnumerateAdaptorGrid();
  AblationReport report;
  for (size_t i = 0; i < grid.size(); ++i) {
    if (max_cells >= 0 && static_cast<int>(i) >= max_cells) break;
    AdaptorConfig adaptor = grid[i].config;
    adaptor.in_dim = base.pipeline.adaptor.in_dim;
    adaptor.out_dim = base.pipeline.adaptor.out_dim;
    adaptor.activation = base.pipeline.adaptor.activation;

    AblationCell cell;
    std::ostringstream label;
    label << "stride=" << adaptor.stride << " layers=" << adaptor.layer_count
          << " drop=" << std::fixed << std::setprecision(1)
          << adaptor.layer_drop << " norm=" << (adaptor.use_layer_norm ? "yes" : "no");
    cell.label = label.str();
    cell.reference_bleu = grid[i].reference_bleu;

    ExperimentConfig config = base;
    config.pipeline.adaptor = adaptor;
    config.out_dir.clear();
    RunCell(config, data, pretrained, &cell);
    report.cells.push_back(std::move(cell));
  }
  report.table = RenderAblationTable("adaptor configurations", report.cells,
                                     /*with_budget=*/false);
  return report;
}

}  // namespace s2t
