// cli.cc

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

#include "s2t/cli.h"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "s2t/checkpoint.h"
#include "s2t/config.h"
#include "s2t/grad_check.h"
#include "s2t/train.h"
#include "s2t/wav.h"

namespace s2t {
namespace {

// Gradients worse than this indicate a broken backward pass.
constexpr double kGradTolerance = 1e-4;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_set = false;
};

ExperimentConfig LoadOrDefault(const CommonArgs& args) {
  ExperimentConfig config = args.config_path.empty()
                                ? DefaultToyConfig()
                                : LoadExperimentConfig(args.config_path);
  if (args.seed_set) config.seed = args.seed;
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  return config;
}

void ExportSplit(const SynthDataset& data, const std::string& split,
                 const std::string& dir) {
  std::vector<ManifestRow> rows;
  for (const SynthSample& sample : data.Split(split)) {
    ManifestRow row = sample.row;
    row.audio = "audio/" + row.id + ".wav";
    WriteWav(dir + "/" + row.audio, sample.waveform);
    rows.push_back(std::move(row));
  }
  SaveManifest(dir + "/" + split + ".tsv", rows);
}

int RunSynthData(const CommonArgs& args) {
  const ExperimentConfig config = LoadOrDefault(args);
  if (config.out_dir.empty()) {
    throw std::invalid_argument("synth-data needs --out (or out_dir in the config)");
  }
  const SynthDataset data = GenerateSynthData(config.data, config.seed);
  std::filesystem::create_directories(config.out_dir + "/audio");
  data.vocab.Save(config.out_dir + "/vocab.txt");
  for (const std::string& split : {"train", "valid", "test"}) {
    ExportSplit(data, split, config.out_dir);
  }
  std::cout << "wrote " << data.train.size() << " train / "
            << data.valid.size() << " valid / " << data.test.size()
            << " test utterances to " << config.out_dir << "\n";
  return 0;
}

void PrintEval(const std::string& tag, const EvalResult& eval) {
  std::cout << std::fixed << std::setprecision(2) << tag
            << ": bleu=" << eval.bleu << " token_accuracy="
            << std::setprecision(4) << eval.token_accuracy
            << " utterances=" << eval.utterance_count << "\n";
  for (const auto& [lang, bleu] : eval.per_language_bleu) {
    const char* mode =
        CharScoredLanguages().count(lang) > 0 ? "char" : "word";
    std::cout << "  " << lang << ": bleu=" << std::setprecision(2) << bleu
              << " (" << mode << " level)\n";
  }
}

int RunTrain(const CommonArgs& args) {
  const ExperimentConfig config = LoadOrDefault(args);
  const SynthDataset data = GenerateSynthData(config.data, config.seed);
  const PretrainedModels pretrained = RunPretraining(config, data);
  const TrainResult result = Train(config, data, pretrained.Stores());

  std::cout << "best learning rate " << result.best_lr << " (valid loss "
            << std::fixed << std::setprecision(4) << result.best_valid_loss
            << " at step " << result.best_step << ")\n";
  for (const CandidateResult& cand : result.candidates) {
    std::cout << "  lr " << cand.lr << ": "
              << (cand.failed ? "diverged"
                              : "valid loss " +
                                    std::to_string(cand.best_valid_loss))
              << "\n";
  }
  if (!result.checkpoint_path.empty()) {
    std::cout << "checkpoint: " << result.checkpoint_path << "\n";
  }

  const std::vector<Utterance> test =
      config.mode == "bilingual"
          ? PairUtterances(data, "test", ResolveBilingualPair(config))
          : SplitUtterances(data, "test");
  PrintEval("test", Evaluate(result.pipeline.get(), test, config.beam_size,
                             config.max_new_tokens));
  return 0;
}

int RunEval(const CommonArgs& args, const std::string& checkpoint_path,
            const std::string& split, int beam) {
  const ExperimentConfig config = LoadOrDefault(args);
  const SynthDataset data = GenerateSynthData(config.data, config.seed);
  TranslationPipeline pipeline(config.pipeline, data.vocab, config.seed);
  ReadCheckpoint(checkpoint_path, pipeline.store());
  const EvalResult eval =
      Evaluate(&pipeline, SplitUtterances(data, split),
               beam > 0 ? beam : config.beam_size, config.max_new_tokens);
  PrintEval(split, eval);
  return 0;
}

int RunCountParams(const std::string& strategy_arg, int64_t extras) {
  ReferenceArchSpec arch;
  arch.always_trained_extras = extras;
  const std::vector<StrategyGridRow> grid = PublishedStrategyGrid();
  if (strategy_arg.empty()) {
    std::cout << EmitBudgetTable(arch, grid);
    return 0;
  }

  const StrategyGridRow* row = nullptr;
  if (strategy_arg == "best") {
    row = &grid[3];  // the highest-scoring published combination
  } else {
    for (const StrategyGridRow& r : grid) {
      if (r.strategy.label == strategy_arg) row = &r;
    }
  }
  if (row == nullptr) {
    throw std::invalid_argument("unknown strategy '" + strategy_arg +
                                "'; use a row label from the table or 'best'");
  }
  const BudgetResult budget = CountBudget(arch, row->strategy);
  std::cout << row->strategy.label << ": trainable " << budget.trainable
            << " of " << budget.total << " (" << std::fixed
            << std::setprecision(1) << 100.0 * budget.fraction
            << "%), reference bleu " << std::setprecision(2)
            << row->reference_bleu << "\n";
  return 0;
}

int RunAblate(const CommonArgs& args, const std::string& grid, int max_cells) {
  ExperimentConfig config = LoadOrDefault(args);
  const std::string table_dir = config.out_dir;
  config.out_dir.clear();  // grid cells keep no per-cell artifacts
  const SynthDataset data = GenerateSynthData(config.data, config.seed);
  const PretrainedModels pretrained = RunPretraining(config, data);

  AblationReport report;
  if (grid == "strategy") {
    report = RunStrategyAblation(config, data, pretrained.Stores(), max_cells);
  } else if (grid == "adaptor") {
    report = RunAdaptorAblation(config, data, pretrained.Stores(), max_cells);
  } else {
    throw std::invalid_argument("--grid must be 'strategy' or 'adaptor', got '" +
                                grid + "'");
  }
  std::cout << report.table;
  if (!table_dir.empty()) {
    std::filesystem::create_directories(table_dir);
    const std::string path = table_dir + "/" + grid + "_ablation.txt";
    std::ofstream out(path);
    out << report.table;
    std::cout << "table written to " << path << "\n";
  }
  return 0;
}

int RunGradCheck(uint64_t seed) {
  bool all_ok = true;
  for (const NamedGradCheck& check : StandardLayerGradChecks(seed)) {
    const bool ok = check.result.max_rel_error <= kGradTolerance;
    all_ok = all_ok && ok;
    std::cout << std::left << std::setw(20) << check.layer << std::scientific
              << std::setprecision(3) << check.result.max_rel_error << "  ("
              << check.result.checked << " coordinates"
              << (check.result.worst.empty()
                      ? std::string()
                      : ", worst " + check.result.worst)
              << ")  " << (ok ? "ok" : "FAIL") << "\n";
  }
  if (!all_ok) {
    std::cerr << "gradient check failed: relative error above "
              << kGradTolerance << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int CliMain(int argc, char** argv) {
  CLI::App app{"speech-to-text translation experiment harness"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&args](CLI::App* cmd, bool config_required) {
    CLI::Option* cfg = cmd->add_option("--config", args.config_path,
                                       "experiment config (JSON)");
    if (config_required) cfg->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "random seed override")
        ->each([&args](const std::string&) { args.seed_set = true; });
  };

  CLI::App* synth = app.add_subcommand(
      "synth-data", "generate the synthetic corpus and export it");
  add_common(synth, /*config_required=*/false);

  CLI::App* train = app.add_subcommand(
      "train", "pretrain, finetune over the sweep, and evaluate");
  add_common(train, /*config_required=*/true);

  std::string checkpoint_path, split = "test";
  int beam = 0;
  CLI::App* eval = app.add_subcommand("eval", "score a checkpoint on a split");
  add_common(eval, /*config_required=*/true);
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")
      ->required();
  eval->add_option("--split", split, "dataset split (train/valid/test)");
  eval->add_option("--beam", beam, "beam size override");

  std::string strategy_arg;
  int64_t extras = 0;
  CLI::App* count = app.add_subcommand(
      "count-params", "print trainable-parameter budgets per strategy");
  count->add_option("--strategy", strategy_arg,
                    "print one row: a table label or 'best'");
  count->add_option("--extras", extras,
                    "parameters treated as always trainable");

  std::string grid;
  int max_cells = -1;
  CLI::App* ablate =
      app.add_subcommand("ablate", "run a published ablation grid");
  add_common(ablate, /*config_required=*/false);
  ablate->add_option("--grid", grid, "'strategy' or 'adaptor'")->required();
  ablate->add_option("--max-cells", max_cells, "truncate the grid");

  uint64_t grad_seed = 3;
  CLI::App* grad = app.add_subcommand(
      "grad-check", "verify layer gradients against finite differences");
  grad->add_option("--seed", grad_seed, "seed for the probed tensors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) return RunSynthData(args);
    if (train->parsed()) return RunTrain(args);
    if (eval->parsed()) return RunEval(args, checkpoint_path, split, beam);
    if (count->parsed()) return RunCountParams(strategy_arg, extras);
    if (ablate->parsed()) return RunAblate(args, grid, max_cells);
    if (grad->parsed()) return RunGradCheck(grad_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace s2t
