// test_train.cc

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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "s2t/checkpoint.h"

namespace s2t {
namespace {

// A deliberately tiny setup so each training run takes well under a second.
ExperimentConfig MicroConfig() {
  ExperimentConfig c;
  c.pipeline.feature.layers = {{16, 4, 2}, {24, 4, 2}};  // stride 4
  c.pipeline.context.layer_count = 1;
  c.pipeline.context.model_dim = 24;
  c.pipeline.context.head_count = 2;
  c.pipeline.context.ffn_dim = 48;
  c.pipeline.context.max_positions = 128;
  c.pipeline.adaptor.layer_count = 2;
  c.pipeline.adaptor.stride = 2;
  c.pipeline.adaptor.kernel = 3;
  c.pipeline.adaptor.in_dim = 24;
  c.pipeline.adaptor.out_dim = 24;
  c.pipeline.decoder.layer_count = 1;
  c.pipeline.decoder.model_dim = 24;
  c.pipeline.decoder.head_count = 2;
  c.pipeline.decoder.ffn_dim = 48;
  c.pipeline.decoder.max_positions = 32;

  c.data.vocab_size = 8;
  c.data.pairs = {{"en", "de", 1, false}};
  c.data.frames_per_token = 4;
  c.data.samples_per_frame = 4;
  c.data.noise_level = 0.02;
  c.data.min_tokens = 2;
  c.data.max_tokens = 4;
  c.data.train_per_unit = 48;
  c.data.valid_per_pair = 12;
  c.data.test_per_pair = 8;

  c.lr_candidates = {3e-3};
  c.batch_size = 4;
  c.step_budget = 40;
  c.warmup_steps = 5;
  c.eval_interval = 20;
  c.valid_cap = 12;
  c.beam_size = 2;
  c.max_new_tokens = 8;
  c.contrastive_steps = 0;
  c.denoising_steps = 0;
  c.out_dir.clear();
  c.seed = 5;
  return c;
}

// A scratch directory that removes itself.
struct TempDir {
  std::string path;
  explicit TempDir(const std::string& name)
      : path((std::filesystem::temp_directory_path() / name).string()) {
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST_CASE("curve files carry a header and one row per point") {
  TempDir dir("s2t_curve_test");
  std::filesystem::create_directories(dir.path);
  const std::string path = dir.path + "/curve.tsv";
  WriteCurve(path, {{10, 1.5, 3.0, 3.25, 0.125}, {20, 2.5, 2.0, 2.25, 0.5}});
  CHECK(ReadFile(path) ==
        "step\twall_seconds\ttrain_loss\tvalid_loss\ttoken_accuracy\n"
        "10\t1.5\t3\t3.25\t0.125\n"
        "20\t2.5\t2\t2.25\t0.5\n");
}

TEST_CASE("training is deterministic for a fixed seed") {
  const ExperimentConfig config = MicroConfig();
  const SynthDataset data = GenerateSynthData(config.data, config.seed);

  const TrainResult a = Train(config, data);
  const TrainResult b = Train(config, data);
  CHECK(a.best_valid_loss == b.best_valid_loss);
  CHECK(a.best_step == b.best_step);
  REQUIRE(a.candidates.size() == b.candidates.size());
  for (size_t k = 0; k < a.candidates.size(); ++k) {
    REQUIRE(a.candidates[k].curve.size() == b.candidates[k].curve.size());
    for (size_t i = 0; i < a.candidates[k].curve.size(); ++i) {
      CHECK(a.candidates[k].curve[i].train_loss ==
            b.candidates[k].curve[i].train_loss);
      CHECK(a.candidates[k].curve[i].valid_loss ==
            b.candidates[k].curve[i].valid_loss);
    }
  }
  const auto& pa = a.pipeline->store()->params();
  const auto& pb = b.pipeline->store()->params();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].tensor.data() == pb[i].tensor.data());
  }
}

TEST_CASE("the sweep winner matches a standalone run at that rate") {
  ExperimentConfig sweep = MicroConfig();
  sweep.lr_candidates = {3e-3, 1e-7};
  const SynthDataset data = GenerateSynthData(sweep.data, sweep.seed);
  const TrainResult swept = Train(sweep, data);

  REQUIRE(swept.candidates.size() == 2);
  // The reported winner is the candidate with the lowest validation loss.
  const CandidateResult& winner =
      swept.candidates[0].best_valid_loss <= swept.candidates[1].best_valid_loss
          ? swept.candidates[0]
          : swept.candidates[1];
  CHECK(swept.best_lr == winner.lr);
  CHECK(swept.best_valid_loss == winner.best_valid_loss);

  // Each candidate starts from an identical state, so a single-rate run
  // reproduces the winner exactly.
  ExperimentConfig solo = sweep;
  solo.lr_candidates = {winner.lr};
  const TrainResult alone = Train(solo, data);
  REQUIRE(alone.candidates.size() == 1);
  REQUIRE(alone.candidates[0].curve.size() == winner.curve.size());
  for (size_t i = 0; i < winner.curve.size(); ++i) {
    CHECK(alone.candidates[0].curve[i].train_loss ==
          winner.curve[i].train_loss);
    CHECK(alone.candidates[0].curve[i].valid_loss ==
          winner.curve[i].valid_loss);
  }
}

TEST_CASE("a diverging candidate is marked failed and the sweep recovers") {
  ExperimentConfig config = MicroConfig();
  config.lr_candidates = {1e300, 3e-3};
  const SynthDataset data = GenerateSynthData(config.data, config.seed);

  const TrainResult result = Train(config, data);
  REQUIRE(result.candidates.size() == 2);
  CHECK(result.candidates[0].failed);
  CHECK_FALSE(result.candidates[1].failed);
  CHECK(result.best_lr == 3e-3);
  CHECK(std::isfinite(result.best_valid_loss));
}

TEST_CASE("training throws when every candidate diverges") {
  ExperimentConfig config = MicroConfig();
  config.lr_candidates = {1e300};
  const SynthDataset data = GenerateSynthData(config.data, config.seed);
  CHECK_THROWS_WITH_AS(Train(config, data), doctest::Contains("diverged"),
                       std::runtime_error);
}

TEST_CASE("an all-frozen strategy leaves every parameter untouched") {
  ExperimentConfig config = MicroConfig();
  config.step_budget = 20;
  config.eval_interval = 5;
  config.strategy = FinetuneStrategy{};
  config.strategy.adaptor_trainable = false;
  config.strategy.label = "nothing";
  const SynthDataset data = GenerateSynthData(config.data, config.seed);

  const TrainResult result = Train(config, data);
  const TranslationPipeline fresh(config.pipeline, data.vocab, config.seed);
  const auto& after = result.pipeline->store()->params();
  const auto& init = fresh.store().params();
  REQUIRE(after.size() == init.size());
  for (size_t i = 0; i < after.size(); ++i) {
    CHECK(after[i].tensor.data() == init[i].tensor.data());
  }
  // With nothing changing, every validation pass sees the same model.
  const auto& curve = result.candidates[0].curve;
  REQUIRE(curve.size() == 4);
  for (const CurvePoint& p : curve) {
    CHECK(p.valid_loss == curve[0].valid_loss);
    CHECK(p.token_accuracy == curve[0].token_accuracy);
  }
}

TEST_CASE("artifacts land in the output directory and round-trip") {
  TempDir dir("s2t_train_artifacts");
  ExperimentConfig config = MicroConfig();
  config.out_dir = dir.path;
  const SynthDataset data = GenerateSynthData(config.data, config.seed);

  const TrainResult result = Train(config, data);
  REQUIRE(result.candidates.size() == 1);
  const std::string& curve_path = result.candidates[0].curve_path;
  REQUIRE(!curve_path.empty());

  // Curve file: header plus one line per recorded point.
  const std::string text = ReadFile(curve_path);
  CHECK(text.rfind("step\twall_seconds\ttrain_loss\tvalid_loss\t"
                   "token_accuracy\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') ==
        static_cast<int64_t>(result.candidates[0].curve.size()) + 1);

  // Checkpoint: metadata matches the result and the config text embeds the
  // exact experiment; weights restore into a fresh pipeline bit-exactly.
  REQUIRE(!result.checkpoint_path.empty());
  const CheckpointMeta meta = ReadCheckpointMeta(result.checkpoint_path);
  CHECK(meta.step == result.best_step);
  CHECK(meta.best_valid_loss == result.best_valid_loss);
  CHECK(meta.config_text == ToJsonText(config));

  TranslationPipeline loaded(config.pipeline, data.vocab, config.seed + 1);
  ReadCheckpoint(result.checkpoint_path, loaded.store());
  const auto& pa = result.pipeline->store()->params();
  const auto& pb = loaded.store()->params();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].tensor.data() == pb[i].tensor.data());
  }

  // Identical weights give identical evaluation results.
  const std::vector<Utterance> test = SplitUtterances(data, "test");
  const EvalResult ea = Evaluate(result.pipeline.get(), test,
                                 config.beam_size, config.max_new_tokens);
  const EvalResult eb =
      Evaluate(&loaded, test, config.beam_size, config.max_new_tokens);
  CHECK(ea.bleu == eb.bleu);
  CHECK(ea.token_accuracy == eb.token_accuracy);
}

TEST_CASE("pretraining produces stores that seed the pipeline by name") {
  ExperimentConfig config = MicroConfig();
  config.contrastive_steps = 6;
  config.denoising_steps = 6;
  const SynthDataset data = GenerateSynthData(config.data, config.seed);

  const PretrainedModels models = RunPretraining(config, data);
  REQUIRE(models.speech != nullptr);
  REQUIRE(models.text != nullptr);
  CHECK(models.speech->steps_done() == 6);
  CHECK(models.Stores().size() == 2);

  for (const ParamInfo& p : models.speech->store()->params()) {
    const bool known = p.name.rfind("encoder.", 0) == 0 ||
                       p.name.rfind("quantizer.", 0) == 0;
    CHECK(known);
  }
  for (const ParamInfo& p : models.text->store().params()) {
    const bool known = p.name.rfind("decoder.", 0) == 0 ||
                       p.name.rfind("textenc.", 0) == 0;
    CHECK(known);
  }

  // Only the matching prefixes flow into a translation pipeline.
  TranslationPipeline pipeline(config.pipeline, data.vocab, config.seed);
  int64_t encoder_params = 0;
  for (const ParamInfo& p : pipeline.store()->params()) {
    if (p.name.rfind("encoder.", 0) == 0) ++encoder_params;
  }
  const std::vector<std::string> copied =
      CopyMatchingParams(*models.speech->store(), pipeline.store());
  CHECK(static_cast<int64_t>(copied.size()) == encoder_params);
  for (const std::string& name : copied) {
    CHECK(name.rfind("encoder.", 0) == 0);
    CHECK(pipeline.store()->Get(name).data() ==
          models.speech->store()->Get(name).data());
  }

  // Zero budgets skip both phases.
  config.contrastive_steps = 0;
  config.denoising_steps = 0;
  const PretrainedModels none = RunPretraining(config, data);
  CHECK(none.speech == nullptr);
  CHECK(none.text == nullptr);
  CHECK(none.Stores().empty());
}

TEST_CASE("pretrained weights change the finetuning start point") {
  ExperimentConfig config = MicroConfig();
  config.step_budget = 5;
  config.eval_interval = 5;
  config.contrastive_steps = 4;
  config.denoising_steps = 4;
  const SynthDataset data = GenerateSynthData(config.data, config.seed);
  const PretrainedModels models = RunPretraining(config, data);

  const TrainResult with = Train(config, data, models.Stores());
  const TrainResult without = Train(config, data);
  CHECK(with.candidates[0].curve[0].valid_loss !=
        without.candidates[0].curve[0].valid_loss);
}

TEST_CASE("utterance views filter splits and pairs") {
  ExperimentConfig config = MicroConfig();
  config.data.pairs = {{"en", "de", 2, false}, {"en", "ja", 1, false}};
  const SynthDataset data = GenerateSynthData(config.data, config.seed);

  const std::vector<Utterance> train = SplitUtterances(data, "train");
  CHECK(train.size() == static_cast<size_t>(3 * config.data.train_per_unit));

  const std::vector<Utterance> de =
      PairUtterances(data, "train", config.data.pairs[0]);
  const std::vector<Utterance> ja =
      PairUtterances(data, "train", config.data.pairs[1]);
  CHECK(de.size() == static_cast<size_t>(2 * config.data.train_per_unit));
  CHECK(ja.size() == static_cast<size_t>(config.data.train_per_unit));
  for (const Utterance& utt : ja) {
    CHECK(utt.row->tgt_lang == "ja");
    CHECK(utt.row->src_lang == "en");
  }
  CHECK(PairUtterances(data, "valid", config.data.pairs[1]).size() ==
        static_cast<size_t>(config.data.valid_per_pair));
}

TEST_CASE("bilingual mode honours the requested pair") {
  ExperimentConfig config = MicroConfig();
  config.data.pairs = {{"en", "de", 1, false}, {"en", "fr", 1, false}};
  config.step_budget = 5;
  config.eval_interval = 5;
  const SynthDataset data = GenerateSynthData(config.data, config.seed);

  config.bilingual_pair = "en->fr";
  CHECK_NOTHROW(Train(config, data));

  config.bilingual_pair = "en->xx";
  CHECK_THROWS_AS(Train(config, data), std::invalid_argument);
  config.bilingual_pair = "ende";
  CHECK_THROWS_AS(Train(config, data), std::invalid_argument);
}

TEST_CASE("multilingual training reports per-language scores") {
  ExperimentConfig config = MicroConfig();
  config.mode = "multilingual";
  config.data.pairs = {{"en", "de", 1, false}, {"en", "ja", 1, false}};
  config.step_budget = 10;
  config.eval_interval = 5;
  const SynthDataset data = GenerateSynthData(config.data, config.seed);

  const TrainResult result = Train(config, data);
  const EvalResult eval =
      Evaluate(result.pipeline.get(), SplitUtterances(data, "valid"),
               /*beam=*/1, config.max_new_tokens);
  CHECK(eval.utterance_count ==
        static_cast<int64_t>(2 * config.data.valid_per_pair));
  REQUIRE(eval.per_language_bleu.size() == 2);
  CHECK(eval.per_language_bleu.count("de") == 1);
  CHECK(eval.per_language_bleu.count("ja") == 1);
  for (const auto& [lang, bleu] : eval.per_language_bleu) {
    CHECK(bleu >= 0.0);
    CHECK(bleu <= 100.0);
  }
  CHECK(eval.bleu >= 0.0);
  CHECK(eval.bleu <= 100.0);

  CHECK(CharScoredLanguages().count("ja") == 1);
  CHECK(CharScoredLanguages().count("zh") == 1);
  CHECK(CharScoredLanguages().count("de") == 0);
}

TEST_CASE("the strategy grid ablation annotates budgets and recovers from "
          "failures") {
  ExperimentConfig base = MicroConfig();
  base.step_budget = 10;
  base.eval_interval = 5;
  const SynthDataset data = GenerateSynthData(base.data, base.seed);

  const AblationReport report = RunStrategyAblation(base, data, {}, 2);
  const std::vector<StrategyGridRow> grid = PublishedStrategyGrid();
  REQUIRE(report.cells.size() == 2);
  const ReferenceArchSpec reference;
  for (size_t i = 0; i < 2; ++i) {
    CHECK(report.cells[i].label == grid[i].strategy.label);
    CHECK(report.cells[i].reference_bleu == grid[i].reference_bleu);
    CHECK_FALSE(report.cells[i].failed);
    const BudgetResult budget = CountBudget(reference, grid[i].strategy);
    CHECK(report.cells[i].budget_trainable == budget.trainable);
    CHECK(report.cells[i].budget_fraction == budget.fraction);
    CHECK(report.table.find(grid[i].strategy.label) != std::string::npos);
  }
  CHECK(report.table.find("finetuning strategies") != std::string::npos);

  ExperimentConfig bad = base;
  bad.lr_candidates = {1e300};
  const AblationReport failed = RunStrategyAblation(bad, data, {}, 1);
  REQUIRE(failed.cells.size() == 1);
  CHECK(failed.cells[0].failed);
  CHECK(!failed.cells[0].error.empty());
  CHECK(failed.table.find("FAILED") != std::string::npos);
}

TEST_CASE("the adaptor grid ablation adapts each row to the base dimensions") {
  ExperimentConfig base = MicroConfig();
  base.step_budget = 10;
  base.eval_interval = 5;
  const SynthDataset data = GenerateSynthData(base.data, base.seed);

  const AblationReport report = RunAdaptorAblation(base, data, {}, 1);
  REQUIRE(report.cells.size() == 1);
  CHECK(report.cells[0].label == "stride=2 layers=3 drop=0.0 norm=no");
  CHECK(report.cells[0].reference_bleu ==
        EnumerateAdaptorGrid()[0].reference_bleu);
  CHECK_FALSE(report.cells[0].failed);
  CHECK(report.table.find("adaptor configurations") != std::string::npos);
}

}  // namespace
}  // namespace s2t
