// test_cli.cc

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
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "s2t/config.h"
#include "s2t/manifest.h"
#include "s2t/wav.h"

namespace s2t {
namespace {

// Invokes the command line entry point in-process, capturing both streams.
int RunCli(const std::vector<std::string>& args, std::string* out = nullptr,
           std::string* err = nullptr) {
  std::vector<std::string> full = {"s2t"};
  full.insert(full.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : full) argv.push_back(s.data());

  std::ostringstream captured_out, captured_err;
  std::streambuf* old_out = std::cout.rdbuf(captured_out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(captured_err.rdbuf());
  const int code = CliMain(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  if (out != nullptr) *out = captured_out.str();
  if (err != nullptr) *err = captured_err.str();
  return code;
}

// A scratch directory that removes itself.
struct TempDir {
  std::string path;
  explicit TempDir(const std::string& name)
      : path((std::filesystem::temp_directory_path() / name).string()) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

// Writes a micro experiment config and returns its path.
std::string WriteMicroConfig(const std::string& dir) {
  ExperimentConfig c;
  c.pipeline.feature.layers = {{16, 4, 2}, {24, 4, 2}};
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
  c.data.frames_per_token = 4;
  c.data.samples_per_frame = 4;
  c.data.min_tokens = 2;
  c.data.max_tokens = 4;
  c.data.train_per_unit = 24;
  c.data.valid_per_pair = 8;
  c.data.test_per_pair = 6;
  c.lr_candidates = {3e-3};
  c.batch_size = 4;
  c.step_budget = 10;
  c.warmup_steps = 2;
  c.eval_interval = 5;
  c.valid_cap = 8;
  c.beam_size = 2;
  c.max_new_tokens = 8;
  c.contrastive_steps = 2;
  c.denoising_steps = 2;
  c.out_dir.clear();
  c.seed = 9;
  const std::string path = dir + "/micro.json";
  SaveExperimentConfig(path, c);
  return path;
}

TEST_CASE("missing or unknown subcommands fail with a diagnostic") {
  std::string err;
  CHECK(RunCli({}, nullptr, &err) != 0);
  CHECK(RunCli({"frobnicate"}, nullptr, &err) != 0);
  CHECK(RunCli({"--help"}) == 0);
}

TEST_CASE("count-params prints the full budget table by default") {
  std::string out;
  CHECK(RunCli({"count-params"}, &out) == 0);
  CHECK(out.find("enc:ln / dec:ln") != std::string::npos);
  CHECK(out.find("enc:ln+self_attn / dec:ln+enc_attn+self_attn") !=
        std::string::npos);
  CHECK(out.find("100.0") != std::string::npos);  // the enc:all / dec:all row
}

TEST_CASE("count-params resolves the best row by name") {
  std::string out;
  CHECK(RunCli({"count-params", "--strategy", "best"}, &out) == 0);
  CHECK(out.find("enc:ln+self_attn / dec:ln+enc_attn+self_attn") !=
        std::string::npos);
  CHECK(out.find("21.5") != std::string::npos);

  std::string err;
  CHECK(RunCli({"count-params", "--strategy", "nope"}, nullptr, &err) == 1);
  CHECK(err.find("nope") != std::string::npos);
}

TEST_CASE("grad-check reports every layer family and succeeds") {
  std::string out;
  CHECK(RunCli({"grad-check"}, &out) == 0);
  for (const char* layer : {"conv1d", "attention", "layer_norm", "embedding",
                            "feed_forward", "label_smoothed_ce"}) {
    CHECK(out.find(layer) != std::string::npos);
  }
  CHECK(out.find("FAIL") == std::string::npos);
}

TEST_CASE("train fails cleanly when the config file is missing") {
  std::string err;
  CHECK(RunCli({"train", "--config", "/nonexistent/cfg.json"}, nullptr,
               &err) == 1);
  CHECK(err.find("/nonexistent/cfg.json") != std::string::npos);
}

TEST_CASE("synth-data exports a loadable corpus") {
  TempDir dir("s2t_cli_synth");
  const std::string config_path = WriteMicroConfig(dir.path);
  const std::string out_dir = dir.path + "/corpus";

  std::string out;
  CHECK(RunCli({"synth-data", "--config", config_path, "--out", out_dir},
               &out) == 0);
  CHECK(out.find("24 train / 8 valid / 6 test") != std::string::npos);

  const LoadedManifest manifest = LoadManifest(out_dir + "/train.tsv");
  CHECK(manifest.rows.size() == 24);
  const ManifestRow& row = manifest.rows.front();
  const std::vector<double> wave = ReadWav(out_dir + "/" + row.audio);
  CHECK(static_cast<int64_t>(wave.size()) == row.n_frames * 4);
  CHECK(std::filesystem::exists(out_dir + "/vocab.txt"));
  CHECK(std::filesystem::exists(out_dir + "/valid.tsv"));
  CHECK(std::filesystem::exists(out_dir + "/test.tsv"));
}

TEST_CASE("train then eval round-trips through the checkpoint") {
  TempDir dir("s2t_cli_train");
  const std::string config_path = WriteMicroConfig(dir.path);
  const std::string out_dir = dir.path + "/run";

  std::string out;
  CHECK(RunCli({"train", "--config", config_path, "--out", out_dir}, &out) ==
        0);
  CHECK(out.find("best learning rate") != std::string::npos);
  CHECK(out.find("test: bleu=") != std::string::npos);
  CHECK(std::filesystem::exists(out_dir + "/best.ckpt"));

  std::string eval_out;
  CHECK(RunCli({"eval", "--config", config_path, "--checkpoint",
                out_dir + "/best.ckpt", "--split", "valid", "--beam", "1"},
               &eval_out) == 0);
  CHECK(eval_out.find("valid: bleu=") != std::string::npos);
  CHECK(eval_out.find("utterances=8") != std::string::npos);
}

TEST_CASE("ablate runs a truncated adaptor grid and writes the table") {
  TempDir dir("s2t_cli_ablate");
  const std::string config_path = WriteMicroConfig(dir.path);
  const std::string out_dir = dir.path + "/tables";

  std::string out;
  CHECK(RunCli({"ablate", "--grid", "adaptor", "--max-cells", "1", "--config",
                config_path, "--out", out_dir},
               &out) == 0);
  CHECK(out.find("adaptor configurations") != std::string::npos);
  CHECK(out.find("stride=2 layers=3 drop=0.0 norm=no") != std::string::npos);
  CHECK(std::filesystem::exists(out_dir + "/adaptor_ablation.txt"));

  std::string err;
  CHECK(RunCli({"ablate", "--grid", "bogus", "--config", config_path}, nullptr,
               &err) == 1);
  CHECK(err.find("bogus") != std::string::npos);
}

}  // namespace
}  // namespace s2t
