// config.cc

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

#include "s2t/config.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace s2t {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON adapters. Readers start from default-constructed objects, so absent
// keys keep their documented defaults.

void to_json(json& j, const FeatureEncoderConfig::ConvLayer& l) {
  j = json{{"out_channels", l.out_channels},
           {"kernel", l.kernel},
           {"stride", l.stride}};
}
void from_json(const json& j, FeatureEncoderConfig::ConvLayer& l) {
  l.out_channels = j.at("out_channels").get<int64_t>();
  l.kernel = j.at("kernel").get<int64_t>();
  l.stride = j.at("stride").get<int64_t>();
}

void to_json(json& j, const FeatureEncoderConfig& c) {
  j = json{{"layers", c.layers}};
}
void from_json(const json& j, FeatureEncoderConfig& c) {
  c.layers = j.value("layers", c.layers);
}

void to_json(json& j, const ContextEncoderConfig& c) {
  j = json{{"layer_count", c.layer_count},
           {"model_dim", c.model_dim},
           {"head_count", c.head_count},
           {"ffn_dim", c.ffn_dim},
           {"max_positions", c.max_positions}};
}
void from_json(const json& j, ContextEncoderConfig& c) {
  c.layer_count = j.value("layer_count", c.layer_count);
  c.model_dim = j.value("model_dim", c.model_dim);
  c.head_count = j.value("head_count", c.head_count);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.max_positions = j.value("max_positions", c.max_positions);
}

void to_json(json& j, const AdaptorConfig& c) {
  j = json{{"layer_count", c.layer_count}, {"stride", c.stride},
           {"kernel", c.kernel},           {"layer_drop", c.layer_drop},
           {"use_layer_norm", c.use_layer_norm}, {"activation", c.activation},
           {"in_dim", c.in_dim},           {"out_dim", c.out_dim}};
}
void from_json(const json& j, AdaptorConfig& c) {
  c.layer_count = j.value("layer_count", c.layer_count);
  c.stride = j.value("stride", c.stride);
  c.kernel = j.value("kernel", c.kernel);
  c.layer_drop = j.value("layer_drop", c.layer_drop);
  c.use_layer_norm = j.value("use_layer_norm", c.use_layer_norm);
  c.activation = j.value("activation", c.activation);
  c.in_dim = j.value("in_dim", c.in_dim);
  c.out_dim = j.value("out_dim", c.out_dim);
}

void to_json(json& j, const DecoderConfig& c) {
  j = json{{"layer_count", c.layer_count},
           {"model_dim", c.model_dim},
           {"head_count", c.head_count},
           {"ffn_dim", c.ffn_dim},
           {"max_positions", c.max_positions},
           {"tie_output_to_embedding", c.tie_output_to_embedding}};
}
void from_json(const json& j, DecoderConfig& c) {
  c.layer_count = j.value("layer_count", c.layer_count);
  c.model_dim = j.value("model_dim", c.model_dim);
  c.head_count = j.value("head_count", c.head_count);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.max_positions = j.value("max_positions", c.max_positions);
  c.tie_output_to_embedding =
      j.value("tie_output_to_embedding", c.tie_output_to_embedding);
}

void to_json(json& j, const PipelineConfig& c) {
  j = json{{"feature", c.feature},
           {"context", c.context},
           {"adaptor", c.adaptor},
           {"decoder", c.decoder}};
}
void from_json(const json& j, PipelineConfig& c) {
  c.feature = j.value("feature", c.feature);
  c.context = j.value("context", c.context);
  c.adaptor = j.value("adaptor", c.adaptor);
  c.decoder = j.value("decoder", c.decoder);
}

void to_json(json& j, const SynthPairSpec& p) {
  j = json{{"src_lang", p.src_lang},
           {"tgt_lang", p.tgt_lang},
           {"multiplier", p.multiplier},
           {"reverse", p.reverse}};
}
void from_json(const json& j, SynthPairSpec& p) {
  p.src_lang = j.value("src_lang", p.src_lang);
  p.tgt_lang = j.value("tgt_lang", p.tgt_lang);
  p.multiplier = j.value("multiplier", p.multiplier);
  p.reverse = j.value("reverse", p.reverse);
}

void to_json(json& j, const SynthTaskSpec& s) {
  j = json{{"vocab_size", s.vocab_size},
           {"pairs", s.pairs},
           {"frames_per_token", s.frames_per_token},
           {"samples_per_frame", s.samples_per_frame},
           {"noise_level", s.noise_level},
           {"min_tokens", s.min_tokens},
           {"max_tokens", s.max_tokens},
           {"train_per_unit", s.train_per_unit},
           {"valid_per_pair", s.valid_per_pair},
           {"test_per_pair", s.test_per_pair}};
}
void from_json(const json& j, SynthTaskSpec& s) {
  s.vocab_size = j.value("vocab_size", s.vocab_size);
  s.pairs = j.value("pairs", s.pairs);
  s.frames_per_token = j.value("frames_per_token", s.frames_per_token);
  s.samples_per_frame = j.value("samples_per_frame", s.samples_per_frame);
  s.noise_level = j.value("noise_level", s.noise_level);
  s.min_tokens = j.value("min_tokens", s.min_tokens);
  s.max_tokens = j.value("max_tokens", s.max_tokens);
  s.train_per_unit = j.value("train_per_unit", s.train_per_unit);
  s.valid_per_pair = j.value("valid_per_pair", s.valid_per_pair);
  s.test_per_pair = j.value("test_per_pair", s.test_per_pair);
}

namespace {

std::vector<std::string> RoleNames(const std::set<ParamRole>& roles) {
  std::vector<std::string> names;
  for (ParamRole r : roles) names.push_back(RoleName(r));
  return names;
}

std::set<ParamRole> RolesFromNames(const std::vector<std::string>& names) {
  std::set<ParamRole> roles;
  for (const std::string& n : names) roles.insert(RoleFromName(n));
  return roles;
}

}  // namespace

void to_json(json& j, const FinetuneStrategy& s) {
  j = json{{"encoder_roles", RoleNames(s.encoder_roles)},
           {"encoder_all", s.encoder_all},
           {"decoder_roles", RoleNames(s.decoder_roles)},
           {"decoder_all", s.decoder_all},
           {"decoder_from_scratch", s.decoder_from_scratch},
           {"adaptor_trainable", s.adaptor_trainable},
           {"label", s.label}};
}
void from_json(const json& j, FinetuneStrategy& s) {
  s.encoder_roles =
      RolesFromNames(j.value("encoder_roles", RoleNames(s.encoder_roles)));
  s.encoder_all = j.value("encoder_all", s.encoder_all);
  s.decoder_roles =
      RolesFromNames(j.value("decoder_roles", RoleNames(s.decoder_roles)));
  s.decoder_all = j.value("decoder_all", s.decoder_all);
  s.decoder_from_scratch =
      j.value("decoder_from_scratch", s.decoder_from_scratch);
  s.adaptor_trainable = j.value("adaptor_trainable", s.adaptor_trainable);
  s.label = j.value("label", s.label);
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"pipeline", c.pipeline},
           {"data", c.data},
           {"strategy", c.strategy},
           {"mode", c.mode},
           {"bilingual_pair", c.bilingual_pair},
           {"lr_candidates", c.lr_candidates},
           {"batch_size", c.batch_size},
           {"step_budget", c.step_budget},
           {"warmup_steps", c.warmup_steps},
           {"eval_interval", c.eval_interval},
           {"valid_cap", c.valid_cap},
           {"label_smoothing", c.label_smoothing},
           {"beam_size", c.beam_size},
           {"max_new_tokens", c.max_new_tokens},
           {"seed", c.seed},
           {"out_dir", c.out_dir},
           {"contrastive_steps", c.contrastive_steps},
           {"denoising_steps", c.denoising_steps},
           {"contrastive_lr", c.contrastive_lr},
           {"denoising_lr", c.denoising_lr}};
}
void from_json(const json& j, ExperimentConfig& c) {
  c.pipeline = j.value("pipeline", c.pipeline);
  c.data = j.value("data", c.data);
  c.strategy = j.value("strategy", c.strategy);
  c.mode = j.value("mode", c.mode);
  c.bilingual_pair = j.value("bilingual_pair", c.bilingual_pair);
  c.lr_candidates = j.value("lr_candidates", c.lr_candidates);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.step_budget = j.value("step_budget", c.step_budget);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  c.eval_interval = j.value("eval_interval", c.eval_interval);
  c.valid_cap = j.value("valid_cap", c.valid_cap);
  c.label_smoothing = j.value("label_smoothing", c.label_smoothing);
  c.beam_size = j.value("beam_size", c.beam_size);
  c.max_new_tokens = j.value("max_new_tokens", c.max_new_tokens);
  c.seed = j.value("seed", c.seed);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.contrastive_steps = j.value("contrastive_steps", c.contrastive_steps);
  c.denoising_steps = j.value("denoising_steps", c.denoising_steps);
  c.contrastive_lr = j.value("contrastive_lr", c.contrastive_lr);
  c.denoising_lr = j.value("denoising_lr", c.denoising_lr);
}

// ---------------------------------------------------------------------------

ExperimentConfig::ExperimentConfig()
    : strategy(PublishedStrategyGrid()[3].strategy) {}

void ExperimentConfig::Validate() const {
  pipeline.Validate();
  data.Validate();
  if (mode != "bilingual" && mode != "multilingual") {
    throw std::invalid_argument("ExperimentConfig: mode must be 'bilingual' or "
                                "'multilingual', got '" + mode + "'");
  }
  if (lr_candidates.empty()) {
    throw std::invalid_argument("ExperimentConfig: lr_candidates is empty");
  }
  for (double lr : lr_candidates) {
    if (!(lr > 0.0)) {
      throw std::invalid_argument("ExperimentConfig: learning rates must be positive");
    }
  }
  if (batch_size < 1 || step_budget < 1 || eval_interval < 1 || valid_cap < 1) {
    throw std::invalid_argument("ExperimentConfig: sizes and budgets must be >= 1");
  }
  if (warmup_steps < 0) {
    throw std::invalid_argument("ExperimentConfig: warmup_steps must be >= 0");
  }
  if (label_smoothing < 0.0 || label_smoothing >= 1.0) {
    throw std::invalid_argument("ExperimentConfig: label_smoothing must be in [0, 1)");
  }
  if (beam_size < 1 || max_new_tokens < 1) {
    throw std::invalid_argument("ExperimentConfig: beam_size and max_new_tokens must be >= 1");
  }
  if (contrastive_steps < 0 || denoising_steps < 0) {
    throw std::invalid_argument("ExperimentConfig: pretraining budgets must be >= 0");
  }
}

ExperimentConfig DefaultToyConfig() {
  ExperimentConfig c;
  c.pipeline.feature.layers = {{24, 8, 4}, {32, 4, 2}, {48, 4, 2}};
  c.pipeline.context.layer_count = 2;
  c.pipeline.context.model_dim = 48;
  c.pipeline.context.head_count = 4;
  c.pipeline.context.ffn_dim = 96;
  c.pipeline.context.max_positions = 256;
  c.pipeline.adaptor.layer_count = 3;
  c.pipeline.adaptor.stride = 2;
  c.pipeline.adaptor.kernel = 3;
  c.pipeline.adaptor.layer_drop = 0.0;
  c.pipeline.adaptor.in_dim = 48;
  c.pipeline.adaptor.out_dim = 48;
  c.pipeline.decoder.layer_count = 2;
  c.pipeline.decoder.model_dim = 48;
  c.pipeline.decoder.head_count = 4;
  c.pipeline.decoder.ffn_dim = 96;
  c.pipeline.decoder.max_positions = 64;

  // The restricted strategies cross their accuracy transition between steps
  // ~900 and ~1300 on this task; 1600 leaves margin at both sweep points.
  c.step_budget = 1600;

  c.data.vocab_size = 32;
  c.data.pairs = {{"en", "de", 1, false}};
  c.data.frames_per_token = 16;
  c.data.samples_per_frame = 16;
  c.data.noise_level = 0.05;
  c.data.min_tokens = 3;
  c.data.max_tokens = 6;
  c.data.train_per_unit = 2000;
  c.data.valid_per_pair = 64;
  c.data.test_per_pair = 64;
  return c;
}

std::string ToJsonText(const ExperimentConfig& config) {
  json j = config;
  return j.dump(2) + "\n";
}

ExperimentConfig FromJsonText(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config is not valid JSON: ") +
                             e.what());
  }
  ExperimentConfig config = j.get<ExperimentConfig>();
  config.Validate();
  return config;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return FromJsonText(buffer.str());
  } catch (const std::exception& e) {
    throw std::runtime_error("config " + path + ": " + e.what());
  }
}

void SaveExperimentConfig(const std::string& path,
                          const ExperimentConfig& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config: " + path);
  out << ToJsonText(config);
  if (!out) throw std::runtime_error("write failed for config: " + path);
}

}  // namespace s2t
