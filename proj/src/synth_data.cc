// synth_data.cc

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

#include "s2t/synth_data.h"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace s2t {

void SynthTaskSpec::Validate() const {
  if (vocab_size < 2) {
    throw std::invalid_argument("SynthTaskSpec: vocab_size must be >= 2");
  }
  if (pairs.empty()) {
    throw std::invalid_argument("SynthTaskSpec: at least one language pair");
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const SynthPairSpec& p : pairs) {
    if (p.src_lang.empty() || p.tgt_lang.empty()) {
      throw std::invalid_argument("SynthTaskSpec: empty language name");
    }
    if (p.multiplier < 1) {
      throw std::invalid_argument("SynthTaskSpec: multiplier must be >= 1");
    }
    if (!seen.insert({p.src_lang, p.tgt_lang}).second) {
      throw std::invalid_argument("SynthTaskSpec: duplicate pair " +
                                  p.src_lang + "->" + p.tgt_lang);
    }
  }
  if (frames_per_token < 1 || samples_per_frame < 1) {
    throw std::invalid_argument("SynthTaskSpec: frame geometry must be >= 1");
  }
  if (noise_level < 0.0) {
    throw std::invalid_argument("SynthTaskSpec: noise_level must be >= 0");
  }
  if (min_tokens < 1 || max_tokens < min_tokens) {
    throw std::invalid_argument("SynthTaskSpec: need 1 <= min_tokens <= max_tokens");
  }
  if (train_per_unit < 1 || valid_per_pair < 1 || test_per_pair < 1) {
    throw std::invalid_argument("SynthTaskSpec: split sizes must be >= 1");
  }
}

const std::vector<SynthSample>& SynthDataset::Split(
    const std::string& name) const {
  if (name == "train") return train;
  if (name == "valid") return valid;
  if (name == "test") return test;
  throw std::invalid_argument("unknown split: " + name);
}

namespace {

std::vector<std::string> TargetLanguages(const SynthTaskSpec& spec) {
  std::vector<std::string> langs;
  for (const SynthPairSpec& p : spec.pairs) {
    if (std::find(langs.begin(), langs.end(), p.tgt_lang) == langs.end()) {
      langs.push_back(p.tgt_lang);
    }
  }
  return langs;
}

std::vector<std::string> TokenNames(int64_t vocab_size) {
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(vocab_size));
  for (int64_t i = 0; i < vocab_size; ++i) {
    names.push_back("tok" + std::to_string(i));
  }
  return names;
}

}  // namespace

SynthGenerator::SynthGenerator(const SynthTaskSpec& spec, uint64_t seed)
    : spec_((spec.Validate(), spec)),
      root_(seed),
      vocab_(TargetLanguages(spec), TokenNames(spec.vocab_size)) {
  const int64_t chunk = spec_.frames_per_token * spec_.samples_per_frame;
  templates_.reserve(static_cast<size_t>(spec_.vocab_size));
  for (int64_t t = 0; t < spec_.vocab_size; ++t) {
    Rng rng = root_.Derive("template@" + std::to_string(t));
    std::vector<double> chunk_samples(static_cast<size_t>(chunk));
    for (double& s : chunk_samples) s = 0.5 * rng.Normal();
    templates_.push_back(std::move(chunk_samples));
  }

  for (const std::string& lang : TargetLanguages(spec_)) {
    Rng rng = root_.Derive("mapping@" + lang);
    const std::vector<int> perm = rng.Permutation(static_cast<int>(spec_.vocab_size));
    mappings_[lang] = std::vector<int64_t>(perm.begin(), perm.end());
  }
}

const std::vector<double>& SynthGenerator::TokenTemplate(int64_t token) const {
  if (token < 0 || token >= spec_.vocab_size) {
    throw std::out_of_range("TokenTemplate: token " + std::to_string(token));
  }
  return templates_[static_cast<size_t>(token)];
}

const std::vector<int64_t>& SynthGenerator::Mapping(
    const std::string& tgt_lang) const {
  auto it = mappings_.find(tgt_lang);
  if (it == mappings_.end()) {
    throw std::out_of_range("Mapping: unknown target language " + tgt_lang);
  }
  return it->second;
}

std::vector<int64_t> SynthGenerator::MapTokens(
    const std::vector<int64_t>& source, const SynthPairSpec& pair) const {
  const std::vector<int64_t>& perm = Mapping(pair.tgt_lang);
  std::vector<int64_t> target;
  target.reserve(source.size());
  for (int64_t s : source) {
    target.push_back(perm[static_cast<size_t>(s)]);
  }
  if (pair.reverse) {
    std::reverse(target.begin(), target.end());
  }
  return target;
}

int64_t SynthGenerator::TokenVocabId(int64_t token) const {
  return vocab_.TokenId("tok" + std::to_string(token));
}

SynthDataset SynthGenerator::Generate() const {
  SynthDataset dataset;
  dataset.vocab = vocab_;

  const auto make_samples = [&](const std::string& split,
                                const SynthPairSpec& pair, int64_t count,
                                std::vector<SynthSample>* out) {
    for (int64_t i = 0; i < count; ++i) {
      const std::string id = split + "-" + pair.src_lang + "-" + pair.tgt_lang +
                             "-" + std::to_string(i);
      Rng rng = root_.Derive("sample@" + id);
      const int64_t len =
          spec_.min_tokens +
          static_cast<int64_t>(rng.UniformInt(
              static_cast<uint64_t>(spec_.max_tokens - spec_.min_tokens + 1)));
      std::vector<int64_t> source;
      source.reserve(static_cast<size_t>(len));
      for (int64_t t = 0; t < len; ++t) {
        source.push_back(static_cast<int64_t>(
            rng.UniformInt(static_cast<uint64_t>(spec_.vocab_size))));
      }

      SynthSample sample;
      sample.waveform.reserve(static_cast<size_t>(
          len * spec_.frames_per_token * spec_.samples_per_frame));
      for (int64_t t : source) {
        const std::vector<double>& chunk = templates_[static_cast<size_t>(t)];
        sample.waveform.insert(sample.waveform.end(), chunk.begin(),
                               chunk.end());
      }
      if (spec_.noise_level > 0.0) {
        for (double& s : sample.waveform) {
          s += spec_.noise_level * rng.Normal();
        }
      }

      sample.row.id = id;
      sample.row.audio = "synth:" + id;
      sample.row.n_frames = len * spec_.frames_per_token;
      sample.row.src_lang = pair.src_lang;
      sample.row.tgt_lang = pair.tgt_lang;
      for (int64_t t : MapTokens(source, pair)) {
        sample.row.tgt_text.push_back(TokenVocabId(t));
      }
      out->push_back(std::move(sample));
    }
  };

  for (const SynthPairSpec& pair : spec_.pairs) {
    make_samples("train", pair, spec_.train_per_unit * pair.multiplier,
                 &dataset.train);
    make_samples("valid", pair, spec_.valid_per_pair, &dataset.valid);
    make_samples("test", pair, spec_.test_per_pair, &dataset.test);
  }
  return dataset;
}

SynthDataset GenerateSynthData(const SynthTaskSpec& spec, uint64_t seed) {
  return SynthGenerator(spec, seed).Generate();
}

}  // namespace s2t
