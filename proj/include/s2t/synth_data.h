// s2t/synth_data.h

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

#ifndef S2T_SYNTH_DATA_H_
#define S2T_SYNTH_DATA_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "s2t/manifest.h"
#include "s2t/rng.h"
#include "s2t/vocab.h"

namespace s2t {

// Synthetic speech-translation task: every source token owns a fixed random
// waveform template; an utterance is the concatenation of its tokens'
// templates plus Gaussian noise; the target is a per-target-language
// permutation of the source tokens, optionally emitted in reverse order.
// The task keeps the structural challenges of real data (audio much longer
// than text, multilinguality, resource imbalance) while staying fully
// checkable.

struct SynthPairSpec {
  std::string src_lang = "en";
  std::string tgt_lang = "de";
  int64_t multiplier = 1;  // relative share of training data
  bool reverse = false;    // target sequence order is reversed
};

struct SynthTaskSpec {
  int64_t vocab_size = 32;
  std::vector<SynthPairSpec> pairs = {{"en", "de", 1, false}};
  int64_t frames_per_token = 16;   // nominal feature frames per token
  int64_t samples_per_frame = 16;  // waveform samples per nominal frame
  double noise_level = 0.05;       // stddev of additive Gaussian noise
  int64_t min_tokens = 3;
  int64_t max_tokens = 6;
  int64_t train_per_unit = 250;  // training samples per multiplier unit
  int64_t valid_per_pair = 32;
  int64_t test_per_pair = 32;

  void Validate() const;  // throws std::invalid_argument
};

struct SynthSample {
  ManifestRow row;
  std::vector<double> waveform;
};

struct SynthDataset {
  Vocabulary vocab;
  std::vector<SynthSample> train, valid, test;

  const std::vector<SynthSample>& Split(const std::string& name) const;
};

class SynthGenerator {
 public:
  SynthGenerator(const SynthTaskSpec& spec, uint64_t seed);

  const SynthTaskSpec& spec() const { return spec_; }
  const Vocabulary& vocab() const { return vocab_; }

  // Waveform chunk of one source token (frames_per_token * samples_per_frame
  // samples), fixed for the lifetime of the generator seed.
  const std::vector<double>& TokenTemplate(int64_t token) const;

  // The target-language permutation over source token indices (a bijection
  // on [0, vocab_size)).
  const std::vector<int64_t>& Mapping(const std::string& tgt_lang) const;

  // Applies a pair's mapping to source token indices (permutation, then
  // optional reversal); returns target token indices.
  std::vector<int64_t> MapTokens(const std::vector<int64_t>& source,
                                 const SynthPairSpec& pair) const;

  // Vocabulary id of source/target token index `token`.
  int64_t TokenVocabId(int64_t token) const;

  // Generates all three splits deterministically from the seed; the splits
  // draw from derived, independent random streams.
  SynthDataset Generate() const;

 private:
  SynthTaskSpec spec_;
  Rng root_;
  Vocabulary vocab_;
  std::vector<std::vector<double>> templates_;
  std::map<std::string, std::vector<int64_t>> mappings_;
};

// Convenience wrapper: build a generator and run it.
SynthDataset GenerateSynthData(const SynthTaskSpec& spec, uint64_t seed);

}  // namespace s2t

#endif  // S2T_SYNTH_DATA_H_
