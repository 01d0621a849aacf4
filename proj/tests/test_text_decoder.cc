// tests/test_text_decoder.cc

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

#include "s2t/text_decoder.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"

namespace s2t {
namespace {

Vocabulary TinyVocab() {
  return Vocabulary({"en", "de"}, {"alpha", "beta", "gamma", "delta"});
}

std::string TempPath(const std::string& name) {
  return "/tmp/s2t_test_" + name;
}

TEST_CASE("vocabulary lays out reserved entries, tags, then tokens") {
  Vocabulary vocab = TinyVocab();
  CHECK(vocab.size() == 10);
  CHECK(vocab.TokenText(Vocabulary::kPad) == "<pad>");
  CHECK(vocab.TokenText(Vocabulary::kBos) == "<s>");
  CHECK(vocab.TokenText(Vocabulary::kEos) == "</s>");
  CHECK(vocab.TokenText(Vocabulary::kMask) == "<mask>");
  CHECK(vocab.LanguageTag("en") == 4);
  CHECK(vocab.LanguageTag("de") == 5);
  CHECK(vocab.TagLanguage(5) == "de");
  CHECK(vocab.IsLanguageTag(4));
  CHECK(vocab.IsLanguageTag(5));
  CHECK_FALSE(vocab.IsLanguageTag(3));
  CHECK_FALSE(vocab.IsLanguageTag(6));
  CHECK(vocab.TokenId("alpha") == 6);
  CHECK(vocab.TokenId("delta") == 9);
  CHECK(vocab.language_count() == 2);
  CHECK_THROWS_AS(vocab.LanguageTag("fr"), std::invalid_argument);
  CHECK_THROWS_AS(vocab.TokenId("epsilon"), std::invalid_argument);
  CHECK_THROWS_AS(vocab.TokenText(10), std::invalid_argument);
  CHECK_THROWS_AS(Vocabulary({"en"}, {"dup", "dup"}), std::invalid_argument);
}

TEST_CASE("vocabulary survives a save/load round trip") {
  Vocabulary vocab = TinyVocab();
  const std::string path = TempPath("vocab_roundtrip.txt");
  vocab.Save(path);
  Vocabulary loaded = Vocabulary::Load(path);
  CHECK(loaded == vocab);
  CHECK(loaded.languages() == std::vector<std::string>{"en", "de"});
  std::remove(path.c_str());
}

TEST_CASE("vocabulary load reports malformed files with line numbers") {
  const std::string path = TempPath("vocab_bad.txt");
  auto write = [&](const std::string& body) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    REQUIRE(f != nullptr);
    std::fputs(body.c_str(), f);
    std::fclose(f);
  };
  write("<pad>\n<s>\n<mask>\n</s>\nword\n");
  CHECK_THROWS_WITH_AS(Vocabulary::Load(path),
                       doctest::Contains("line 3"), std::runtime_error);
  write("<pad>\n<s>\n</s>\n<mask>\nword\n<lang:en>\n");
  CHECK_THROWS_WITH_AS(Vocabulary::Load(path),
                       doctest::Contains("line 6"), std::runtime_error);
  write("<pad>\n<s>\n");
  CHECK_THROWS_AS(Vocabulary::Load(path), std::runtime_error);
  CHECK_THROWS_AS(Vocabulary::Load(TempPath("missing_vocab.txt")),
                  std::runtime_error);
  std::remove(path.c_str());
}

DecoderConfig SmallDecoder(int64_t layers = 2) {
  DecoderConfig config;
  config.layer_count = layers;
  config.model_dim = 16;
  config.head_count = 4;
  config.ffn_dim = 32;
  config.max_positions = 64;
  return config;
}

TEST_CASE("decoder config validation") {
  CHECK_NOTHROW(SmallDecoder().Validate());
  DecoderConfig bad = SmallDecoder();
  bad.head_count = 3;  // 16 % 3 != 0
  CHECK_THROWS_AS(bad.Validate(), std::invalid_argument);
  bad = SmallDecoder();
  bad.layer_count = -1;
  CHECK_THROWS_AS(bad.Validate(), std::invalid_argument);
}

TEST_CASE("zero-layer tied decoder scores by embedding similarity") {
  Vocabulary vocab = TinyVocab();
  ParamStore store;
  Rng rng(3);
  TextDecoder decoder(&store, SmallDecoder(0), &vocab, &rng);
  const std::vector<int64_t> prefix{vocab.LanguageTag("en"),
                                    vocab.TokenId("alpha"),
                                    vocab.TokenId("beta")};
  Tensor logits = decoder.DecodeForward(prefix);
  REQUIRE(logits.dim(0) == 3);
  REQUIRE(logits.dim(1) == vocab.size());
  const Tensor table = store.Get("decoder.embed.table");
  const int64_t d = decoder.config().model_dim;
  for (int64_t row = 0; row < 3; ++row) {
    for (int64_t v = 0; v < vocab.size(); ++v) {
      double dot = 0.0;
      for (int64_t j = 0; j < d; ++j) {
        dot += table.data()[static_cast<size_t>(prefix[row] * d + j)] *
               table.data()[static_cast<size_t>(v * d + j)];
      }
      CHECK(logits.at({row, v}) == doctest::Approx(dot).epsilon(1e-12));
    }
  }
}

TEST_CASE("future prefix edits never change past logits") {
  Vocabulary vocab = TinyVocab();
  ParamStore store;
  Rng rng(4);
  TextDecoder decoder(&store, SmallDecoder(2), &vocab, &rng);
  Rng mem_rng(5);
  Tensor memory = Tensor::Randn({4, 16}, &mem_rng);
  std::vector<int64_t> a{vocab.LanguageTag("de"), 6, 7, 8};
  std::vector<int64_t> b{vocab.LanguageTag("de"), 6, 7, 9};
  Tensor la = decoder.DecodeForward(a, memory);
  Tensor lb = decoder.DecodeForward(b, memory);
  for (int64_t row = 0; row < 3; ++row) {
    for (int64_t v = 0; v < vocab.size(); ++v) {
      CHECK(la.at({row, v}) == lb.at({row, v}));  // bit-exact causality
    }
  }
}

TEST_CASE("cross-attention carries gradient back to the memory") {
  Vocabulary vocab = TinyVocab();
  ParamStore store;
  Rng rng(6);
  TextDecoder decoder(&store, SmallDecoder(2), &vocab, &rng);
  Tensor memory = Tensor::Randn({5, 16}, &rng, 1.0, /*requires_grad=*/true);
  Tensor logits =
      decoder.DecodeForward({vocab.LanguageTag("en"), 6, 7}, memory);
  Sum(Mul(logits, logits)).Backward();
  double norm = 0.0;
  for (double g : memory.grad()) norm += g * g;
  CHECK(norm > 0.0);
}

TEST_CASE("decode rejects malformed prefixes") {
  Vocabulary vocab = TinyVocab();
  ParamStore store;
  Rng rng(7);
  TextDecoder decoder(&store, SmallDecoder(1), &vocab, &rng);
  CHECK_THROWS_AS(decoder.DecodeForward({}), std::invalid_argument);
  // First token must be a language tag.
  CHECK_THROWS_WITH_AS(decoder.DecodeForward({6, 7}),
                       doctest::Contains("language tag"),
                       std::invalid_argument);
  CHECK_THROWS_AS(decoder.DecodeForward({vocab.LanguageTag("en"), 99}),
                  std::invalid_argument);
  std::vector<int64_t> too_long(65, 6);
  too_long[0] = vocab.LanguageTag("en");
  CHECK_THROWS_AS(decoder.DecodeForward(too_long), std::invalid_argument);
  // Language-model mode works without memory and matches shapes.
  Tensor lm = decoder.DecodeForward({vocab.LanguageTag("en"), 6});
  CHECK(lm.dim(0) == 2);
  CHECK(lm.dim(1) == vocab.size());
}

TEST_CASE("label-smoothed cross entropy identities") {
  // Uniform prediction costs ln V for every smoothing strength.
  Tensor uniform = Tensor::Zeros({2, 7});
  for (double eps : {0.0, 0.3}) {
    Tensor loss = LabelSmoothedCe(uniform, {1, 4}, eps, -1);
    CHECK(loss.item() == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  }
  // eps = 0 reduces to plain cross entropy.
  Rng rng(8);
  Tensor logits = Tensor::Randn({3, 5}, &rng);
  Tensor plain = SoftmaxCrossEntropy(logits, {0, 2, 4});
  Tensor wrapped = LabelSmoothedCe(logits, {0, 2, 4}, 0.0, -1);
  CHECK(wrapped.item() == doctest::Approx(plain.item()).epsilon(1e-12));
  // Saturated correct prediction at logit gap 20 with eps=0.3, V=32.
  const int64_t v = 32;
  const double gap = 20.0;
  std::vector<double> row(static_cast<size_t>(v), 0.0);
  row[0] = gap;
  Tensor sat = Tensor::FromData({1, v}, row);
  const double lse =
      gap + std::log(1.0 + (static_cast<double>(v) - 1) * std::exp(-gap));
  const double expected =
      0.7 * (lse - gap) + 0.3 * (lse - gap / static_cast<double>(v));
  Tensor loss = LabelSmoothedCe(sat, {0}, 0.3, -1);
  CHECK(loss.item() == doctest::Approx(expected).epsilon(1e-9));
  // Padding rows are excluded from the mean.
  Tensor two = Tensor::FromData({2, 3}, {1.0, 2.0, 3.0, 9.0, 9.0, 9.0});
  Tensor with_pad = LabelSmoothedCe(
      two, {1, static_cast<int>(Vocabulary::kPad)}, 0.3, Vocabulary::kPad);
  Tensor only_first = LabelSmoothedCe(SliceRows(two, 0, 1), {1}, 0.3, -1);
  CHECK(with_pad.item() == doctest::Approx(only_first.item()).epsilon(1e-12));
}

TEST_CASE("identity noise settings return the input unchanged") {
  NoiseConfig noise;
  noise.mask_ratio = 0.0;
  noise.permute_sentences = false;
  Rng rng(9);
  const std::vector<int64_t> x{6, 7, 8, 9, 6, 7};
  CHECK(ApplyNoise(x, noise, &rng) == x);
  CHECK_THROWS_AS(ApplyNoise({}, noise, &rng), std::invalid_argument);
}

TEST_CASE("full masking collapses the sequence to mask tokens") {
  NoiseConfig noise;
  noise.mask_ratio = 1.0;
  Rng rng(10);
  const std::vector<int64_t> x(40, 6);
  const std::vector<int64_t> out = ApplyNoise(x, noise, &rng);
  CHECK(!out.empty());
  CHECK(out.size() <= x.size());
  for (int64_t token : out) CHECK(token == noise.mask_id);
}

TEST_CASE("masked fraction concentrates on the configured ratio") {
  NoiseConfig noise;
  noise.mask_ratio = 0.35;
  noise.span_lambda = 3.5;
  const size_t n = 10000;
  std::vector<int64_t> x(n, 6);
  Rng rng(11);
  const std::vector<int64_t> out = ApplyNoise(x, noise, &rng);
  size_t kept = 0;
  for (int64_t token : out) {
    if (token != noise.mask_id) ++kept;
  }
  const double masked_fraction =
      1.0 - static_cast<double>(kept) / static_cast<double>(n);
  CHECK(std::abs(masked_fraction - 0.35) < 0.02);
  // Seeded reproducibility.
  Rng replay(11);
  CHECK(ApplyNoise(x, noise, &replay) == out);
}

TEST_CASE("sentence permutation reorders units and preserves tokens") {
  NoiseConfig noise;
  noise.mask_ratio = 0.0;
  noise.permute_sentences = true;
  const int64_t sep = noise.separator_id;
  const std::vector<int64_t> x{6, 6, sep, 7, sep, 8, 8, 8, sep, 9};
  const std::vector<std::vector<int64_t>> units{
      {6, 6, sep}, {7, sep}, {8, 8, 8, sep}, {9}};
  // Every reachable output is the concatenation of some unit ordering.
  std::set<std::vector<int64_t>> reachable;
  std::vector<size_t> order{0, 1, 2, 3};
  do {
    std::vector<int64_t> cat;
    for (size_t u : order) {
      cat.insert(cat.end(), units[u].begin(), units[u].end());
    }
    reachable.insert(std::move(cat));
  } while (std::next_permutation(order.begin(), order.end()));
  bool saw_reorder = false;
  for (uint64_t seed = 0; seed < 6; ++seed) {
    Rng rng(seed);
    const std::vector<int64_t> out = ApplyNoise(x, noise, &rng);
    REQUIRE(out.size() == x.size());
    CHECK(reachable.count(out) == 1);
    if (out != x) saw_reorder = true;
  }
  CHECK(saw_reorder);
}

std::vector<std::vector<int64_t>> MonolingualCorpus(const Vocabulary& vocab,
                                                    int sentences,
                                                    int length, Rng* rng) {
  std::vector<std::vector<int64_t>> corpus;
  const int64_t tag = vocab.LanguageTag("en");
  const int64_t first_regular = 4 + vocab.language_count();
  const int64_t regular = vocab.size() - first_regular;
  for (int s = 0; s < sentences; ++s) {
    std::vector<int64_t> sample{tag};
    for (int i = 0; i < length; ++i) {
      sample.push_back(first_regular +
                       static_cast<int64_t>(rng->UniformInt(
                           static_cast<uint64_t>(regular))));
    }
    corpus.push_back(std::move(sample));
  }
  return corpus;
}

Vocabulary WideVocab() {
  std::vector<std::string> tokens;
  for (int i = 0; i < 20; ++i) tokens.push_back("tok" + std::to_string(i));
  return Vocabulary({"en"}, tokens);
}

TEST_CASE("untrained depth-zero model predicts near-uniformly") {
  Vocabulary vocab = WideVocab();
  DenoisingPretrainConfig config;
  config.decoder = SmallDecoder(0);
  config.text_encoder_layers = 0;
  config.noise.mask_ratio = 0.0;
  DenoisingPretrainer trainer(config, vocab, 12);
  Rng data_rng(13);
  auto corpus = MonolingualCorpus(vocab, 2, 6, &data_rng);
  Rng noise_rng(14);
  NoGradGuard guard;
  const double loss = trainer.Loss(corpus, &noise_rng).item();
  CHECK(std::abs(loss - std::log(static_cast<double>(vocab.size()))) < 0.1);
}

TEST_CASE("denoising loss is invariant to batch order") {
  Vocabulary vocab = WideVocab();
  DenoisingPretrainConfig config;
  config.decoder = SmallDecoder(1);
  config.text_encoder_layers = 1;
  config.noise.mask_ratio = 0.0;  // keep the rng out of the comparison
  DenoisingPretrainer trainer(config, vocab, 15);
  Rng data_rng(16);
  auto corpus = MonolingualCorpus(vocab, 3, 5, &data_rng);
  Rng noise_a(1), noise_b(1);
  NoGradGuard guard;
  const double forward = trainer.Loss(corpus, &noise_a).item();
  std::reverse(corpus.begin(), corpus.end());
  const double backward = trainer.Loss(corpus, &noise_b).item();
  CHECK(forward == doctest::Approx(backward).epsilon(1e-12));
}

TEST_CASE("denoising pretraining decreases the smoothed loss") {
  Vocabulary vocab = WideVocab();
  DenoisingPretrainConfig config;
  config.decoder = SmallDecoder(2);
  config.decoder.model_dim = 32;
  config.decoder.ffn_dim = 64;
  config.text_encoder_layers = 2;
  config.noise.mask_ratio = 0.35;
  config.noise.span_lambda = 3.5;
  config.learning_rate = 1e-3;
  DenoisingPretrainer trainer(config, vocab, 17);
  Rng data_rng(18);
  auto corpus = MonolingualCorpus(vocab, 6, 8, &data_rng);
  std::vector<double> losses;
  for (int step = 0; step < 300; ++step) {
    std::vector<std::vector<int64_t>> batch{corpus[(2 * step) % 6],
                                            corpus[(2 * step + 1) % 6]};
    losses.push_back(trainer.Step(batch));
  }
  auto mean_of = [&](size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) s += losses[i];
    return s / static_cast<double>(hi - lo);
  };
  CHECK(mean_of(losses.size() - 20, losses.size()) < mean_of(0, 20));
}

TEST_CASE("a single clean sample can be memorized to near-zero loss") {
  Vocabulary vocab = WideVocab();
  DenoisingPretrainConfig config;
  config.decoder = SmallDecoder(1);
  config.decoder.model_dim = 32;
  config.decoder.ffn_dim = 64;
  config.text_encoder_layers = 1;
  config.noise.mask_ratio = 0.0;  // identity corruption
  config.learning_rate = 3e-3;
  DenoisingPretrainer trainer(config, vocab, 19);
  const std::vector<std::vector<int64_t>> batch{
      {vocab.LanguageTag("en"), 6, 9, 7, 10, 8}};
  double loss = 0.0;
  for (int step = 0; step < 250; ++step) loss = trainer.Step(batch);
  CHECK(loss < 0.1);
}

TEST_CASE("denoising runs are bit-identical under the same seed") {
  Vocabulary vocab = WideVocab();
  DenoisingPretrainConfig config;
  config.decoder = SmallDecoder(1);
  config.text_encoder_layers = 1;
  DenoisingPretrainer a(config, vocab, 77), b(config, vocab, 77);
  Rng data_rng(20);
  auto corpus = MonolingualCorpus(vocab, 2, 6, &data_rng);
  for (int step = 0; step < 5; ++step) {
    CHECK(a.Step(corpus) == b.Step(corpus));
  }
}

// Hand-built next-token table over the vocabulary {0: eos, 1: a, 2: b}.
// Greedy follows `a` (0.549) but the best full sequence starts with `b`.
std::vector<double> ToyScores(const std::vector<int64_t>& prefix) {
  auto logs = [](std::initializer_list<double> ps) {
    std::vector<double> out;
    for (double p : ps) out.push_back(std::log(p));
    return out;
  };
  if (prefix.size() == 1) return logs({0.001, 0.549, 0.45});
  if (prefix.size() == 2 && prefix[1] == 1) return logs({0.34, 0.33, 0.33});
  if (prefix.size() == 2 && prefix[1] == 2) return logs({0.9, 0.05, 0.05});
  return logs({1.0 / 3, 1.0 / 3, 1.0 / 3});
}

TEST_CASE("beam search at width two recovers the sequence greedy misses") {
  const std::vector<int64_t> start{7};  // arbitrary fixed prompt token
  auto beam1 = BeamSearch(ToyScores, start, /*eos=*/0, 1, 6);
  REQUIRE(!beam1.empty());
  CHECK(beam1.front().tokens == std::vector<int64_t>{1, 0});
  CHECK(beam1.front().finished);
  auto beam2 = BeamSearch(ToyScores, start, 0, 2, 6);
  REQUIRE(!beam2.empty());
  CHECK(beam2.front().tokens == std::vector<int64_t>{2, 0});
  CHECK(beam2.front().finished);
  CHECK(beam2.front().score ==
        doctest::Approx(std::log(0.45) + std::log(0.9)).epsilon(1e-12));
  CHECK(NormalizedScore(beam2.front()) > NormalizedScore(beam1.front()));
  // Scores are the sums of the per-step log-probabilities of the tokens.
  for (const Hypothesis& hyp : beam2) {
    double replay = 0.0;
    std::vector<int64_t> prefix = start;
    for (int64_t token : hyp.tokens) {
      replay += ToyScores(prefix)[static_cast<size_t>(token)];
      prefix.push_back(token);
    }
    CHECK(hyp.score == doctest::Approx(replay).epsilon(1e-12));
    if (hyp.finished) CHECK(hyp.tokens.back() == 0);
  }
}

TEST_CASE("wider beams never lose ground on the toy table") {
  const std::vector<int64_t> start{7};
  double previous = -1e30;
  for (int beam : {1, 2, 5}) {
    auto result = BeamSearch(ToyScores, start, 0, beam, 6);
    REQUIRE(!result.empty());
    CHECK(NormalizedScore(result.front()) >= previous - 1e-12);
    previous = NormalizedScore(result.front());
    // Ranking is non-increasing in the normalized score.
    for (size_t i = 1; i < result.size(); ++i) {
      CHECK(NormalizedScore(result[i - 1]) >=
            NormalizedScore(result[i]) - 1e-12);
    }
  }
  CHECK_THROWS_AS(BeamSearch(ToyScores, start, 0, 0, 6),
                  std::invalid_argument);
}

TEST_CASE("hypotheses hitting the length limit are flagged unfinished") {
  auto no_eos = [](const std::vector<int64_t>&) {
    return std::vector<double>{-1e9, std::log(0.5), std::log(0.5)};
  };
  auto result = BeamSearch(no_eos, {7}, 0, 2, 4);
  REQUIRE(result.size() == 2);
  for (const Hypothesis& hyp : result) {
    CHECK_FALSE(hyp.finished);
    CHECK(hyp.tokens.size() == 4);
    for (int64_t token : hyp.tokens) CHECK(token != 0);
  }
}

TEST_CASE("beam width one reproduces greedy decoding on a real decoder") {
  Vocabulary vocab = TinyVocab();
  ParamStore store;
  Rng rng(21);
  TextDecoder decoder(&store, SmallDecoder(2), &vocab, &rng);
  Tensor memory = Tensor::Randn({3, 16}, &rng);
  const std::vector<int64_t> start{vocab.LanguageTag("en")};
  StepScorer scorer = [&](const std::vector<int64_t>& prefix) {
    return decoder.NextTokenLogProbs(prefix, memory);
  };
  // Manual greedy rollout, first-maximum tie-breaking.
  std::vector<int64_t> greedy;
  std::vector<int64_t> prefix = start;
  for (int step = 0; step < 6; ++step) {
    const std::vector<double> lp = scorer(prefix);
    const int64_t pick = static_cast<int64_t>(
        std::max_element(lp.begin(), lp.end()) - lp.begin());
    greedy.push_back(pick);
    prefix.push_back(pick);
    if (pick == Vocabulary::kEos) break;
  }
  auto beam1 = BeamSearch(scorer, start, Vocabulary::kEos, 1, 6);
  REQUIRE(!beam1.empty());
  CHECK(beam1.front().tokens == greedy);
}

}  // namespace
}  // namespace s2t
