// tests/test_speech_encoder.cc

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

#include <cmath>
#include <complex>
#include <cstdio>
#include <numeric>

#include "doctest.h"
#include "s2t/mel.h"
#include "s2t/speech_encoder.h"
#include "s2t/wav.h"

namespace s2t {
namespace {

// Small config that keeps the transformer cheap in tests.
FeatureEncoderConfig TinyFeatures() {
  FeatureEncoderConfig config;
  config.layers = {{16, 8, 4}, {32, 4, 2}, {32, 4, 2}};
  return config;
}

ContextEncoderConfig TinyContext() {
  ContextEncoderConfig config;
  config.layer_count = 2;
  config.model_dim = 32;
  config.head_count = 4;
  config.ffn_dim = 64;
  return config;
}

std::vector<double> RandomWave(Rng* rng, int64_t n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (double& v : w) v = rng->Uniform(-0.5, 0.5);
  return w;
}

TEST_CASE("feature encoder length algebra composes the conv formula") {
  FeatureEncoderConfig two_layer;
  two_layer.layers = {{4, 2, 2}, {4, 2, 2}};
  CHECK(two_layer.OutputLength(16) == 4);
  FeatureEncoderConfig toy;  // strides 4,2,2 / kernels 8,4,4
  toy.layers = {{32, 8, 4}, {64, 4, 2}, {64, 4, 2}};
  CHECK(toy.OutputLength(16000) == 998);
  CHECK(toy.TotalStride() == 16);
  CHECK(toy.MinInputSamples() == 44);  // (((1-1)*2+4 -1)*2+4 -1)*4+8
}

TEST_CASE("waveform encoder rejects inputs shorter than its receptive field") {
  ParamStore store;
  Rng rng(11);
  SpeechEncoder enc(&store, TinyFeatures(), TinyContext(), &rng);
  CHECK_THROWS_AS(enc.EncodeWaveform(std::vector<double>(43, 0.0)),
                  std::invalid_argument);
  Tensor z = enc.EncodeWaveform(std::vector<double>(44, 0.0));
  CHECK(z.dim(0) == 1);
  CHECK(z.dim(1) == 32);
}

TEST_CASE("zero waveform with zero biases produces zero latents") {
  ParamStore store;
  Rng rng(12);
  SpeechEncoder enc(&store, TinyFeatures(), TinyContext(), &rng);
  Tensor z = enc.EncodeWaveform(std::vector<double>(400, 0.0));
  for (double v : z.data()) CHECK(v == 0.0);
}

TEST_CASE("latent length matches the composed formula over random sizes") {
  ParamStore store;
  Rng rng(13);
  FeatureEncoderConfig features = TinyFeatures();
  SpeechEncoder enc(&store, features, TinyContext(), &rng);
  for (int i = 0; i < 20; ++i) {
    const int64_t n = 44 + static_cast<int64_t>(rng.UniformInt(2000));
    Tensor z = enc.EncodeWaveform(RandomWave(&rng, n));
    CHECK(z.dim(0) == features.OutputLength(n));
  }
}

TEST_CASE("contextualize with no layers returns latents plus positions") {
  ParamStore store;
  Rng rng(14);
  ContextEncoderConfig context = TinyContext();
  context.layer_count = 0;
  SpeechEncoder enc(&store, TinyFeatures(), context, &rng);
  Tensor z = enc.EncodeWaveform(RandomWave(&rng, 500));
  Tensor c = enc.Contextualize(z, {});
  Tensor positions = store.Get("encoder.positions");
  REQUIRE(c.shape() == z.shape());
  for (int64_t t = 0; t < z.dim(0); ++t) {
    for (int64_t j = 0; j < z.dim(1); ++j) {
      CHECK(c.at({t, j}) ==
            doctest::Approx(z.at({t, j}) + positions.at({t, j})).epsilon(1e-12));
    }
  }
}

TEST_CASE("fully masked zero-layer context is mask embedding plus positions") {
  ParamStore store;
  Rng rng(15);
  ContextEncoderConfig context = TinyContext();
  context.layer_count = 0;
  SpeechEncoder enc(&store, TinyFeatures(), context, &rng);
  Tensor z = enc.EncodeWaveform(RandomWave(&rng, 300));
  std::vector<bool> mask(static_cast<size_t>(z.dim(0)), true);
  Tensor c = enc.Contextualize(z, mask);
  Tensor positions = store.Get("encoder.positions");
  Tensor mask_embed = store.Get("encoder.mask_embed");
  for (int64_t t = 0; t < z.dim(0); ++t) {
    for (int64_t j = 0; j < z.dim(1); ++j) {
      CHECK(c.at({t, j}) == doctest::Approx(mask_embed.at({0, j}) +
                                            positions.at({t, j})).epsilon(1e-12));
    }
  }
}

TEST_CASE("context length equals latent length and bad masks are rejected") {
  ParamStore store;
  Rng rng(16);
  SpeechEncoder enc(&store, TinyFeatures(), TinyContext(), &rng);
  for (int i = 0; i < 5; ++i) {
    Tensor z = enc.EncodeWaveform(RandomWave(&rng, 200 + 100 * i));
    std::vector<bool> mask = SampleSpanMask(z.dim(0), MaskSpec{0.2, 3}, &rng);
    Tensor c = enc.Contextualize(z, mask);
    CHECK(c.shape() == z.shape());
  }
  Tensor z = enc.EncodeWaveform(RandomWave(&rng, 200));
  CHECK_THROWS_AS(enc.Contextualize(z, std::vector<bool>(3, false)),
                  std::invalid_argument);
}

TEST_CASE("span masks are reproducible and match the analytic coverage") {
  MaskSpec spec{0.065, 10};
  Rng a(99), b(99);
  auto mask_a = SampleSpanMask(500, spec, &a);
  auto mask_b = SampleSpanMask(500, spec, &b);
  CHECK(mask_a == mask_b);

  const int64_t frames = 10000;
  Rng rng(123);
  double covered = 0.0;
  const int draws = 20;
  for (int d = 0; d < draws; ++d) {
    auto mask = SampleSpanMask(frames, spec, &rng);
    covered += static_cast<double>(std::count(mask.begin(), mask.end(), true));
  }
  const double empirical = covered / static_cast<double>(frames * draws);
  const double analytic = ExpectedMaskFraction(frames, spec);
  CHECK(std::abs(empirical - analytic) / analytic < 0.02);
}

TEST_CASE("quantizer with one entry per group is constant across frames") {
  ParamStore store;
  Rng rng(17);
  QuantizerConfig config;
  config.group_count = 2;
  config.entries_per_group = 1;
  Quantizer quantizer(&store, "q", config, 8, &rng);
  Tensor z = Tensor::Randn({5, 8}, &rng);
  QuantizeResult result = quantizer.Quantize(z, /*train=*/false);
  for (int64_t t = 1; t < 5; ++t) {
    for (int64_t j = 0; j < 8; ++j) {
      CHECK(result.quantized.at({t, j}) == result.quantized.at({0, j}));
    }
  }
}

TEST_CASE("evaluation-mode quantization is idempotent") {
  ParamStore store;
  Rng rng(18);
  QuantizerConfig config;
  config.group_count = 2;
  config.entries_per_group = 4;
  Quantizer quantizer(&store, "q", config, 8, &rng);
  Tensor z = Tensor::Randn({6, 8}, &rng);
  NoGradGuard guard;
  Tensor q1 = quantizer.Quantize(z, false).quantized;
  Tensor q2 = quantizer.Quantize(q1, false).quantized;
  CHECK(q1.data() == q2.data());
}

TEST_CASE("straight-through quantization keeps hard values but passes gradients") {
  ParamStore store;
  Rng rng(19);
  QuantizerConfig config;
  config.group_count = 2;
  config.entries_per_group = 4;
  Quantizer quantizer(&store, "q", config, 8, &rng);
  Tensor z = Tensor::Randn({6, 8}, &rng, 1.0, true);
  QuantizeResult train_result = quantizer.Quantize(z, true);
  {
    NoGradGuard guard;
    QuantizeResult eval_result = quantizer.Quantize(z, false);
    CHECK(train_result.quantized.data() == eval_result.quantized.data());
  }
  Sum(Mul(train_result.quantized, train_result.quantized)).Backward();
  double codebook_grad = 0.0;
  for (const auto& p : store.params()) {
    for (double g : p.tensor.grad()) codebook_grad += std::abs(g);
  }
  CHECK(codebook_grad > 0.0);
  double z_grad = 0.0;
  for (double g : z.grad()) z_grad += std::abs(g);
  CHECK(z_grad > 0.0);  // straight-through path
}

TEST_CASE("uniform selection yields the 1/entries concentration statistic") {
  ParamStore store;
  Rng rng(20);
  QuantizerConfig config;
  config.group_count = 2;
  config.entries_per_group = 8;
  config.temperature = 1e12;  // distances vanish -> uniform selection
  Quantizer quantizer(&store, "q", config, 8, &rng);
  Tensor z = Tensor::Randn({10, 8}, &rng);
  QuantizeResult result = quantizer.Quantize(z, /*train=*/true);
  CHECK(result.diversity == doctest::Approx(1.0 / 8).epsilon(1e-9));
}

TEST_CASE("contrastive loss is ln(K+1) when all similarities are equal") {
  // Every target row identical: each candidate has the same similarity.
  Rng rng(21);
  Tensor context = Tensor::Randn({10, 4}, &rng);
  std::vector<double> row{1.0, 2.0, 3.0, 4.0};
  std::vector<double> data;
  for (int i = 0; i < 10; ++i) data.insert(data.end(), row.begin(), row.end());
  Tensor targets = Tensor::FromData({10, 4}, data);
  std::vector<bool> mask(10, true);
  Tensor loss = ContrastiveLoss(context, targets, mask, 5, 0.1, &rng);
  CHECK(loss.item() == doctest::Approx(std::log(6.0)).epsilon(1e-10));
}

TEST_CASE("contrastive loss saturates to zero at maximal similarity gap") {
  // Two masked frames with opposite target vectors: the true candidate has
  // cosine 1, the only distractor cosine -1, so the logit gap is 2/kappa.
  Tensor context = Tensor::FromData({2, 3}, {1, 2, 2, -1, -2, -2});
  Tensor targets = Tensor::FromData({2, 3}, {1, 2, 2, -1, -2, -2});
  std::vector<bool> mask(2, true);
  Rng rng(22);
  Tensor loss = ContrastiveLoss(context, targets, mask, 8, 0.1, &rng);
  CHECK(loss.item() < 1e-6);
  CHECK(loss.item() >= 0.0);
}

TEST_CASE("contrastive loss with no distractors is exactly zero") {
  Rng rng(23);
  Tensor context = Tensor::Randn({4, 8}, &rng);
  Tensor targets = Tensor::Randn({4, 8}, &rng);
  std::vector<bool> mask(4, true);
  Tensor loss = ContrastiveLoss(context, targets, mask, 0, 0.1, &rng);
  CHECK(loss.item() == 0.0);
}

TEST_CASE("contrastive loss requires at least one masked frame") {
  Rng rng(24);
  Tensor context = Tensor::Randn({4, 8}, &rng);
  Tensor targets = Tensor::Randn({4, 8}, &rng);
  CHECK_THROWS_AS(
      ContrastiveLoss(context, targets, std::vector<bool>(4, false), 4, 0.1, &rng),
      std::invalid_argument);
}

TEST_CASE("contrastive loss stays within its analytic bounds") {
  Rng rng(25);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor context = Tensor::Randn({12, 8}, &rng);
    Tensor targets = Tensor::Randn({12, 8}, &rng);
    std::vector<bool> mask(12, true);
    const int64_t k = 4;
    Tensor loss = ContrastiveLoss(context, targets, mask, k, 0.1, &rng);
    CHECK(loss.item() >= 0.0);
    // Worst case: true logit at -1/kappa, distractors at +1/kappa.
    CHECK(loss.item() <= std::log(static_cast<double>(k + 1)) + 2.0 / 0.1);
  }
}

TEST_CASE("contrastive pretraining decreases the smoothed loss") {
  ContrastivePretrainConfig config;
  config.feature = TinyFeatures();
  config.context = TinyContext();
  config.quantizer.group_count = 2;
  config.quantizer.entries_per_group = 8;
  config.mask = MaskSpec{0.1, 4};
  config.distractor_count = 4;
  config.kappa = 0.1;
  config.learning_rate = 1e-3;
  ContrastivePretrainer trainer(config, 2026);
  Rng data_rng(31);
  // A small fixed corpus, visited in rotating pairs: optimization progress
  // is measured on a training set, not on a fresh sample every step.
  std::vector<std::vector<double>> corpus;
  for (int b = 0; b < 4; ++b) corpus.push_back(RandomWave(&data_rng, 300));
  std::vector<double> losses;
  for (int step = 0; step < 200; ++step) {
    std::vector<std::vector<double>> batch{corpus[(2 * step) % 4],
                                           corpus[(2 * step + 1) % 4]};
    losses.push_back(trainer.Step(batch));
  }
  auto mean_of = [&](size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) s += losses[i];
    return s / static_cast<double>(hi - lo);
  };
  const double head = mean_of(0, 20);
  const double tail = mean_of(losses.size() - 20, losses.size());
  CHECK(tail < head);
}

TEST_CASE("pretraining runs are bit-identical under the same seed") {
  ContrastivePretrainConfig config;
  config.feature = TinyFeatures();
  config.context = TinyContext();
  config.mask = MaskSpec{0.15, 3};
  config.distractor_count = 3;
  ContrastivePretrainer a(config, 7), b(config, 7);
  Rng data_rng_a(55), data_rng_b(55);
  for (int step = 0; step < 5; ++step) {
    std::vector<std::vector<double>> batch_a, batch_b;
    for (int i = 0; i < 2; ++i) {
      batch_a.push_back(RandomWave(&data_rng_a, 250));
      batch_b.push_back(RandomWave(&data_rng_b, 250));
    }
    CHECK(a.Step(batch_a) == b.Step(batch_b));
  }
  const auto& pa = a.store()->params();
  const auto& pb = b.store()->params();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].tensor.data() == pb[i].tensor.data());
  }
}

// ---------------------------------------------------------------------------
// Log-mel front-end

TEST_CASE("fft matches a naive dft") {
  Rng rng(41);
  const size_t n = 16;
  std::vector<std::complex<double>> input(n);
  for (auto& v : input) v = {rng.Uniform(-1, 1), 0.0};
  std::vector<std::complex<double>> fast = input;
  Fft(&fast);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (size_t t = 0; t < n; ++t) {
      const double angle = -2.0 * M_PI * static_cast<double>(k * t) / n;
      acc += input[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    CHECK(std::abs(fast[k] - acc) < 1e-9);
  }
  std::vector<std::complex<double>> bad(3);
  CHECK_THROWS_AS(Fft(&bad), std::invalid_argument);
}

TEST_CASE("log-mel frame count follows the window arithmetic") {
  Rng rng(42);
  std::vector<double> one_second(16000);
  for (double& v : one_second) v = rng.Uniform(-0.1, 0.1);
  auto features = LogMelFrontend(one_second);
  CHECK(features.size() == 98);  // floor((16000-400)/160)+1
  CHECK(features[0].size() == 80);
  CHECK_THROWS_AS(LogMelFrontend(std::vector<double>(399, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("cmvn standardizes every channel") {
  Rng rng(43);
  std::vector<double> wave(8000);
  for (double& v : wave) v = rng.Uniform(-0.5, 0.5);
  auto features = LogMelFrontend(wave);
  ApplyCmvn(&features);
  const size_t frames = features.size();
  for (size_t c = 0; c < 80; ++c) {
    double mean = 0.0, var = 0.0;
    for (const auto& row : features) mean += row[c];
    mean /= static_cast<double>(frames);
    for (const auto& row : features) var += (row[c] - mean) * (row[c] - mean);
    var /= static_cast<double>(frames);
    CHECK(std::abs(mean) < 1e-9);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("a pure tone concentrates energy in the covering mel channel") {
  const double tone_hz = 1000.0;
  std::vector<double> wave(16000);
  for (size_t i = 0; i < wave.size(); ++i) {
    wave[i] = 0.5 * std::sin(2.0 * M_PI * tone_hz * static_cast<double>(i) / 16000.0);
  }
  auto features = LogMelFrontend(wave);
  // Expected channel, re-derived from the mel triangle definition: centers
  // are channels+2 equally spaced mel points between 0 and Nyquist; the tone
  // lands in the channel whose triangle weight at tone_hz is largest.
  const double mel_hi = 2595.0 * std::log10(1.0 + 8000.0 / 700.0);
  int expected = -1;
  double best_weight = 0.0;
  for (int c = 0; c < 80; ++c) {
    auto point = [&](int i) {
      const double mel = mel_hi * static_cast<double>(i) / 81.0;
      return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
    };
    const double left = point(c), center = point(c + 1), right = point(c + 2);
    double weight = 0.0;
    if (tone_hz > left && tone_hz < right) {
      weight = tone_hz <= center ? (tone_hz - left) / (center - left)
                                 : (right - tone_hz) / (right - center);
    }
    if (weight > best_weight) {
      best_weight = weight;
      expected = c;
    }
  }
  REQUIRE(expected >= 0);
  // Check the argmax channel of a mid-utterance frame.
  const auto& frame = features[features.size() / 2];
  int actual = 0;
  for (int c = 1; c < 80; ++c) {
    if (frame[c] > frame[actual]) actual = c;
  }
  CHECK(actual == expected);
}

TEST_CASE("wav files round-trip through write and read") {
  Rng rng(44);
  std::vector<double> wave(1000);
  for (double& v : wave) v = rng.Uniform(-0.9, 0.9);
  const std::string path = "test_roundtrip.wav";
  WriteWav(path, wave);
  auto back = ReadWav(path);
  REQUIRE(back.size() == wave.size());
  for (size_t i = 0; i < wave.size(); ++i) {
    CHECK(std::abs(back[i] - wave[i]) <= 1.0 / 32768.0);
  }
  std::remove(path.c_str());
  CHECK_THROWS_AS(ReadWav("does_not_exist.wav"), std::runtime_error);
}

}  // namespace
}  // namespace s2t
