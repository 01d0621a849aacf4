// s2t/mel.cc

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

#include "s2t/mel.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace s2t {

void Fft(std::vector<std::complex<double>>* data) {
  auto& a = *data;
  const size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("Fft: size " + std::to_string(n) +
                                " is not a power of two");
  }
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<std::vector<double>> MelFilterbank(const MelConfig& config) {
  const int bins = config.fft_size / 2 + 1;
  const double bin_width = config.sample_rate / config.fft_size;
  const double mel_lo = HzToMel(0.0);
  const double mel_hi = HzToMel(config.sample_rate / 2.0);
  // channels + 2 equally spaced mel points define the triangle edges.
  std::vector<double> hz_points(config.channels + 2);
  for (int i = 0; i < config.channels + 2; ++i) {
    const double mel =
        mel_lo + (mel_hi - mel_lo) * i / static_cast<double>(config.channels + 1);
    hz_points[i] = MelToHz(mel);
  }
  std::vector<std::vector<double>> filters(
      config.channels, std::vector<double>(bins, 0.0));
  for (int c = 0; c < config.channels; ++c) {
    const double left = hz_points[c], center = hz_points[c + 1],
                 right = hz_points[c + 2];
    for (int b = 0; b < bins; ++b) {
      const double hz = b * bin_width;
      if (hz <= left || hz >= right) continue;
      filters[c][b] = hz <= center ? (hz - left) / (center - left)
                                   : (right - hz) / (right - center);
    }
  }
  return filters;
}

std::vector<std::vector<double>> LogMelFrontend(
    const std::vector<double>& samples, const MelConfig& config) {
  const int n = static_cast<int>(samples.size());
  if (n < config.window) {
    throw std::invalid_argument(
        "LogMelFrontend: need at least " + std::to_string(config.window) +
        " samples for one window, got " + std::to_string(n));
  }
  const int frames = (n - config.window) / config.shift + 1;
  const int bins = config.fft_size / 2 + 1;
  const auto filters = MelFilterbank(config);
  // Hann window.
  std::vector<double> window(config.window);
  for (int i = 0; i < config.window; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (config.window - 1));
  }
  std::vector<std::vector<double>> features(
      frames, std::vector<double>(config.channels, 0.0));
  std::vector<std::complex<double>> buf(config.fft_size);
  std::vector<double> power(bins);
  for (int f = 0; f < frames; ++f) {
    const int start = f * config.shift;
    for (int i = 0; i < config.fft_size; ++i) {
      buf[i] = i < config.window ? samples[start + i] * window[i] : 0.0;
    }
    Fft(&buf);
    for (int b = 0; b < bins; ++b) power[b] = std::norm(buf[b]);
    for (int c = 0; c < config.channels; ++c) {
      double e = 0.0;
      for (int b = 0; b < bins; ++b) e += filters[c][b] * power[b];
      features[f][c] = std::log(std::max(e, config.log_floor));
    }
  }
  return features;
}

void ApplyCmvn(std::vector<std::vector<double>>* features) {
  auto& feats = *features;
  if (feats.empty()) return;
  const size_t channels = feats[0].size();
  const double n = static_cast<double>(feats.size());
  for (size_t c = 0; c < channels; ++c) {
    double mean = 0.0;
    for (const auto& row : feats) mean += row[c];
    mean /= n;
    double var = 0.0;
    for (const auto& row : feats) var += (row[c] - mean) * (row[c] - mean);
    var /= n;
    const double inv_std = 1.0 / std::sqrt(var + 1e-10);
    for (auto& row : feats) row[c] = (row[c] - mean) * inv_std;
  }
}

}  // namespace s2t
