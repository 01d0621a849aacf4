// s2t/mel.h

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

#ifndef S2T_MEL_H_
#define S2T_MEL_H_

#include <complex>
#include <cstdint>
#include <vector>

namespace s2t {

// Log mel-filter-bank front-end: 25 ms Hann windows every 10 ms (400/160
// samples at 16 kHz), 512-point FFT, 80 triangular mel filters from 0 to
// Nyquist, log with floor 1e-10.

struct MelConfig {
  int window = 400;       // samples (25 ms at 16 kHz)
  int shift = 160;        // samples (10 ms)
  int fft_size = 512;     // power of two >= window
  int channels = 80;
  double sample_rate = 16000.0;
  double log_floor = 1e-10;
};

// In-place radix-2 decimation-in-time FFT; data.size() must be a power of 2.
void Fft(std::vector<std::complex<double>>* data);

// Frequency helpers for the mel scale (HTK convention).
double HzToMel(double hz);
double MelToHz(double mel);

// Triangular filter weights: channels x (fft_size/2 + 1).
std::vector<std::vector<double>> MelFilterbank(const MelConfig& config);

// Returns frames x channels. frame count = floor((N - window)/shift) + 1.
// Throws std::invalid_argument when samples are shorter than one window.
std::vector<std::vector<double>> LogMelFrontend(
    const std::vector<double>& samples, const MelConfig& config = MelConfig());

// Per-channel standardization over the utterance: subtract the channel mean,
// divide by the channel standard deviation (variance floored near zero).
void ApplyCmvn(std::vector<std::vector<double>>* features);

}  // namespace s2t

#endif  // S2T_MEL_H_
