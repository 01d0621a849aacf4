// s2t/wav.h

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

#ifndef S2T_WAV_H_
#define S2T_WAV_H_

#include <string>
#include <vector>

namespace s2t {

// 16-bit 16 kHz mono PCM in a RIFF/WAVE container. Samples are exposed as
// doubles in [-1, 1).

inline constexpr int kSampleRate = 16000;

// Throws std::runtime_error on malformed files or unsupported encodings
// (anything but 16-bit mono PCM at 16 kHz).
std::vector<double> ReadWav(const std::string& path);

// Clamps to [-1, 1) and quantizes to 16 bits.
void WriteWav(const std::string& path, const std::vector<double>& samples);

}  // namespace s2t

#endif  // S2T_WAV_H_
