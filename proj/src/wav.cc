// s2t/wav.cc

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

#include "s2t/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace s2t {

namespace {

uint32_t ReadU32(const char* p) {
  return static_cast<uint8_t>(p[0]) | static_cast<uint8_t>(p[1]) << 8 |
         static_cast<uint8_t>(p[2]) << 16 |
         static_cast<uint32_t>(static_cast<uint8_t>(p[3])) << 24;
}

uint16_t ReadU16(const char* p) {
  return static_cast<uint16_t>(static_cast<uint8_t>(p[0]) |
                               static_cast<uint8_t>(p[1]) << 8);
}

void PutU32(std::string* s, uint32_t v) {
  s->push_back(static_cast<char>(v & 0xFF));
  s->push_back(static_cast<char>((v >> 8) & 0xFF));
  s->push_back(static_cast<char>((v >> 16) & 0xFF));
  s->push_back(static_cast<char>((v >> 24) & 0xFF));
}

void PutU16(std::string* s, uint16_t v) {
  s->push_back(static_cast<char>(v & 0xFF));
  s->push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace

std::vector<double> ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("ReadWav: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0) {
    throw std::runtime_error("ReadWav: " + path + " is not a RIFF/WAVE file");
  }
  size_t pos = 12;
  bool have_fmt = false;
  uint16_t channels = 0, bits = 0, format = 0;
  uint32_t rate = 0;
  std::vector<double> samples;
  bool have_data = false;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const uint32_t size = ReadU32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + size > bytes.size()) {
      throw std::runtime_error("ReadWav: truncated chunk '" + id + "' in " + path);
    }
    if (id == "fmt ") {
      if (size < 16) throw std::runtime_error("ReadWav: short fmt chunk in " + path);
      format = ReadU16(bytes.data() + pos);
      channels = ReadU16(bytes.data() + pos + 2);
      rate = ReadU32(bytes.data() + pos + 4);
      bits = ReadU16(bytes.data() + pos + 14);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw std::runtime_error("ReadWav: data before fmt in " + path);
      if (format != 1 || channels != 1 || bits != 16 || rate != kSampleRate) {
        throw std::runtime_error(
            "ReadWav: " + path + " must be 16-bit 16 kHz mono PCM (got format " +
            std::to_string(format) + ", " + std::to_string(channels) +
            " ch, " + std::to_string(rate) + " Hz, " + std::to_string(bits) +
            " bits)");
      }
      samples.reserve(size / 2);
      for (uint32_t i = 0; i + 1 < size; i += 2) {
        int16_t v;
        std::memcpy(&v, bytes.data() + pos + i, 2);
        samples.push_back(static_cast<double>(v) / 32768.0);
      }
      have_data = true;
    }
    pos += size + (size & 1);  // chunks are word-aligned
  }
  if (!have_data) throw std::runtime_error("ReadWav: no data chunk in " + path);
  return samples;
}

void WriteWav(const std::string& path, const std::vector<double>& samples) {
  const uint32_t data_size = static_cast<uint32_t>(samples.size() * 2);
  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  PutU32(&out, 36 + data_size);
  out += "WAVEfmt ";
  PutU32(&out, 16);
  PutU16(&out, 1);  // PCM
  PutU16(&out, 1);  // mono
  PutU32(&out, kSampleRate);
  PutU32(&out, kSampleRate * 2);  // byte rate
  PutU16(&out, 2);                // block align
  PutU16(&out, 16);               // bits
  out += "data";
  PutU32(&out, data_size);
  for (double s : samples) {
    const double clamped = std::clamp(s, -1.0, 32767.0 / 32768.0);
    const int16_t v = static_cast<int16_t>(std::lround(clamped * 32768.0));
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("WriteWav: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("WriteWav: write failed for " + path);
}

}  // namespace s2t
