// checkpoint.cc

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

#include "s2t/checkpoint.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>
#include <vector>

namespace s2t {
namespace {

void PutU64(std::ostream& out, uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

void PutU32(std::ostream& out, uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 4);
}

void PutDouble(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  PutU64(out, bits);
}

void PutDoubles(std::ostream& out, const std::vector<double>& v) {
  PutU64(out, v.size());
  for (double d : v) PutDouble(out, d);
}

void PutString(std::ostream& out, const std::string& s) {
  PutU64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint64_t GetU64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw std::runtime_error("checkpoint truncated");
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

uint32_t GetU32(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in) throw std::runtime_error("checkpoint truncated");
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

double GetDouble(std::istream& in) {
  const uint64_t bits = GetU64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::vector<double> GetDoubles(std::istream& in) {
  const uint64_t n = GetU64(in);
  std::vector<double> v(n);
  for (uint64_t i = 0; i < n; ++i) v[i] = GetDouble(in);
  return v;
}

std::string GetString(std::istream& in) {
  const uint64_t n = GetU64(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("checkpoint truncated");
  return s;
}

CheckpointMeta ReadHeaderAndMeta(std::istream& in, const std::string& path) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  const uint32_t version = GetU32(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint version " + std::to_string(version) +
                             " unsupported (expected " +
                             std::to_string(kCheckpointVersion) + "): " + path);
  }
  CheckpointMeta meta;
  meta.config_text = GetString(in);
  meta.step = static_cast<int64_t>(GetU64(in));
  meta.best_valid_loss = GetDouble(in);
  meta.has_optimizer = GetU32(in) != 0;
  if (meta.has_optimizer) {
    meta.optimizer.step = static_cast<int64_t>(GetU64(in));
    const uint64_t tensors = GetU64(in);
    meta.optimizer.m.reserve(tensors);
    meta.optimizer.v.reserve(tensors);
    for (uint64_t i = 0; i < tensors; ++i) {
      meta.optimizer.m.push_back(GetDoubles(in));
      meta.optimizer.v.push_back(GetDoubles(in));
    }
  }
  return meta;
}

}  // namespace

void WriteCheckpoint(const std::string& path, const ParamStore& store,
                     const AdamOptimizer::State* optimizer,
                     const std::string& config_text, int64_t step,
                     double best_valid_loss) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + tmp);
    out.write(kCheckpointMagic, 8);
    PutU32(out, kCheckpointVersion);
    PutString(out, config_text);
    PutU64(out, static_cast<uint64_t>(step));
    PutDouble(out, best_valid_loss);
    PutU32(out, optimizer != nullptr ? 1 : 0);
    if (optimizer != nullptr) {
      PutU64(out, static_cast<uint64_t>(optimizer->step));
      PutU64(out, optimizer->m.size());
      for (size_t i = 0; i < optimizer->m.size(); ++i) {
        PutDoubles(out, optimizer->m[i]);
        PutDoubles(out, optimizer->v[i]);
      }
    }
    PutU64(out, store.params().size());
    for (const ParamInfo& p : store.params()) {
      PutString(out, p.name);
      PutDoubles(out, p.tensor.data());
    }
    if (!out) throw std::runtime_error("write failed for checkpoint: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot move checkpoint into place: " + path);
  }
}

CheckpointMeta ReadCheckpoint(const std::string& path, ParamStore* store) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  CheckpointMeta meta = ReadHeaderAndMeta(in, path);

  const uint64_t count = GetU64(in);
  std::set<std::string> restored;
  for (uint64_t i = 0; i < count; ++i) {
    const std::string name = GetString(in);
    std::vector<double> values = GetDoubles(in);
    ParamInfo* target = nullptr;
    for (ParamInfo& p : store->mutable_params()) {
      if (p.name == name) {
        target = &p;
        break;
      }
    }
    if (target == nullptr) {
      throw std::runtime_error("checkpoint parameter '" + name +
                               "' does not exist in this model");
    }
    if (target->tensor.data().size() != values.size()) {
      throw std::runtime_error(
          "checkpoint parameter '" + name + "' has " +
          std::to_string(values.size()) + " elements but the model expects " +
          std::to_string(target->tensor.data().size()));
    }
    target->tensor.mutable_data() = std::move(values);
    restored.insert(name);
  }
  if (restored.size() != store->params().size()) {
    for (const ParamInfo& p : store->params()) {
      if (restored.count(p.name) == 0) {
        throw std::runtime_error("checkpoint is missing parameter '" + p.name +
                                 "'");
      }
    }
  }
  return meta;
}

CheckpointMeta ReadCheckpointMeta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  return ReadHeaderAndMeta(in, path);
}

}  // namespace s2t
