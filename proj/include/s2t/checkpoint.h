// s2t/checkpoint.h

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

#ifndef S2T_CHECKPOINT_H_
#define S2T_CHECKPOINT_H_

#include <cstdint>
#include <string>

#include "s2t/nn.h"
#include "s2t/optimizer.h"

namespace s2t {

// Versioned binary container: magic bytes, format version, an experiment
// config blob (opaque text), length-prefixed named parameter records with
// raw little-endian doubles (bit-exact round trips), optional optimizer
// moments, the step counter, and the best-validation marker. Writes go to a
// temporary file first and are renamed into place, so a crash never leaves
// a torn checkpoint behind.

inline constexpr char kCheckpointMagic[8] = {'S', '2', 'T', 'C',
                                             'K', 'P', 'T', '1'};
inline constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::string config_text;       // serialized experiment config
  int64_t step = 0;              // optimizer steps completed
  double best_valid_loss = 0.0;  // the best-checkpoint criterion
  bool has_optimizer = false;
  AdamOptimizer::State optimizer;
};

// Serializes every parameter of `store` plus the metadata. `optimizer` may
// be null when the moments are not worth keeping (e.g. final artifacts).
void WriteCheckpoint(const std::string& path, const ParamStore& store,
                     const AdamOptimizer::State* optimizer,
                     const std::string& config_text, int64_t step,
                     double best_valid_loss);

// Restores parameters into `store` by name. Every record must name an
// existing parameter of identical element count and every store parameter
// must be present, so architecture drift is caught at load. Unknown magic
// bytes or a version mismatch are rejected.
CheckpointMeta ReadCheckpoint(const std::string& path, ParamStore* store);

// Reads only the metadata (config blob, step, marker) without a store.
CheckpointMeta ReadCheckpointMeta(const std::string& path);

}  // namespace s2t

#endif  // S2T_CHECKPOINT_H_
