// s2t/manifest.h

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

#ifndef S2T_MANIFEST_H_
#define S2T_MANIFEST_H_

#include <cstdint>
#include <string>
#include <vector>

#include "s2t/vocab.h"

namespace s2t {

// One utterance of a speech-translation dataset. `audio` is either a file
// path or a synthetic-sample key; `tgt_text` holds vocabulary token ids.
struct ManifestRow {
  std::string id;
  std::string audio;
  int64_t n_frames = 0;
  std::string src_lang;
  std::string tgt_lang;
  std::vector<int64_t> tgt_text;
};

// Utterances longer than this many frames are dropped at load time; the
// boundary itself is kept ("more than" semantics).
inline constexpr int64_t kMaxFrames = 3000;

// The fixed tab-separated header line.
extern const char kManifestHeader[];

struct LoadedManifest {
  std::vector<ManifestRow> rows;
  int64_t excluded_long_audio = 0;  // rows dropped by the frame filter
};

// Reads a tab-separated manifest. The first line must equal
// kManifestHeader; every malformed row raises an error naming its
// one-based line number. Emits a stderr warning when no rows survive.
LoadedManifest LoadManifest(const std::string& path);

// Writes rows in the same format (header included).
void SaveManifest(const std::string& path, const std::vector<ManifestRow>& rows);

// Verifies that every row's target language has a tag in the vocabulary
// and every target token id is in range; throws naming the offending row.
void CheckManifestAgainstVocabulary(const std::vector<ManifestRow>& rows,
                                    const Vocabulary& vocab);

}  // namespace s2t

#endif  // S2T_MANIFEST_H_
