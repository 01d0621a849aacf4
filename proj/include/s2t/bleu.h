// s2t/bleu.h

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

#ifndef S2T_BLEU_H_
#define S2T_BLEU_H_

#include <cstdint>
#include <string>
#include <vector>

namespace s2t {

// Word-mode tokenization: case-sensitive, split on whitespace, and every
// punctuation character becomes its own token ("Hello, world!" ->
// ["Hello", ",", "world", "!"]). The rule is fixed, not configurable, so
// scores stay comparable across runs.
std::vector<std::string> TokenizeWords(const std::string& text);

// Character-mode tokenization: whitespace is removed, then the string is
// split into UTF-8 code points. Used for languages scored at the character
// level (e.g. Japanese, Chinese).
std::vector<std::string> TokenizeChars(const std::string& text);

struct BleuResult {
  double score = 0.0;          // 0..100
  double precisions[4] = {0, 0, 0, 0};
  double brevity_penalty = 1.0;
  int64_t hypothesis_length = 0;
  int64_t reference_length = 0;
};

// Corpus-level BLEU: n-gram counts pool over all sentence pairs (never
// averaged per sentence), modified precision clips hypothesis counts at the
// reference count, the score is the geometric mean of the 1..4-gram
// precisions times the brevity penalty exp(min(0, 1 - r/c)), and any zero
// precision zeroes the score. Throws if the corpora are empty or their
// sizes differ.
BleuResult CorpusBleu(const std::vector<std::string>& hypotheses,
                      const std::vector<std::string>& references,
                      bool char_level = false);

}  // namespace s2t

#endif  // S2T_BLEU_H_
