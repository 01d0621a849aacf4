// bleu.cc

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

#include "s2t/bleu.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

namespace s2t {

std::vector<std::string> TokenizeWords(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && !std::isalnum(c)) {
      flush();
      tokens.push_back(std::string(1, static_cast<char>(c)));
    } else {
      current.push_back(static_cast<char>(c));
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> TokenizeChars(const std::string& text) {
  std::vector<std::string> chars;
  size_t i = 0;
  while (i < text.size()) {
    const unsigned char lead = static_cast<unsigned char>(text[i]);
    size_t len = 1;
    if ((lead & 0x80) == 0x00) {
      len = 1;
    } else if ((lead & 0xE0) == 0xC0) {
      len = 2;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
    }
    len = std::min(len, text.size() - i);
    const std::string ch = text.substr(i, len);
    i += len;
    if (ch.size() == 1 && std::isspace(static_cast<unsigned char>(ch[0]))) {
      continue;  // whitespace carries no content at the character level
    }
    chars.push_back(ch);
  }
  return chars;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, int64_t>;

NgramCounts CountNgrams(const std::vector<std::string>& tokens, size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string> gram(tokens.begin() + i, tokens.begin() + i + n);
    ++counts[std::move(gram)];
  }
  return counts;
}

}  // namespace

BleuResult CorpusBleu(const std::vector<std::string>& hypotheses,
                      const std::vector<std::string>& references,
                      bool char_level) {
  if (hypotheses.empty()) {
    throw std::invalid_argument("CorpusBleu: empty corpus");
  }
  if (hypotheses.size() != references.size()) {
    throw std::invalid_argument(
        "CorpusBleu: " + std::to_string(hypotheses.size()) +
        " hypotheses vs " + std::to_string(references.size()) + " references");
  }

  BleuResult result;
  int64_t matched[4] = {0, 0, 0, 0};
  int64_t attempted[4] = {0, 0, 0, 0};

  for (size_t pair = 0; pair < hypotheses.size(); ++pair) {
    const std::vector<std::string> hyp =
        char_level ? TokenizeChars(hypotheses[pair])
                   : TokenizeWords(hypotheses[pair]);
    const std::vector<std::string> ref =
        char_level ? TokenizeChars(references[pair])
                   : TokenizeWords(references[pair]);
    result.hypothesis_length += static_cast<int64_t>(hyp.size());
    result.reference_length += static_cast<int64_t>(ref.size());
    for (size_t n = 1; n <= 4; ++n) {
      const NgramCounts hyp_counts = CountNgrams(hyp, n);
      const NgramCounts ref_counts = CountNgrams(ref, n);
      for (const auto& [gram, count] : hyp_counts) {
        attempted[n - 1] += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) {
          matched[n - 1] += std::min(count, it->second);
        }
      }
    }
  }

  double log_precision_sum = 0.0;
  bool any_zero = false;
  for (int n = 0; n < 4; ++n) {
    result.precisions[n] =
        attempted[n] > 0
            ? static_cast<double>(matched[n]) / static_cast<double>(attempted[n])
            : 0.0;
    if (result.precisions[n] <= 0.0) {
      any_zero = true;
    } else {
      log_precision_sum += std::log(result.precisions[n]);
    }
  }

  if (result.hypothesis_length > 0 &&
      result.hypothesis_length < result.reference_length) {
    result.brevity_penalty =
        std::exp(1.0 - static_cast<double>(result.reference_length) /
                           static_cast<double>(result.hypothesis_length));
  } else {
    result.brevity_penalty = 1.0;
  }

  result.score = any_zero ? 0.0
                          : 100.0 * result.brevity_penalty *
                                std::exp(log_precision_sum / 4.0);
  return result;
}

}  // namespace s2t
