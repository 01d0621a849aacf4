// s2t/vocab.h

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

#ifndef S2T_VOCAB_H_
#define S2T_VOCAB_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace s2t {

// Token inventory shared by the text decoder and the data pipeline.
//
// Layout is fixed: ids 0..3 are the reserved entries <pad>, <s>, </s> and
// <mask>; the next block holds one <lang:XX> tag per language; everything
// after that is a regular token. The on-disk form is one token per line in
// id order.
class Vocabulary {
 public:
  static constexpr int64_t kPad = 0;
  static constexpr int64_t kBos = 1;
  static constexpr int64_t kEos = 2;
  static constexpr int64_t kMask = 3;

  // An empty vocabulary; a placeholder until a real one is assigned (lookups
  // on it throw).
  Vocabulary() = default;

  Vocabulary(const std::vector<std::string>& languages,
             const std::vector<std::string>& tokens);

  // Reads a vocabulary file, validating the reserved block and recovering
  // the language tags. Errors name the offending line number.
  static Vocabulary Load(const std::string& path);
  void Save(const std::string& path) const;

  int64_t size() const { return static_cast<int64_t>(entries_.size()); }
  int64_t language_count() const {
    return static_cast<int64_t>(languages_.size());
  }
  const std::vector<std::string>& languages() const { return languages_; }

  // Id of the <lang:XX> entry; throws for an unknown language.
  int64_t LanguageTag(const std::string& language) const;
  bool IsLanguageTag(int64_t id) const;
  // Language name for a tag id; throws if id is not a tag.
  const std::string& TagLanguage(int64_t id) const;

  // Throws for tokens not in the inventory.
  int64_t TokenId(const std::string& token) const;
  const std::string& TokenText(int64_t id) const;

  bool operator==(const Vocabulary& other) const {
    return entries_ == other.entries_;
  }

 private:
  void BuildIndex();

  std::vector<std::string> entries_;
  std::vector<std::string> languages_;
  std::unordered_map<std::string, int64_t> index_;
};

}  // namespace s2t

#endif  // S2T_VOCAB_H_
