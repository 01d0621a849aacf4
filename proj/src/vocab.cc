// s2t/vocab.cc

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

#include "s2t/vocab.h"

#include <fstream>
#include <stdexcept>

namespace s2t {

namespace {

const char* const kReserved[] = {"<pad>", "<s>", "</s>", "<mask>"};

bool LooksLikeLanguageTag(const std::string& token) {
  return token.size() > 7 && token.rfind("<lang:", 0) == 0 &&
         token.back() == '>';
}

std::string TagFor(const std::string& language) {
  return "<lang:" + language + ">";
}

}  // namespace

Vocabulary::Vocabulary(const std::vector<std::string>& languages,
                       const std::vector<std::string>& tokens)
    : languages_(languages) {
  for (const char* r : kReserved) entries_.emplace_back(r);
  for (const std::string& lang : languages_) {
    if (lang.empty()) {
      throw std::invalid_argument("Vocabulary: empty language name");
    }
    entries_.push_back(TagFor(lang));
  }
  for (const std::string& token : tokens) {
    if (token.empty()) {
      throw std::invalid_argument("Vocabulary: empty token");
    }
    entries_.push_back(token);
  }
  BuildIndex();
}

void Vocabulary::BuildIndex() {
  index_.clear();
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i], static_cast<int64_t>(i)).second) {
      throw std::invalid_argument("Vocabulary: duplicate token '" +
                                  entries_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("Vocabulary: cannot open '" + path + "'");
  }
  Vocabulary vocab;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      throw std::runtime_error("Vocabulary: empty entry at " + path +
                               " line " + std::to_string(line_no));
    }
    vocab.entries_.push_back(line);
  }
  if (vocab.entries_.size() < 4) {
    throw std::runtime_error("Vocabulary: " + path +
                             " is missing the reserved block (needs at least "
                             "4 lines)");
  }
  for (int i = 0; i < 4; ++i) {
    if (vocab.entries_[static_cast<size_t>(i)] != kReserved[i]) {
      throw std::runtime_error(
          "Vocabulary: " + path + " line " + std::to_string(i + 1) +
          " must be '" + kReserved[i] + "', found '" +
          vocab.entries_[static_cast<size_t>(i)] + "'");
    }
  }
  // Language tags form one contiguous block straight after the reserved
  // entries; a tag anywhere else is a malformed file.
  size_t i = 4;
  while (i < vocab.entries_.size() && LooksLikeLanguageTag(vocab.entries_[i])) {
    const std::string& tag = vocab.entries_[i];
    vocab.languages_.push_back(tag.substr(6, tag.size() - 7));
    ++i;
  }
  for (; i < vocab.entries_.size(); ++i) {
    if (LooksLikeLanguageTag(vocab.entries_[i])) {
      throw std::runtime_error(
          "Vocabulary: " + path + " line " + std::to_string(i + 1) +
          " has language tag '" + vocab.entries_[i] +
          "' outside the tag block");
    }
  }
  vocab.BuildIndex();
  return vocab;
}

void Vocabulary::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("Vocabulary: cannot write '" + path + "'");
  }
  for (const std::string& entry : entries_) out << entry << '\n';
  if (!out) {
    throw std::runtime_error("Vocabulary: failed writing '" + path + "'");
  }
}

int64_t Vocabulary::LanguageTag(const std::string& language) const {
  auto it = index_.find(TagFor(language));
  if (it == index_.end()) {
    throw std::invalid_argument("Vocabulary: unknown language '" + language +
                                "'");
  }
  return it->second;
}

bool Vocabulary::IsLanguageTag(int64_t id) const {
  return id >= 4 && id < 4 + language_count();
}

const std::string& Vocabulary::TagLanguage(int64_t id) const {
  if (!IsLanguageTag(id)) {
    throw std::invalid_argument("Vocabulary: id " + std::to_string(id) +
                                " is not a language tag");
  }
  return languages_[static_cast<size_t>(id - 4)];
}

int64_t Vocabulary::TokenId(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) {
    throw std::invalid_argument("Vocabulary: unknown token '" + token + "'");
  }
  return it->second;
}

const std::string& Vocabulary::TokenText(int64_t id) const {
  if (id < 0 || id >= size()) {
    throw std::invalid_argument("Vocabulary: id " + std::to_string(id) +
                                " out of range [0, " + std::to_string(size()) +
                                ")");
  }
  return entries_[static_cast<size_t>(id)];
}

}  // namespace s2t
