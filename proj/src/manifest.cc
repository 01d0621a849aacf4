// manifest.cc

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

#include "s2t/manifest.h"

#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace s2t {

const char kManifestHeader[] = "id\taudio\tn_frames\tsrc_lang\ttgt_lang\ttgt_text";

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) fields.push_back(field);
  if (!line.empty() && line.back() == '\t') fields.push_back("");
  return fields;
}

[[noreturn]] void RowError(size_t line_no, const std::string& what) {
  throw std::runtime_error("manifest line " + std::to_string(line_no) + ": " +
                           what);
}

int64_t ParseInt(const std::string& text, size_t line_no,
                 const std::string& column) {
  try {
    size_t used = 0;
    const int64_t value = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing garbage");
    return value;
  } catch (const std::exception&) {
    RowError(line_no, column + " is not an integer: '" + text + "'");
  }
}

}  // namespace

LoadedManifest LoadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open manifest: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("manifest is empty (missing header): " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) {
    throw std::runtime_error("manifest header mismatch in " + path +
                             "; expected '" + kManifestHeader + "'");
  }

  LoadedManifest result;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = SplitTabs(line);
    if (fields.size() != 6) {
      RowError(line_no, "expected 6 tab-separated fields, got " +
                            std::to_string(fields.size()));
    }
    ManifestRow row;
    row.id = fields[0];
    row.audio = fields[1];
    row.n_frames = ParseInt(fields[2], line_no, "n_frames");
    row.src_lang = fields[3];
    row.tgt_lang = fields[4];
    if (row.id.empty()) RowError(line_no, "empty id");
    if (row.n_frames <= 0) {
      RowError(line_no,
               "n_frames must be positive, got " + std::to_string(row.n_frames));
    }
    if (row.src_lang.empty() || row.tgt_lang.empty()) {
      RowError(line_no, "empty language field");
    }
    std::istringstream tokens(fields[5]);
    std::string token;
    while (tokens >> token) {
      row.tgt_text.push_back(ParseInt(token, line_no, "tgt_text token"));
    }
    if (row.tgt_text.empty()) RowError(line_no, "empty tgt_text");

    if (row.n_frames > kMaxFrames) {
      ++result.excluded_long_audio;
      continue;
    }
    result.rows.push_back(std::move(row));
  }
  if (result.rows.empty()) {
    std::cerr << "warning: manifest " << path << " has no usable rows";
    if (result.excluded_long_audio > 0) {
      std::cerr << " (" << result.excluded_long_audio
                << " excluded for length)";
    }
    std::cerr << "\n";
  }
  return result;
}

void SaveManifest(const std::string& path,
                  const std::vector<ManifestRow>& rows) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write manifest: " + path);
  }
  out << kManifestHeader << "\n";
  for (const ManifestRow& row : rows) {
    out << row.id << '\t' << row.audio << '\t' << row.n_frames << '\t'
        << row.src_lang << '\t' << row.tgt_lang << '\t';
    for (size_t i = 0; i < row.tgt_text.size(); ++i) {
      if (i > 0) out << ' ';
      out << row.tgt_text[i];
    }
    out << "\n";
  }
  if (!out) {
    throw std::runtime_error("write failed for manifest: " + path);
  }
}

void CheckManifestAgainstVocabulary(const std::vector<ManifestRow>& rows,
                                    const Vocabulary& vocab) {
  for (const ManifestRow& row : rows) {
    bool known = false;
    for (const std::string& lang : vocab.languages()) {
      if (lang == row.tgt_lang) known = true;
    }
    if (!known) {
      throw std::runtime_error("manifest row '" + row.id +
                               "': target language '" + row.tgt_lang +
                               "' has no vocabulary tag");
    }
    for (int64_t id : row.tgt_text) {
      if (id < 0 || id >= vocab.size()) {
        throw std::runtime_error("manifest row '" + row.id + "': token id " +
                                 std::to_string(id) +
                                 " outside the vocabulary");
      }
    }
  }
}

}  // namespace s2t
