/*
 * Copyright (C) 2026 The exifaudit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "exifaudit/metadata_type.hpp"

namespace exifaudit {

enum class KeywordKind { MethodName, TagConstant };

// One catalog line. A keyword matches a whole identifier; a trailing '*'
// turns it into an identifier prefix ("TAG_GPS_*"). Method names match
// case-insensitively, tag constants case-sensitively.
struct KeywordEntry {
  std::string keyword;
  KeywordKind kind = KeywordKind::TagConstant;
  TypeSet types;

  bool is_prefix() const { return !keyword.empty() && keyword.back() == '*'; }
  std::string_view stem() const {
    return is_prefix() ? std::string_view(keyword).substr(0, keyword.size() - 1) : std::string_view(keyword);
  }
};

struct KeywordHit {
  std::size_t pos = 0;
  std::size_t len = 0;
  std::size_t entry = 0;  // index into KeywordCatalog::entries()
};

class KeywordCatalog {
 public:
  KeywordCatalog() = default;
  // Throws Error{BadCatalog} on duplicate keywords or entries without types.
  explicit KeywordCatalog(std::vector<KeywordEntry> entries);

  static const KeywordCatalog& builtin();

  // Line format: keyword <TAB> kind <TAB> comma-separated types.
  // Kind is "method" or "tag"; '#' starts a comment line.
  static KeywordCatalog parse(std::string_view text);
  static KeywordCatalog load(const std::string& path);
  std::string serialize() const;

  const std::vector<KeywordEntry>& entries() const { return entries_; }
  const KeywordEntry& at(std::size_t i) const { return entries_.at(i); }

  // All occurrences of all keywords, ordered by position then entry index.
  std::vector<KeywordHit> scan(std::string_view text) const;
  // Whether `entry` occurs somewhere in `text` under its matching rules.
  static bool occurs(const KeywordEntry& entry, std::string_view text);

 private:
  std::vector<KeywordEntry> entries_;
};

// Union of the implicated types of every catalog keyword occurring in text.
TypeSet classify_block_keywords(std::string_view block_text, const KeywordCatalog& catalog);

}  // namespace exifaudit
