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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace exifaudit {

std::string hex(std::uint64_t v);

std::string utf16_to_utf8(std::u16string_view units);
std::u16string utf8_to_utf16(std::string_view s);

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// "key = value" lines; blank lines and lines starting with '#' are skipped.
// Throws Error{ConfigError} for a line without '=' or with an empty key.
std::vector<KeyValue> parse_key_values(std::string_view text);

// Typed views of one value; each throws Error{ConfigError} naming the line.
double kv_real(const KeyValue& kv);
std::uint64_t kv_count(const KeyValue& kv);
bool kv_bool(const KeyValue& kv);

inline bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '$';
}

}  // namespace exifaudit
