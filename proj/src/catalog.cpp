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

#include "exifaudit/catalog.hpp"

#include <algorithm>
#include <set>

#include "exifaudit/bytes.hpp"
#include "exifaudit/error.hpp"
#include "exifaudit/text.hpp"

namespace exifaudit {
namespace {

using MT = MetadataType;

// Occurrences of one entry in text (or its lowercase copy for method names).
void find_entry(const KeywordEntry& e, std::size_t index, std::string_view text, std::string_view lowered,
                std::vector<KeywordHit>& out) {
  const bool fold = e.kind == KeywordKind::MethodName;
  const std::string needle = fold ? to_lower(e.stem()) : std::string(e.stem());
  const std::string_view hay = fold ? lowered : text;
  if (needle.empty()) return;
  std::size_t pos = hay.find(needle);
  while (pos != std::string_view::npos) {
    const std::size_t end = pos + needle.size();
    const bool left_ok = pos == 0 || !is_ident_char(text[pos - 1]);
    const bool right_ok = e.is_prefix() || end == text.size() || !is_ident_char(text[end]);
    if (left_ok && right_ok) {
      std::size_t len = needle.size();
      if (e.is_prefix()) {
        while (pos + len < text.size() && is_ident_char(text[pos + len])) ++len;
      }
      out.push_back({pos, len, index});
    }
    pos = hay.find(needle, pos + 1);
  }
}

std::vector<KeywordEntry> default_entries() {
  auto method = [](std::string k, TypeSet t) { return KeywordEntry{std::move(k), KeywordKind::MethodName, std::move(t)}; };
  auto tag = [](std::string k, TypeSet t) { return KeywordEntry{std::move(k), KeywordKind::TagConstant, std::move(t)}; };
  return {
      method("getLatLong", {MT::Gps}),
      method("setLatLong", {MT::Gps}),
      method("getAltitude", {MT::Gps}),
      method("getGpsDateTime", {MT::Gps}),
      method("getGPS", {MT::Gps}),
      method("getDateTime", {MT::DateTime}),
      method("getDateTimeOriginal", {MT::DateTime}),
      method("getDateTimeDigitized", {MT::DateTime}),
      tag("TAG_DATETIME*", {MT::DateTime}),
      tag("TAG_MAKE", {MT::SmartphoneBrand}),
      tag("TAG_MODEL", {MT::SmartphoneModel}),
      tag("TAG_BODY_SERIAL_NUMBER", {MT::DeviceSerialNumber}),
      tag("TAG_GPS_LATITUDE", {MT::Gps}),
      tag("TAG_GPS_LONGITUDE", {MT::Gps}),
      tag("TAG_GPS_*", {MT::Gps}),
      // EXIF tag names, which is what the TAG_* constants inline to in bytecode.
      tag("DateTime", {MT::DateTime}),
      tag("Make", {MT::SmartphoneBrand}),
      tag("Model", {MT::SmartphoneModel}),
      tag("BodySerialNumber", {MT::DeviceSerialNumber}),
      tag("GPSLatitude", {MT::Gps}),
      tag("GPSLatitudeRef", {MT::Gps}),
      tag("GPSLongitude", {MT::Gps}),
      tag("GPSLongitudeRef", {MT::Gps}),
      tag("GPSAltitude", {MT::Gps}),
      tag("GPSTimeStamp", {MT::Gps}),
      tag("GPSDateStamp", {MT::Gps}),
  };
}

}  // namespace

KeywordCatalog::KeywordCatalog(std::vector<KeywordEntry> entries) : entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (e.stem().empty()) throw Error(Errc::BadCatalog, "empty keyword");
    if (e.types.empty()) throw Error(Errc::BadCatalog, "keyword " + e.keyword + " implicates no metadata type");
    if (!seen.insert(e.keyword).second) throw Error(Errc::BadCatalog, "duplicate keyword " + e.keyword);
    for (char c : e.stem()) {
      if (!is_ident_char(c)) throw Error(Errc::BadCatalog, "keyword " + e.keyword + " is not an identifier");
    }
  }
}

const KeywordCatalog& KeywordCatalog::builtin() {
  static const KeywordCatalog catalog(default_entries());
  return catalog;
}

KeywordCatalog KeywordCatalog::parse(std::string_view text) {
  std::vector<KeywordEntry> entries;
  std::size_t line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::vector<std::string> fields = split(line, '\t');
    if (fields.size() != 3) {
      throw Error(Errc::BadCatalog, "line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    KeywordEntry e;
    e.keyword = std::string(trim(fields[0]));
    const std::string kind(trim(fields[1]));
    if (kind == "method" || kind == "method-name") {
      e.kind = KeywordKind::MethodName;
    } else if (kind == "tag" || kind == "tag-constant") {
      e.kind = KeywordKind::TagConstant;
    } else {
      throw Error(Errc::BadCatalog, "line " + std::to_string(line_no) + ": unknown kind '" + kind + "'");
    }
    for (const std::string& t : split(fields[2], ',')) {
      const auto type = parse_metadata_type(trim(t));
      if (!type) throw Error(Errc::BadCatalog, "line " + std::to_string(line_no) + ": unknown type '" + t + "'");
      e.types.insert(*type);
    }
    entries.push_back(std::move(e));
  }
  return KeywordCatalog(std::move(entries));
}

KeywordCatalog KeywordCatalog::load(const std::string& path) {
  const Bytes bytes = read_file(path);
  return parse(to_string(bytes));
}

std::string KeywordCatalog::serialize() const {
  std::string out = "# keyword\tkind\ttypes\n";
  for (const auto& e : entries_) {
    out += e.keyword;
    out += e.kind == KeywordKind::MethodName ? "\tmethod\t" : "\ttag\t";
    bool first = true;
    for (MetadataType t : e.types) {
      if (!first) out += ',';
      out += to_string(t);
      first = false;
    }
    out += '\n';
  }
  return out;
}

std::vector<KeywordHit> KeywordCatalog::scan(std::string_view text) const {
  const std::string lowered = to_lower(text);
  std::vector<KeywordHit> hits;
  for (std::size_t i = 0; i < entries_.size(); ++i) find_entry(entries_[i], i, text, lowered, hits);
  std::sort(hits.begin(), hits.end(), [](const KeywordHit& a, const KeywordHit& b) {
    return a.pos != b.pos ? a.pos < b.pos : a.entry < b.entry;
  });
  return hits;
}

bool KeywordCatalog::occurs(const KeywordEntry& entry, std::string_view text) {
  std::vector<KeywordHit> hits;
  find_entry(entry, 0, text, entry.kind == KeywordKind::MethodName ? to_lower(text) : std::string(), hits);
  return !hits.empty();
}

TypeSet classify_block_keywords(std::string_view block_text, const KeywordCatalog& catalog) {
  TypeSet out;
  for (const KeywordHit& h : catalog.scan(block_text)) {
    const auto& types = catalog.at(h.entry).types;
    out.insert(types.begin(), types.end());
  }
  return out;
}

}  // namespace exifaudit
