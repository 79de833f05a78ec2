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

#include "exifaudit/code_extract.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "exifaudit/error.hpp"
#include "exifaudit/parallel.hpp"
#include "exifaudit/text.hpp"

namespace exifaudit {
namespace {

struct BracePair {
  std::size_t open;
  std::size_t close;
};

// Brace structure of C-family source with comments and string/char literals
// masked out.
struct BraceIndex {
  std::vector<BracePair> pairs;  // sorted by open
  std::vector<bool> is_code;
  bool balanced = true;
};

BraceIndex index_braces(std::string_view t) {
  BraceIndex idx;
  idx.is_code.assign(t.size(), true);
  std::vector<std::size_t> stack;
  auto mask = [&](std::size_t from, std::size_t to) {
    for (std::size_t k = from; k < std::min(to, t.size()); ++k) idx.is_code[k] = false;
  };
  std::size_t i = 0;
  while (i < t.size()) {
    const char c = t[i];
    const char n = i + 1 < t.size() ? t[i + 1] : '\0';
    if (c == '/' && n == '/') {
      std::size_t e = t.find('\n', i);
      e = e == std::string_view::npos ? t.size() : e;
      mask(i, e);
      i = e;
    } else if (c == '/' && n == '*') {
      std::size_t e = t.find("*/", i + 2);
      e = e == std::string_view::npos ? t.size() : e + 2;
      mask(i, e);
      i = e;
    } else if (c == '"' && t.substr(i, 3) == "\"\"\"") {
      std::size_t e = t.find("\"\"\"", i + 3);
      e = e == std::string_view::npos ? t.size() : e + 3;
      mask(i, e);
      i = e;
    } else if (c == '"' || c == '\'') {
      std::size_t e = i + 1;
      while (e < t.size() && t[e] != c && t[e] != '\n') e += t[e] == '\\' ? 2 : 1;
      e = std::min(e + 1, t.size());
      mask(i, e);
      i = e;
    } else {
      if (c == '{') {
        stack.push_back(i);
      } else if (c == '}') {
        if (stack.empty()) {
          idx.balanced = false;
        } else {
          idx.pairs.push_back({stack.back(), i});
          stack.pop_back();
        }
      }
      ++i;
    }
  }
  if (!stack.empty()) idx.balanced = false;
  std::sort(idx.pairs.begin(), idx.pairs.end(), [](const BracePair& a, const BracePair& b) { return a.open < b.open; });
  return idx;
}

bool is_boundary(char c) { return c == ';' || c == '{' || c == '}'; }

// Position just after the nearest statement boundary before `open`.
std::size_t header_start(std::string_view t, const BraceIndex& idx, std::size_t open) {
  std::size_t k = open;
  while (k > 0) {
    --k;
    if (idx.is_code[k] && is_boundary(t[k])) return k + 1;
  }
  return 0;
}

std::string code_only(std::string_view t, const BraceIndex& idx, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t k = from; k < to; ++k) out.push_back(idx.is_code[k] ? t[k] : ' ');
  return std::string(trim(out));
}

std::vector<std::string> words_of(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_ident_char(c) || c == '@') {
      cur.push_back(c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_method_header(std::string_view h) {
  if (h.find('(') == std::string_view::npos || h.find(')') == std::string_view::npos) return false;
  if (h.size() >= 2 && h.substr(h.size() - 2) == "->") return false;
  int depth = 0;
  for (char c : h) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == '=' && depth == 0) return false;
  }
  static const std::set<std::string> kControl = {"if", "for", "while", "switch", "catch", "synchronized", "try",
                                                  "else", "do", "when", "return", "finally"};
  static const std::set<std::string> kTypeDecl = {"class", "interface", "enum", "object", "new", "record"};
  const auto words = words_of(h);
  std::optional<std::string> first;
  for (const auto& w : words) {
    if (w.front() == '@') continue;
    if (!first) first = w;
    if (kTypeDecl.count(w)) return false;
  }
  return first && !kControl.count(*first);
}

std::size_t line_start(std::string_view t, std::size_t pos) {
  const auto nl = pos == 0 ? std::string_view::npos : t.rfind('\n', pos - 1);
  return nl == std::string_view::npos ? 0 : nl + 1;
}

std::size_t line_end(std::string_view t, std::size_t pos) {
  const auto nl = t.find('\n', pos);
  return nl == std::string_view::npos ? t.size() : nl;
}

Span fallback_window(std::string_view t, std::size_t pos, std::size_t lines) {
  std::size_t s = line_start(t, pos);
  for (std::size_t k = 0; k < lines && s > 0; ++k) s = line_start(t, s - 1);
  std::size_t e = line_end(t, pos);
  for (std::size_t k = 0; k < lines && e < t.size(); ++k) e = line_end(t, e + 1);
  return {s, e};
}

std::optional<Span> brace_unit(std::string_view t, const BraceIndex& idx, std::size_t pos) {
  if (!idx.balanced) return std::nullopt;
  auto unit_for = [&](const BracePair& p) -> std::optional<Span> {
    const std::size_t hs = header_start(t, idx, p.open);
    if (!is_method_header(code_only(t, idx, hs, p.open))) return std::nullopt;
    std::size_t first = hs;
    while (first < p.open && std::isspace(static_cast<unsigned char>(t[first]))) ++first;
    return Span{std::max(hs, line_start(t, first)), p.close + 1};
  };
  // Innermost enclosing pair first.
  for (auto it = idx.pairs.rbegin(); it != idx.pairs.rend(); ++it) {
    if (it->open < pos && pos < it->close) {
      if (auto u = unit_for(*it)) return u;
    }
  }
  // The match may sit in a method header (e.g. an app method named getDateTime).
  auto next = std::lower_bound(idx.pairs.begin(), idx.pairs.end(), pos,
                               [](const BracePair& p, std::size_t v) { return p.open < v; });
  if (next != idx.pairs.end()) {
    bool crosses = false;
    for (std::size_t k = pos; k < next->open; ++k) {
      if (idx.is_code[k] && is_boundary(t[k])) {
        crosses = true;
        break;
      }
    }
    if (!crosses) return unit_for(*next);
  }
  return std::nullopt;
}

std::optional<Span> smali_unit(std::string_view t, std::size_t pos) {
  std::size_t ls = line_start(t, pos);
  while (true) {
    const std::string_view line = trim(t.substr(ls, line_end(t, ls) - ls));
    if (line.starts_with(".method")) break;
    if (line.starts_with(".end method") && ls < line_start(t, pos)) return std::nullopt;
    if (ls == 0) return std::nullopt;
    ls = line_start(t, ls - 1);
  }
  std::size_t le = line_start(t, pos);
  while (le < t.size()) {
    const std::size_t e = line_end(t, le);
    if (trim(t.substr(le, e - le)).starts_with(".end method")) return Span{ls, e};
    le = e + 1;
  }
  return std::nullopt;
}

CodeBlock make_block(std::string_view source_id, std::string_view t, Span unit, const std::vector<KeywordHit>& hits,
                     const KeywordCatalog& catalog, std::size_t max_chars) {
  CodeBlock b;
  b.source_id = std::string(source_id);
  Span window = unit;
  if (unit.end - unit.start > max_chars) {
    const KeywordHit& anchor = hits.front();
    const std::size_t center = anchor.pos + anchor.len / 2;
    std::size_t ws = center > max_chars / 2 ? center - max_chars / 2 : 0;
    ws = std::clamp(ws, unit.start, unit.end - max_chars);
    window = {ws, ws + max_chars};
    b.truncated = true;
  }
  b.span = window;
  b.text = std::string(t.substr(window.start, window.end - window.start));
  for (const KeywordHit& h : hits) {
    if (h.pos >= window.start && h.pos + h.len <= window.end) {
      const KeywordEntry& e = catalog.at(h.entry);
      b.matched_keywords.insert(e.keyword);
      b.implicated_types.insert(e.types.begin(), e.types.end());
    }
  }
  return b;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::vector<CodeBlock> extract_from_source(std::string_view source_id, std::string_view text,
                                           const KeywordCatalog& catalog, const ExtractOptions& options) {
  if (options.max_block_chars == 0) throw std::invalid_argument("max_block_chars must be positive");
  const std::vector<KeywordHit> hits = catalog.scan(text);
  if (hits.empty()) return {};

  const bool smali = ends_with(source_id, ".smali");
  const BraceIndex idx = smali ? BraceIndex{} : index_braces(text);

  std::map<std::pair<std::size_t, std::size_t>, std::vector<KeywordHit>> units;
  std::vector<std::pair<Span, std::vector<KeywordHit>>> windows;
  for (const KeywordHit& h : hits) {
    const std::optional<Span> unit = smali ? smali_unit(text, h.pos) : brace_unit(text, idx, h.pos);
    if (unit) {
      units[{unit->start, unit->end}].push_back(h);
    } else {
      windows.push_back({fallback_window(text, h.pos, options.fallback_lines), {h}});
    }
  }
  // Overlapping fallback windows merge into one.
  std::vector<std::pair<Span, std::vector<KeywordHit>>> merged;
  for (auto& w : windows) {
    if (!merged.empty() && w.first.start <= merged.back().first.end) {
      merged.back().first.end = std::max(merged.back().first.end, w.first.end);
      merged.back().second.insert(merged.back().second.end(), w.second.begin(), w.second.end());
    } else {
      merged.push_back(std::move(w));
    }
  }

  std::vector<CodeBlock> out;
  for (const auto& [span, unit_hits] : units) {
    out.push_back(make_block(source_id, text, {span.first, span.second}, unit_hits, catalog, options.max_block_chars));
  }
  for (const auto& [span, unit_hits] : merged) {
    out.push_back(make_block(source_id, text, span, unit_hits, catalog, options.max_block_chars));
  }
  std::stable_sort(out.begin(), out.end(), [](const CodeBlock& a, const CodeBlock& b) {
    return a.span.start != b.span.start ? a.span.start < b.span.start : a.span.end < b.span.end;
  });
  return out;
}

ExtractionResult extract_code_blocks(const std::filesystem::path& source_root, const KeywordCatalog& catalog,
                                     const ExtractOptions& options) {
  namespace fs = std::filesystem;
  ExtractionResult result;
  std::vector<fs::path> files;
  std::error_code ec;
  fs::recursive_directory_iterator it(source_root, fs::directory_options::skip_permission_denied, ec);
  if (ec) {
    result.errors.push_back({source_root.string(), std::string(errc_name(Errc::UnreadableSource)) + ": " + ec.message()});
    return result;
  }
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) {
      result.errors.push_back({it->path().string(), std::string(errc_name(Errc::UnreadableSource)) + ": " + ec.message()});
      ec.clear();
      continue;
    }
    const std::string ext = it->path().extension().string();
    if (std::find(options.extensions.begin(), options.extensions.end(), ext) == options.extensions.end()) continue;
    std::error_code fec;
    if (it->is_regular_file(fec)) {
      files.push_back(it->path());
    } else if (it->is_symlink(fec)) {
      result.errors.push_back({it->path().string(), std::string(errc_name(Errc::UnreadableSource)) + ": dangling link"});
    }
  }
  std::vector<std::string> ids;
  for (const auto& f : files) ids.push_back(f.lexically_relative(source_root).generic_string());
  std::vector<std::size_t> order(files.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });

  std::vector<std::vector<CodeBlock>> per_file(files.size());
  std::vector<std::optional<SourceError>> per_error(files.size());
  parallel_for(order.size(), options.parallelism, [&](std::size_t k) {
    const std::size_t i = order[k];
    std::ifstream in(files[i], std::ios::binary);
    std::ostringstream buf;
    if (in) buf << in.rdbuf();
    if (!in || in.bad()) {
      per_error[k] = SourceError{files[i].string(), std::string(errc_name(Errc::UnreadableSource)) + ": cannot read file"};
      return;
    }
    per_file[k] = extract_from_source(ids[i], buf.str(), catalog, options);
  });
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (per_error[k]) result.errors.push_back(*per_error[k]);
    for (auto& b : per_file[k]) result.blocks.push_back(std::move(b));
  }
  return result;
}

}  // namespace exifaudit
