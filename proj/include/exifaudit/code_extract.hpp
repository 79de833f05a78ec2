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

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "exifaudit/catalog.hpp"
#include "exifaudit/metadata_type.hpp"

namespace exifaudit {

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

// An EXIF-related fragment of app code; the unit sent toward the model.
struct CodeBlock {
  std::string source_id;
  Span span;
  std::string text;
  std::set<std::string> matched_keywords;
  TypeSet implicated_types;
  bool truncated = false;
};

struct ExtractOptions {
  std::size_t max_block_chars = 4000;
  // Context kept on each side of a match when no enclosing method is found.
  std::size_t fallback_lines = 40;
  std::vector<std::string> extensions = {".java", ".kt", ".smali"};
  std::size_t parallelism = 1;
};

struct SourceError {
  std::string path;
  std::string message;
};

struct ExtractionResult {
  std::vector<CodeBlock> blocks;
  std::vector<SourceError> errors;
};

// Blocks for one in-memory source file. Smali files (by source_id suffix)
// use .method/.end method boundaries; everything else uses braces.
std::vector<CodeBlock> extract_from_source(std::string_view source_id, std::string_view text,
                                           const KeywordCatalog& catalog, const ExtractOptions& options);

// Walks decompiler output under source_root. Files that cannot be read are
// reported in `errors` (as UnreadableSource) and skipped. Blocks are ordered
// by source_id, then span start.
ExtractionResult extract_code_blocks(const std::filesystem::path& source_root, const KeywordCatalog& catalog,
                                     const ExtractOptions& options = {});

}  // namespace exifaudit
