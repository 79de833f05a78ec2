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
#include <optional>
#include <string>
#include <vector>

#include "exifaudit/bytes.hpp"

namespace exifaudit::zip {

enum class Method : std::uint16_t { Stored = 0, Deflated = 8 };

struct EntryInfo {
  std::string name;
  Method method = Method::Stored;
  std::uint32_t crc = 0;
  std::uint64_t compressed_size = 0;
  std::uint64_t uncompressed_size = 0;
  std::uint64_t local_header_offset = 0;
};

// Reads the central directory of a ZIP file. Entry payloads are read on
// demand, one seek per call, so listing a large archive stays cheap.
class Archive {
 public:
  // Throws Error{NotAnArchive} when no valid end-of-central-directory record
  // is found or the directory is inconsistent.
  static Archive open(const std::string& path);

  const std::string& path() const { return path_; }
  const std::vector<EntryInfo>& entries() const { return entries_; }
  const EntryInfo* find(std::string_view name) const;

  // Decompresses one entry and verifies its CRC.
  Bytes read(const EntryInfo& entry) const;

 private:
  std::string path_;
  std::vector<EntryInfo> entries_;
};

// Builds an archive in memory. Used for test fixtures and synthetic corpora.
class Writer {
 public:
  void add(std::string name, ByteView data, Method method = Method::Stored);
  Bytes finish() &&;

 private:
  struct Pending {
    std::string name;
    Method method;
    std::uint32_t crc;
    std::uint32_t compressed_size;
    std::uint32_t uncompressed_size;
    std::uint32_t offset;
  };
  ByteWriter out_;
  std::vector<Pending> central_;
};

}  // namespace exifaudit::zip
