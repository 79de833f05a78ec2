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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "exifaudit/bytes.hpp"
#include "exifaudit/error.hpp"
#include "exifaudit/hash.hpp"
#include "exifaudit/metadata_type.hpp"

namespace exifaudit {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NotAnArchive: return "NotAnArchive";
    case Errc::MissingManifest: return "MissingManifest";
    case Errc::MalformedAxml: return "MalformedAxml";
    case Errc::UnsupportedEncoding: return "UnsupportedEncoding";
    case Errc::MalformedDex: return "MalformedDex";
    case Errc::NoDexEntries: return "NoDexEntries";
    case Errc::UnreadableSource: return "UnreadableSource";
    case Errc::BadCatalog: return "BadCatalog";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::CorruptStore: return "CorruptStore";
    case Errc::UnknownTemplate: return "UnknownTemplate";
    case Errc::PromptOverflow: return "PromptOverflow";
    case Errc::BackendTimeout: return "BackendTimeout";
    case Errc::BackendRejected: return "BackendRejected";
    case Errc::UnparseableSummary: return "UnparseableSummary";
    case Errc::NotJpeg: return "NotJpeg";
    case Errc::MalformedExif: return "MalformedExif";
    case Errc::IoFailure: return "IoFailure";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::IoFailure, "read failed for " + path);
  return out;
}

void write_file_atomic(const std::string& path, ByteView data) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error(Errc::IoFailure, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error(Errc::IoFailure, "rename to " + path + " failed: " + ec.message());
}

std::string fnv1a64_digest(std::string_view s) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t h = fnv1a64(s);
  std::string out = "fnv1a64:";
  for (int shift = 60; shift >= 0; shift -= 4) out.push_back(kHex[(h >> shift) & 0xF]);
  return out;
}

std::uint32_t crc32(ByteView data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  std::size_t off = 0;
  while (off < data.size()) {
    std::size_t n = std::min<std::size_t>(data.size() - off, 1u << 30);
    crc = ::crc32(crc, data.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::optional<MetadataType> parse_metadata_type(std::string_view name) {
  for (MetadataType t : kAllMetadataTypes) {
    if (name == to_string(t)) return t;
  }
  if (name == "DateTime") return MetadataType::DateTime;
  if (name == "SmartphoneModel") return MetadataType::SmartphoneModel;
  if (name == "SmartphoneBrand") return MetadataType::SmartphoneBrand;
  if (name == "DeviceSerialNumber") return MetadataType::DeviceSerialNumber;
  if (name == "Gps") return MetadataType::Gps;
  return std::nullopt;
}

std::vector<std::string> to_strings(const TypeSet& types) {
  std::vector<std::string> out;
  for (MetadataType t : types) out.emplace_back(to_string(t));
  return out;
}

}  // namespace exifaudit
