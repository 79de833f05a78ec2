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
#include <set>
#include <string>
#include <vector>

#include "exifaudit/axml.hpp"
#include "exifaudit/bytes.hpp"
#include "exifaudit/zip.hpp"

namespace exifaudit {

inline constexpr char kManifestEntry[] = "AndroidManifest.xml";

struct ApkEntry {
  std::string name;
  std::uint64_t byte_length = 0;
};

// An opened APK: its entry listing and the raw (still binary) manifest.
// Other entries stay compressed on disk until read_entry is called.
class ApkPackage {
 public:
  const std::string& path() const { return archive_.path(); }
  const std::vector<ApkEntry>& entries() const { return entries_; }
  const Bytes& manifest_bytes() const { return manifest_; }

  // Entry names matching classes.dex, classes2.dex, ... in archive order.
  std::vector<std::string> dex_entries() const;
  Bytes read_entry(std::string_view name) const;

 private:
  friend ApkPackage open_package(const std::string& path);
  zip::Archive archive_;
  std::vector<ApkEntry> entries_;
  Bytes manifest_;
};

// Throws Error{NotAnArchive} or Error{MissingManifest}.
ApkPackage open_package(const std::string& path);

// A required capability satisfied by any one of several permission names,
// e.g. storage read access via READ_EXTERNAL_STORAGE or READ_MEDIA_IMAGES.
struct PermissionGroup {
  std::string canonical;
  std::vector<std::string> accepted;
};

struct GatePolicy {
  std::string name;
  std::vector<PermissionGroup> required;

  // READ_EXTERNAL_STORAGE, WRITE_EXTERNAL_STORAGE and INTERNET, literally.
  static GatePolicy strict();
  // Also accepts the scoped-storage replacements introduced in Android 11/13.
  static GatePolicy modern();
  static std::optional<GatePolicy> by_name(std::string_view name);
};

struct GateDecision {
  bool passes = false;
  std::set<std::string> missing_permissions;
  bool image_share_supported = false;
  std::vector<std::string> reasons;
};

// True for "image/*", any "image/<subtype>", and "*/*".
bool is_image_mime(std::string_view mime);

GateDecision gate_filter(const ManifestInfo& info, const GatePolicy& policy);

}  // namespace exifaudit
