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

#include "exifaudit/apk.hpp"

#include <algorithm>
#include <regex>

namespace exifaudit {

ApkPackage open_package(const std::string& path) {
  ApkPackage pkg;
  pkg.archive_ = zip::Archive::open(path);
  for (const auto& e : pkg.archive_.entries()) pkg.entries_.push_back({e.name, e.uncompressed_size});
  const zip::EntryInfo* manifest = pkg.archive_.find(kManifestEntry);
  if (!manifest) throw Error(Errc::MissingManifest, path + " has no " + kManifestEntry);
  pkg.manifest_ = pkg.archive_.read(*manifest);
  return pkg;
}

std::vector<std::string> ApkPackage::dex_entries() const {
  static const std::regex kDexName(R"(classes\d*\.dex)");
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (std::regex_match(e.name, kDexName)) out.push_back(e.name);
  }
  return out;
}

Bytes ApkPackage::read_entry(std::string_view name) const {
  const zip::EntryInfo* e = archive_.find(name);
  if (!e) throw Error(Errc::IoFailure, path() + " has no entry " + std::string(name));
  return archive_.read(*e);
}

GatePolicy GatePolicy::strict() {
  return {"strict",
          {{"android.permission.READ_EXTERNAL_STORAGE", {"android.permission.READ_EXTERNAL_STORAGE"}},
           {"android.permission.WRITE_EXTERNAL_STORAGE", {"android.permission.WRITE_EXTERNAL_STORAGE"}},
           {"android.permission.INTERNET", {"android.permission.INTERNET"}}}};
}

GatePolicy GatePolicy::modern() {
  return {"modern",
          {{"android.permission.READ_EXTERNAL_STORAGE",
            {"android.permission.READ_EXTERNAL_STORAGE", "android.permission.READ_MEDIA_IMAGES",
             "android.permission.READ_MEDIA_VISUAL_USER_SELECTED"}},
           {"android.permission.WRITE_EXTERNAL_STORAGE",
            {"android.permission.WRITE_EXTERNAL_STORAGE", "android.permission.MANAGE_EXTERNAL_STORAGE"}},
           {"android.permission.INTERNET", {"android.permission.INTERNET"}}}};
}

std::optional<GatePolicy> GatePolicy::by_name(std::string_view name) {
  if (name == "strict") return strict();
  if (name == "modern") return modern();
  return std::nullopt;
}

bool is_image_mime(std::string_view mime) {
  return mime == "*/*" || mime.starts_with("image/");
}

GateDecision gate_filter(const ManifestInfo& info, const GatePolicy& policy) {
  GateDecision d;
  for (const auto& group : policy.required) {
    const bool satisfied = std::any_of(group.accepted.begin(), group.accepted.end(), [&](const std::string& p) {
      return info.requested_permissions.count(p) > 0;
    });
    if (!satisfied) {
      d.missing_permissions.insert(group.canonical);
      d.reasons.push_back("missing permission " + group.canonical);
    }
  }
  d.image_share_supported = std::any_of(info.intent_mime_types.begin(), info.intent_mime_types.end(),
                                        [](const std::string& m) { return is_image_mime(m); });
  if (!d.image_share_supported) {
    d.reasons.push_back(info.intent_mime_types.empty() ? "no intent-filter declares a mimeType"
                                                       : "no intent-filter mimeType accepts images");
  }
  d.passes = d.missing_permissions.empty() && d.image_share_supported;
  return d;
}

}  // namespace exifaudit
