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
#include <set>
#include <string>
#include <vector>

#include "exifaudit/bytes.hpp"

namespace exifaudit {

// What the audit needs from an AndroidManifest.xml.
struct ManifestInfo {
  std::string package_name;
  std::set<std::string> requested_permissions;
  std::set<std::string> intent_mime_types;
  std::size_t activity_count = 0;

  bool operator==(const ManifestInfo&) const = default;
};

namespace axml {

// Chunk types from the Android resource format (ResourceTypes.h).
inline constexpr std::uint16_t kStringPoolType = 0x0001;
inline constexpr std::uint16_t kXmlType = 0x0003;
inline constexpr std::uint16_t kXmlStartNamespace = 0x0100;
inline constexpr std::uint16_t kXmlEndNamespace = 0x0101;
inline constexpr std::uint16_t kXmlStartElement = 0x0102;
inline constexpr std::uint16_t kXmlEndElement = 0x0103;
inline constexpr std::uint16_t kXmlCdata = 0x0104;
inline constexpr std::uint16_t kXmlResourceMap = 0x0180;

inline constexpr std::uint32_t kSortedFlag = 1u << 0;
inline constexpr std::uint32_t kUtf8Flag = 1u << 8;

inline constexpr std::uint8_t kTypeString = 0x03;
inline constexpr std::uint32_t kNoIndex = 0xFFFFFFFF;

inline constexpr std::uint32_t kAttrName = 0x01010003;
inline constexpr std::uint32_t kAttrMimeType = 0x01010026;

inline constexpr char kAndroidNs[] = "http://schemas.android.com/apk/res/android";

// Input to the fixture encoder. The encoder emits
//   <manifest package=...>
//     <uses-permission android:name=.../>...
//     <application>
//       <activity android:name=".Activity0"> (activity_count times)
//         first activity only, when mime_types is non-empty:
//         <intent-filter> <action SEND/> <data android:mimeType=.../>... </intent-filter>
// The activity count is raised to 1 when mime types are present.
struct ManifestFixture {
  std::string package_name = "com.example.app";
  std::vector<std::string> permissions;
  std::vector<std::string> mime_types;
  std::size_t activity_count = 1;
  bool utf8_pool = false;
};

Bytes encode_manifest(const ManifestFixture& fixture);

}  // namespace axml

// Throws Error{MalformedAxml} when a chunk violates its declared lengths or a
// string index is out of range, and Error{UnsupportedEncoding} when the string
// pool flags name an encoding other than UTF-8 or UTF-16.
ManifestInfo parse_binary_manifest(ByteView bytes);

}  // namespace exifaudit
