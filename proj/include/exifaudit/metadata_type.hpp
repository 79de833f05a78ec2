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

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace exifaudit {

// The five kinds of sensitive EXIF metadata the audit tracks.
enum class MetadataType { DateTime, SmartphoneModel, SmartphoneBrand, DeviceSerialNumber, Gps };

inline constexpr std::array<MetadataType, 5> kAllMetadataTypes = {
    MetadataType::DateTime, MetadataType::SmartphoneModel, MetadataType::SmartphoneBrand,
    MetadataType::DeviceSerialNumber, MetadataType::Gps};

using TypeSet = std::set<MetadataType>;

// Stable serialized names; these appear in reports, catalogs and verdict JSON.
constexpr std::string_view to_string(MetadataType t) noexcept {
  switch (t) {
    case MetadataType::DateTime: return "datetime";
    case MetadataType::SmartphoneModel: return "smartphone_model";
    case MetadataType::SmartphoneBrand: return "smartphone_brand";
    case MetadataType::DeviceSerialNumber: return "device_serial_number";
    case MetadataType::Gps: return "gps";
  }
  return "";
}

// Accepts either serialized names or enumerator names ("Gps", "DateTime", ...).
std::optional<MetadataType> parse_metadata_type(std::string_view name);

std::vector<std::string> to_strings(const TypeSet& types);

}  // namespace exifaudit
