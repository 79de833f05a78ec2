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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "exifaudit/bytes.hpp"
#include "exifaudit/metadata_type.hpp"

namespace exifaudit {

enum class Ifd { Primary, Exif, Gps };
std::string_view to_string(Ifd ifd);

// TIFF field types.
enum class ExifType : std::uint16_t {
  Byte = 1,
  Ascii = 2,
  Short = 3,
  Long = 4,
  Rational = 5,
  SByte = 6,
  Undefined = 7,
  SShort = 8,
  SLong = 9,
  SRational = 10,
  Float = 11,
  Double = 12,
};

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool operator==(const Rational&) const = default;
};

// Ascii -> string; integer types -> int64 list; (S)Rational -> Rational
// list; Float/Double -> double list; Undefined -> raw bytes.
using ExifValue = std::variant<std::string, std::vector<std::int64_t>, std::vector<Rational>, std::vector<double>, Bytes>;

struct ExifRecord {
  std::uint16_t tag_id = 0;
  Ifd ifd = Ifd::Primary;
  ExifType value_type = ExifType::Undefined;
  ExifValue value;
  bool operator==(const ExifRecord&) const = default;
};

namespace tags {
inline constexpr std::uint16_t kMake = 0x010F;
inline constexpr std::uint16_t kModel = 0x0110;
inline constexpr std::uint16_t kOrientation = 0x0112;
inline constexpr std::uint16_t kSoftware = 0x0131;
inline constexpr std::uint16_t kDateTime = 0x0132;
inline constexpr std::uint16_t kExifIfdPointer = 0x8769;
inline constexpr std::uint16_t kGpsIfdPointer = 0x8825;
inline constexpr std::uint16_t kExposureTime = 0x829A;
inline constexpr std::uint16_t kIsoSpeed = 0x8827;
inline constexpr std::uint16_t kDateTimeOriginal = 0x9003;
inline constexpr std::uint16_t kDateTimeDigitized = 0x9004;
inline constexpr std::uint16_t kColorSpace = 0xA001;
inline constexpr std::uint16_t kInteropIfdPointer = 0xA005;
inline constexpr std::uint16_t kBodySerialNumber = 0xA431;
inline constexpr std::uint16_t kGpsVersionId = 0x0000;
inline constexpr std::uint16_t kGpsLatitudeRef = 0x0001;
inline constexpr std::uint16_t kGpsLatitude = 0x0002;
inline constexpr std::uint16_t kGpsLongitudeRef = 0x0003;
inline constexpr std::uint16_t kGpsLongitude = 0x0004;
inline constexpr std::uint16_t kGpsAltitudeRef = 0x0005;
inline constexpr std::uint16_t kGpsAltitude = 0x0006;
}  // namespace tags

// Records of the first APP1 Exif segment, in IFD walk order (Primary, then
// Exif, then GPS). IFD1 (thumbnail) and the interoperability IFD are not
// walked; pointer entries are not reported as records. A tag repeated in one
// IFD keeps its first occurrence. Throws Error{NotJpeg} or
// Error{MalformedExif}.
std::vector<ExifRecord> parse_exif(ByteView jpeg);

// Which (IFD, tag) pairs reveal which metadata type.
struct SensitiveTagTable {
  std::map<std::pair<Ifd, std::uint16_t>, MetadataType> tags;
  bool all_gps_tags = true;  // every GPS-IFD record counts as Gps

  static const SensitiveTagTable& defaults();
};

struct SensitiveFindings {
  TypeSet present;
  std::map<MetadataType, std::vector<ExifRecord>> evidence;
};

SensitiveFindings detect_sensitive_types(const std::vector<ExifRecord>& records,
                                         const SensitiveTagTable& table = SensitiveTagTable::defaults());

// Removes every APP1 Exif segment ahead of the first scan; all other bytes,
// including everything from SOS onward, are copied unchanged. Throws
// Error{NotJpeg}.
Bytes strip_metadata(ByteView jpeg);

// Offset of the first SOS marker. Throws Error{NotJpeg}.
std::size_t scan_offset(ByteView jpeg);

// ---- fixture generation ----

struct GpsFix {
  double latitude = 0;   // degrees, negative south
  double longitude = 0;  // degrees, negative west
  double altitude_m = 0;
};

// Sensitive fields are written only when set; a few neutral tags
// (Orientation, Software, ExposureTime, ISO, ColorSpace) are always present.
struct ExifContents {
  std::optional<std::string> datetime;  // "YYYY:MM:DD HH:MM:SS"
  std::optional<std::string> make;
  std::optional<std::string> model;
  std::optional<std::string> serial;
  std::optional<GpsFix> gps;
  std::uint16_t orientation = 1;
  Endian byte_order = Endian::Little;
};

// "Exif\0\0" followed by a TIFF structure.
Bytes encode_exif_payload(const ExifContents& contents);

// Baseline grayscale JPEG with one DC level per 8x8 block (AC all zero).
// width and height are rounded up to multiples of 8; dc_levels is cycled
// over the blocks and clamped to [-60, 60].
struct JpegSpec {
  std::uint16_t width = 16;
  std::uint16_t height = 16;
  std::vector<int> dc_levels = {0};
};
Bytes encode_jpeg(const JpegSpec& spec, const std::optional<ExifContents>& exif = std::nullopt);

// Strips existing Exif, then inserts a fresh APP1 right after SOI.
Bytes with_exif(ByteView jpeg, const ExifContents& contents);

// The ExifContents fields that carry `types`, copied from `all`.
ExifContents restrict_to(const ExifContents& all, const TypeSet& types);

}  // namespace exifaudit
