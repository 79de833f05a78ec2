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

#include "exifaudit/exif.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>

namespace exifaudit {

std::string_view to_string(Ifd ifd) {
  switch (ifd) {
    case Ifd::Primary: return "primary";
    case Ifd::Exif: return "exif";
    case Ifd::Gps: return "gps";
  }
  return "";
}

namespace {

constexpr std::uint8_t kSoi = 0xD8;
constexpr std::uint8_t kEoi = 0xD9;
constexpr std::uint8_t kSos = 0xDA;
constexpr std::uint8_t kApp1 = 0xE1;
constexpr std::string_view kExifMagic{"Exif\0\0", 6};

struct Segment {
  std::uint8_t marker = 0;
  std::size_t start = 0;    // offset of the 0xFF
  std::size_t payload = 0;  // offset after the length field
  std::size_t end = 0;      // one past the segment
};

bool standalone(std::uint8_t m) { return m == 0x01 || (m >= 0xD0 && m <= 0xD7); }

// Segments between SOI and the first SOS; the SOS segment itself is last.
std::vector<Segment> header_segments(ByteView jpeg) {
  if (jpeg.size() < 4 || jpeg[0] != 0xFF || jpeg[1] != kSoi) throw Error(Errc::NotJpeg, "missing SOI marker");
  std::vector<Segment> out;
  std::size_t pos = 2;
  while (true) {
    if (pos >= jpeg.size() || jpeg[pos] != 0xFF)
      throw Error(Errc::NotJpeg, "expected marker at offset " + std::to_string(pos));
    Segment s;
    s.start = pos;
    while (pos < jpeg.size() && jpeg[pos] == 0xFF) ++pos;  // fill bytes
    if (pos >= jpeg.size()) throw Error(Errc::NotJpeg, "truncated marker");
    s.marker = jpeg[pos++];
    if (s.marker == kEoi || s.marker == kSoi) throw Error(Errc::NotJpeg, "no scan before end of image");
    if (standalone(s.marker)) {
      s.payload = s.end = pos;
      out.push_back(s);
      continue;
    }
    if (pos + 2 > jpeg.size()) throw Error(Errc::NotJpeg, "truncated segment length");
    std::size_t len = (std::size_t{jpeg[pos]} << 8) | jpeg[pos + 1];
    if (len < 2 || pos + len > jpeg.size())
      throw Error(Errc::NotJpeg, "segment at offset " + std::to_string(s.start) + " overruns file");
    s.payload = pos + 2;
    s.end = pos + len;
    out.push_back(s);
    if (s.marker == kSos) return out;
    pos = s.end;
  }
}

bool is_exif_app1(ByteView jpeg, const Segment& s) {
  if (s.marker != kApp1 || s.end - s.payload < kExifMagic.size()) return false;
  return std::memcmp(jpeg.data() + s.payload, kExifMagic.data(), kExifMagic.size()) == 0;
}

std::size_t type_size(std::uint16_t type) {
  switch (type) {
    case 1: case 2: case 6: case 7: return 1;
    case 3: case 8: return 2;
    case 4: case 9: case 11: return 4;
    case 5: case 10: case 12: return 8;
    default: return 0;
  }
}

class IfdWalker {
 public:
  explicit IfdWalker(ByteView tiff) : r_(tiff, Errc::MalformedExif) {
    if (tiff.size() < 8) r_.fail("TIFF header truncated");
    if (tiff[0] == 'I' && tiff[1] == 'I') r_.set_endian(Endian::Little);
    else if (tiff[0] == 'M' && tiff[1] == 'M') r_.set_endian(Endian::Big);
    else r_.fail("bad TIFF byte order mark");
    if (r_.u16_at(2) != 42) r_.fail("bad TIFF magic");
  }

  std::vector<ExifRecord> run() {
    std::uint32_t ifd0 = r_.u32_at(4);
    walk(ifd0, Ifd::Primary);
    if (exif_off_) walk(*exif_off_, Ifd::Exif);
    if (gps_off_) walk(*gps_off_, Ifd::Gps);
    return std::move(out_);
  }

 private:
  void walk(std::uint32_t off, Ifd ifd) {
    if (!visited_.insert(off).second) return;  // shared or looping IFD
    std::uint16_t count = r_.u16_at(off);
    std::size_t table_end = std::size_t{off} + 2 + 12u * count;
    if (table_end > r_.size()) r_.fail("IFD at offset " + std::to_string(off) + " overruns segment");
    std::set<std::uint16_t> seen;
    for (std::uint16_t i = 0; i < count; ++i) {
      std::size_t e = std::size_t{off} + 2 + 12u * i;
      std::uint16_t tag = r_.u16_at(e);
      std::uint16_t type = r_.u16_at(e + 2);
      std::uint32_t n = r_.u32_at(e + 4);
      std::size_t unit = type_size(type);
      if (unit == 0) continue;
      std::uint64_t total = std::uint64_t{n} * unit;
      std::size_t data = e + 8;
      if (total > 4) {
        data = r_.u32_at(e + 8);
        if (data > r_.size() || total > r_.size() - data)
          r_.fail("value of tag " + std::to_string(tag) + " lies outside the segment");
      }
      if (ifd == Ifd::Primary && (tag == tags::kExifIfdPointer || tag == tags::kGpsIfdPointer)) {
        std::uint32_t target = type == 3 ? r_.u16_at(data) : r_.u32_at(data);
        auto& slot = tag == tags::kExifIfdPointer ? exif_off_ : gps_off_;
        if (!slot) slot = target;
        continue;
      }
      if (ifd == Ifd::Exif && tag == tags::kInteropIfdPointer) continue;
      if (!seen.insert(tag).second) continue;
      out_.push_back({tag, ifd, static_cast<ExifType>(type), decode(type, n, data)});
    }
  }

  ExifValue decode(std::uint16_t type, std::uint32_t n, std::size_t data) {
    auto u = [&](std::size_t off, std::size_t w) -> std::uint64_t {
      return w == 1 ? r_.bytes_at(off) : w == 2 ? r_.u16_at(off) : r_.u32_at(off);
    };
    switch (type) {
      case 2: {
        std::string s;
        for (std::uint32_t i = 0; i < n; ++i) s.push_back(static_cast<char>(r_.bytes_at(data + i)));
        while (!s.empty() && s.back() == '\0') s.pop_back();
        return s;
      }
      case 7: {
        Bytes b;
        for (std::uint32_t i = 0; i < n; ++i) b.push_back(r_.bytes_at(data + i));
        return b;
      }
      case 1: case 3: case 4: case 6: case 8: case 9: {
        std::size_t w = type_size(type);
        std::vector<std::int64_t> v;
        for (std::uint32_t i = 0; i < n; ++i) {
          std::uint64_t raw = u(data + i * w, w);
          if (type >= 6) {  // sign-extend
            std::uint64_t sign = std::uint64_t{1} << (8 * w - 1);
            v.push_back(static_cast<std::int64_t>((raw ^ sign) - sign));
          } else {
            v.push_back(static_cast<std::int64_t>(raw));
          }
        }
        return v;
      }
      case 5: case 10: {
        std::vector<Rational> v;
        for (std::uint32_t i = 0; i < n; ++i) {
          std::uint32_t a = r_.u32_at(data + 8u * i), b = r_.u32_at(data + 8u * i + 4);
          if (type == 10) v.push_back({static_cast<std::int32_t>(a), static_cast<std::int32_t>(b)});
          else v.push_back({a, b});
        }
        return v;
      }
      case 11: {
        std::vector<double> v;
        for (std::uint32_t i = 0; i < n; ++i) v.push_back(std::bit_cast<float>(r_.u32_at(data + 4u * i)));
        return v;
      }
      default: {  // 12
        std::vector<double> v;
        for (std::uint32_t i = 0; i < n; ++i) {
          std::uint64_t hi = r_.u32_at(data + 8u * i), lo = r_.u32_at(data + 8u * i + 4);
          std::uint64_t bits = r_.endian() == Endian::Big ? (hi << 32 | lo) : (lo << 32 | hi);
          v.push_back(std::bit_cast<double>(bits));
        }
        return v;
      }
    }
  }

  struct Reader : ByteReader {
    using ByteReader::ByteReader;
    std::uint8_t bytes_at(std::size_t off) const {
      ByteReader copy = *this;
      copy.seek(off);
      return copy.u8();
    }
  } r_;
  std::set<std::uint32_t> visited_;
  std::optional<std::uint32_t> exif_off_, gps_off_;
  std::vector<ExifRecord> out_;
};

}  // namespace

std::vector<ExifRecord> parse_exif(ByteView jpeg) {
  for (const Segment& s : header_segments(jpeg)) {
    if (!is_exif_app1(jpeg, s)) continue;
    ByteView tiff = jpeg.subspan(s.payload + kExifMagic.size(), s.end - s.payload - kExifMagic.size());
    return IfdWalker(tiff).run();
  }
  return {};
}

const SensitiveTagTable& SensitiveTagTable::defaults() {
  static const SensitiveTagTable table = [] {
    SensitiveTagTable t;
    t.tags[{Ifd::Primary, tags::kDateTime}] = MetadataType::DateTime;
    t.tags[{Ifd::Exif, tags::kDateTime}] = MetadataType::DateTime;
    t.tags[{Ifd::Exif, tags::kDateTimeOriginal}] = MetadataType::DateTime;
    t.tags[{Ifd::Exif, tags::kDateTimeDigitized}] = MetadataType::DateTime;
    t.tags[{Ifd::Primary, tags::kMake}] = MetadataType::SmartphoneBrand;
    t.tags[{Ifd::Primary, tags::kModel}] = MetadataType::SmartphoneModel;
    t.tags[{Ifd::Exif, tags::kBodySerialNumber}] = MetadataType::DeviceSerialNumber;
    t.all_gps_tags = true;
    return t;
  }();
  return table;
}

SensitiveFindings detect_sensitive_types(const std::vector<ExifRecord>& records, const SensitiveTagTable& table) {
  SensitiveFindings f;
  for (const ExifRecord& r : records) {
    std::optional<MetadataType> type;
    if (auto it = table.tags.find({r.ifd, r.tag_id}); it != table.tags.end()) type = it->second;
    else if (r.ifd == Ifd::Gps && table.all_gps_tags) type = MetadataType::Gps;
    if (!type) continue;
    f.present.insert(*type);
    f.evidence[*type].push_back(r);
  }
  return f;
}

Bytes strip_metadata(ByteView jpeg) {
  auto segs = header_segments(jpeg);
  Bytes out(jpeg.begin(), jpeg.begin() + 2);
  std::size_t copied = 2;
  for (const Segment& s : segs) {
    if (!is_exif_app1(jpeg, s)) continue;
    out.insert(out.end(), jpeg.begin() + copied, jpeg.begin() + s.start);
    copied = s.end;
  }
  out.insert(out.end(), jpeg.begin() + copied, jpeg.end());
  return out;
}

std::size_t scan_offset(ByteView jpeg) { return header_segments(jpeg).back().start; }

// ---- writer ----

namespace {

struct Entry {
  std::uint16_t tag;
  std::uint16_t type;
  std::uint32_t count;
  Bytes value;  // already in the target byte order
};

class EntryFactory {
 public:
  explicit EntryFactory(Endian e) : e_(e) {}
  Entry ascii(std::uint16_t tag, std::string_view s) const {
    Bytes b(s.begin(), s.end());
    b.push_back(0);
    return {tag, 2, static_cast<std::uint32_t>(b.size()), std::move(b)};
  }
  Entry bytes(std::uint16_t tag, std::vector<std::uint8_t> v) const {
    return {tag, 1, static_cast<std::uint32_t>(v.size()), std::move(v)};
  }
  Entry shorts(std::uint16_t tag, std::vector<std::uint16_t> v) const {
    ByteWriter w(e_);
    for (auto x : v) w.u16(x);
    return {tag, 3, static_cast<std::uint32_t>(v.size()), std::move(w).take()};
  }
  Entry longs(std::uint16_t tag, std::uint32_t v) const {
    ByteWriter w(e_);
    w.u32(v);
    return {tag, 4, 1, std::move(w).take()};
  }
  Entry rationals(std::uint16_t tag, std::vector<std::pair<std::uint32_t, std::uint32_t>> v) const {
    ByteWriter w(e_);
    for (auto [n, d] : v) {
      w.u32(n);
      w.u32(d);
    }
    return {tag, 5, static_cast<std::uint32_t>(v.size()), std::move(w).take()};
  }

 private:
  Endian e_;
};

std::size_t ifd_size(const std::vector<Entry>& entries) {
  std::size_t n = 2 + 12 * entries.size() + 4;
  for (const Entry& e : entries)
    if (e.value.size() > 4) n += (e.value.size() + 1) & ~std::size_t{1};
  return n;
}

void write_ifd(ByteWriter& w, std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.tag < b.tag; });
  std::size_t extra = w.size() - 6 + 2 + 12 * entries.size() + 4;  // TIFF-relative
  w.u16(static_cast<std::uint16_t>(entries.size()));
  for (const Entry& e : entries) {
    w.u16(e.tag);
    w.u16(e.type);
    w.u32(e.count);
    if (e.value.size() <= 4) {
      w.bytes(e.value);
      w.zeros(4 - e.value.size());
    } else {
      w.u32(static_cast<std::uint32_t>(extra));
      extra += (e.value.size() + 1) & ~std::size_t{1};
    }
  }
  w.u32(0);  // no next IFD
  for (const Entry& e : entries) {
    if (e.value.size() <= 4) continue;
    w.bytes(e.value);
    if (e.value.size() % 2) w.u8(0);
  }
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> dms(double degrees) {
  double a = std::fabs(degrees);
  auto d = static_cast<std::uint32_t>(a);
  double rem = (a - d) * 60.0;
  auto m = static_cast<std::uint32_t>(rem);
  auto s100 = static_cast<std::uint32_t>(std::llround((rem - m) * 60.0 * 100.0));
  return {{d, 1}, {m, 1}, {s100, 100}};
}

}  // namespace

Bytes encode_exif_payload(const ExifContents& c) {
  EntryFactory f(c.byte_order);
  std::vector<Entry> ifd0, exif, gps;
  if (c.make) ifd0.push_back(f.ascii(tags::kMake, *c.make));
  if (c.model) ifd0.push_back(f.ascii(tags::kModel, *c.model));
  ifd0.push_back(f.shorts(tags::kOrientation, {c.orientation}));
  ifd0.push_back(f.ascii(tags::kSoftware, "exifaudit-synth"));
  if (c.datetime) ifd0.push_back(f.ascii(tags::kDateTime, *c.datetime));

  exif.push_back(f.rationals(tags::kExposureTime, {{1, 125}}));
  exif.push_back(f.shorts(tags::kIsoSpeed, {100}));
  if (c.datetime) exif.push_back(f.ascii(tags::kDateTimeOriginal, *c.datetime));
  exif.push_back(f.shorts(tags::kColorSpace, {1}));
  if (c.serial) exif.push_back(f.ascii(tags::kBodySerialNumber, *c.serial));

  if (c.gps) {
    gps.push_back(f.bytes(tags::kGpsVersionId, {2, 3, 0, 0}));
    gps.push_back(f.ascii(tags::kGpsLatitudeRef, c.gps->latitude < 0 ? "S" : "N"));
    gps.push_back(f.rationals(tags::kGpsLatitude, dms(c.gps->latitude)));
    gps.push_back(f.ascii(tags::kGpsLongitudeRef, c.gps->longitude < 0 ? "W" : "E"));
    gps.push_back(f.rationals(tags::kGpsLongitude, dms(c.gps->longitude)));
    gps.push_back(f.bytes(tags::kGpsAltitudeRef, {static_cast<std::uint8_t>(c.gps->altitude_m < 0 ? 1 : 0)}));
    gps.push_back(
        f.rationals(tags::kGpsAltitude, {{static_cast<std::uint32_t>(std::llround(std::fabs(c.gps->altitude_m) * 100)), 100}}));
  }

  // Pointer entries are fixed-size, so offsets follow from sizes alone.
  ifd0.push_back(f.longs(tags::kExifIfdPointer, 0));
  if (c.gps) ifd0.push_back(f.longs(tags::kGpsIfdPointer, 0));
  std::size_t exif_off = 8 + ifd_size(ifd0);
  std::size_t gps_off = exif_off + ifd_size(exif);
  for (Entry& e : ifd0) {
    if (e.tag == tags::kExifIfdPointer) e = f.longs(e.tag, static_cast<std::uint32_t>(exif_off));
    if (e.tag == tags::kGpsIfdPointer) e = f.longs(e.tag, static_cast<std::uint32_t>(gps_off));
  }

  ByteWriter w(c.byte_order);
  w.str(kExifMagic);
  w.str(c.byte_order == Endian::Little ? "II" : "MM");
  w.u16(42);
  w.u32(8);
  write_ifd(w, std::move(ifd0));
  write_ifd(w, std::move(exif));
  if (c.gps) write_ifd(w, std::move(gps));
  return std::move(w).take();
}

namespace {

// Annex K luminance tables.
constexpr std::array<std::uint8_t, 16> kDcBits = {0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
constexpr std::array<std::uint8_t, 12> kDcVals = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
constexpr std::array<std::uint8_t, 16> kAcBits = {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d};
constexpr std::array<std::uint8_t, 162> kAcVals = {
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07, 0x22, 0x71,
    0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72,
    0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37,
    0x38, 0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
    0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83,
    0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3,
    0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3,
    0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2,
    0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa};

struct Code {
  std::uint16_t bits = 0;
  std::uint8_t len = 0;
};

template <std::size_t N>
std::array<Code, 256> canonical_codes(const std::array<std::uint8_t, 16>& counts, const std::array<std::uint8_t, N>& vals) {
  std::array<Code, 256> table{};
  std::uint16_t code = 0;
  std::size_t k = 0;
  for (std::uint8_t len = 1; len <= 16; ++len) {
    for (std::uint8_t i = 0; i < counts[len - 1]; ++i) table[vals[k++]] = {code++, len};
    code = static_cast<std::uint16_t>(code << 1);
  }
  return table;
}

class BitWriter {
 public:
  explicit BitWriter(Bytes& out) : out_(out) {}
  void put(std::uint32_t bits, int len) {
    for (int i = len - 1; i >= 0; --i) {
      acc_ = static_cast<std::uint8_t>((acc_ << 1) | ((bits >> i) & 1));
      if (++n_ == 8) emit();
    }
  }
  void flush() {
    while (n_ != 0) put(1, 1);  // pad with ones
  }

 private:
  void emit() {
    out_.push_back(acc_);
    if (acc_ == 0xFF) out_.push_back(0x00);
    acc_ = 0;
    n_ = 0;
  }
  Bytes& out_;
  std::uint8_t acc_ = 0;
  int n_ = 0;
};

void marker_segment(ByteWriter& w, std::uint8_t marker, ByteView payload) {
  w.u8(0xFF);
  w.u8(marker);
  w.u16(static_cast<std::uint16_t>(payload.size() + 2));
  w.bytes(payload);
}

}  // namespace

Bytes encode_jpeg(const JpegSpec& spec, const std::optional<ExifContents>& exif) {
  std::uint16_t width = static_cast<std::uint16_t>(std::max(8, (spec.width + 7) / 8 * 8));
  std::uint16_t height = static_cast<std::uint16_t>(std::max(8, (spec.height + 7) / 8 * 8));
  std::vector<int> levels = spec.dc_levels.empty() ? std::vector<int>{0} : spec.dc_levels;

  ByteWriter w(Endian::Big);
  w.u8(0xFF);
  w.u8(kSoi);
  if (exif) {
    Bytes payload = encode_exif_payload(*exif);
    if (payload.size() + 2 > 0xFFFF) throw Error(Errc::MalformedExif, "Exif payload exceeds one segment");
    marker_segment(w, kApp1, payload);
  }
  {
    Bytes dqt(65, 16);
    dqt[0] = 0x00;  // 8-bit, table 0
    marker_segment(w, 0xDB, dqt);
  }
  {
    ByteWriter sof(Endian::Big);
    sof.u8(8);
    sof.u16(height);
    sof.u16(width);
    sof.u8(1);
    sof.u8(1);
    sof.u8(0x11);
    sof.u8(0);
    marker_segment(w, 0xC0, sof.data());
  }
  {
    ByteWriter dht(Endian::Big);
    dht.u8(0x00);
    dht.bytes(kDcBits);
    dht.bytes(kDcVals);
    dht.u8(0x10);
    dht.bytes(kAcBits);
    dht.bytes(kAcVals);
    marker_segment(w, 0xC4, dht.data());
  }
  {
    const std::uint8_t sos[] = {1, 1, 0x00, 0, 63, 0};
    marker_segment(w, kSos, sos);
  }

  static const auto dc = canonical_codes(kDcBits, kDcVals);
  static const auto ac = canonical_codes(kAcBits, kAcVals);
  Bytes scan;
  BitWriter bits(scan);
  std::size_t blocks = std::size_t{width / 8u} * (height / 8u);
  int prev = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    int level = std::clamp(levels[b % levels.size()], -60, 60);
    int diff = level - prev;
    prev = level;
    int mag = diff < 0 ? -diff : diff;
    int cat = 0;
    while (mag >> cat) ++cat;
    bits.put(dc[cat].bits, dc[cat].len);
    if (cat) bits.put(static_cast<std::uint32_t>(diff < 0 ? diff - 1 : diff) & ((1u << cat) - 1), cat);
    bits.put(ac[0x00].bits, ac[0x00].len);  // EOB
  }
  bits.flush();
  w.bytes(scan);
  w.u8(0xFF);
  w.u8(kEoi);
  return std::move(w).take();
}

Bytes with_exif(ByteView jpeg, const ExifContents& contents) {
  Bytes stripped = strip_metadata(jpeg);
  ByteWriter w(Endian::Big);
  w.bytes(ByteView(stripped).first(2));
  marker_segment(w, kApp1, encode_exif_payload(contents));
  w.bytes(ByteView(stripped).subspan(2));
  return std::move(w).take();
}

ExifContents restrict_to(const ExifContents& all, const TypeSet& types) {
  ExifContents c;
  c.orientation = all.orientation;
  c.byte_order = all.byte_order;
  if (types.contains(MetadataType::DateTime)) c.datetime = all.datetime;
  if (types.contains(MetadataType::SmartphoneBrand)) c.make = all.make;
  if (types.contains(MetadataType::SmartphoneModel)) c.model = all.model;
  if (types.contains(MetadataType::DeviceSerialNumber)) c.serial = all.serial;
  if (types.contains(MetadataType::Gps)) c.gps = all.gps;
  return c;
}

}  // namespace exifaudit
