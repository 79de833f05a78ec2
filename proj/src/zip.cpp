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

#include "exifaudit/zip.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <zlib.h>

#include "exifaudit/hash.hpp"

namespace exifaudit::zip {
namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::size_t kEndRecordSize = 22;
constexpr std::size_t kMaxComment = 0xFFFF;

[[noreturn]] void not_archive(const std::string& path, const std::string& why) {
  throw Error(Errc::NotAnArchive, path + ": " + why);
}

Bytes read_range(std::ifstream& in, std::uint64_t offset, std::uint64_t length) {
  Bytes buf(length);
  in.clear();
  in.seekg(static_cast<std::streamoff>(offset));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(length));
  if (static_cast<std::uint64_t>(in.gcount()) != length) throw Error(Errc::IoFailure, "short read");
  return buf;
}

Bytes inflate_raw(ByteView src, std::uint64_t expected) {
  Bytes out(expected);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error(Errc::NotAnArchive, "inflateInit2 failed");
  zs.next_in = const_cast<Bytef*>(src.data());
  zs.avail_in = static_cast<uInt>(src.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&zs, Z_FINISH);
  std::uint64_t produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) throw Error(Errc::NotAnArchive, "corrupt deflate stream");
  return out;
}

Bytes deflate_raw(ByteView src) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error(Errc::IoFailure, "deflateInit2 failed");
  }
  Bytes out(deflateBound(&zs, static_cast<uLong>(src.size())));
  zs.next_in = const_cast<Bytef*>(src.data());
  zs.avail_in = static_cast<uInt>(src.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(Errc::IoFailure, "deflate failed");
  return out;
}

}  // namespace

Archive Archive::open(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  in.seekg(0, std::ios::end);
  const std::uint64_t file_size = static_cast<std::uint64_t>(in.tellg());
  if (file_size < kEndRecordSize) not_archive(path, "too small for a ZIP end record");

  const std::uint64_t tail_len = std::min<std::uint64_t>(file_size, kEndRecordSize + kMaxComment);
  Bytes tail = read_range(in, file_size - tail_len, tail_len);

  // Scan backwards for the end-of-central-directory signature.
  std::optional<std::size_t> end_pos;
  for (std::size_t i = tail.size() - kEndRecordSize + 1; i-- > 0;) {
    if (tail[i] == 0x50 && tail[i + 1] == 0x4b && tail[i + 2] == 0x05 && tail[i + 3] == 0x06) {
      end_pos = i;
      break;
    }
  }
  if (!end_pos) not_archive(path, "no end-of-central-directory record");

  ByteReader end(ByteView(tail).subspan(*end_pos), Errc::NotAnArchive);
  end.skip(4);
  const std::uint16_t disk = end.u16();
  const std::uint16_t cd_disk = end.u16();
  const std::uint16_t count_here = end.u16();
  const std::uint16_t count_total = end.u16();
  const std::uint32_t cd_size = end.u32();
  const std::uint32_t cd_offset = end.u32();
  if (disk != 0 || cd_disk != 0 || count_here != count_total) not_archive(path, "multi-disk archives are not supported");
  if (cd_offset == 0xFFFFFFFF || count_total == 0xFFFF) not_archive(path, "ZIP64 archives are not supported");
  if (static_cast<std::uint64_t>(cd_offset) + cd_size > file_size) not_archive(path, "central directory outside file");

  Bytes cd = read_range(in, cd_offset, cd_size);
  ByteReader r(cd, Errc::NotAnArchive);
  Archive archive;
  archive.path_ = path;
  std::set<std::string> seen;
  for (std::uint16_t i = 0; i < count_total; ++i) {
    if (r.u32() != kCentralSig) not_archive(path, "bad central directory signature");
    r.skip(6);  // version made by, version needed, flags
    EntryInfo e;
    const std::uint16_t method = r.u16();
    if (method != 0 && method != 8) not_archive(path, "unsupported compression method " + std::to_string(method));
    e.method = static_cast<Method>(method);
    r.skip(4);  // time, date
    e.crc = r.u32();
    e.compressed_size = r.u32();
    e.uncompressed_size = r.u32();
    const std::uint16_t name_len = r.u16();
    const std::uint16_t extra_len = r.u16();
    const std::uint16_t comment_len = r.u16();
    r.skip(8);  // disk start, internal attrs, external attrs
    e.local_header_offset = r.u32();
    e.name = to_string(r.bytes(name_len));
    r.skip(static_cast<std::size_t>(extra_len) + comment_len);
    if (e.local_header_offset + 30 > file_size) not_archive(path, "local header outside file");
    if (!seen.insert(e.name).second) not_archive(path, "duplicate entry name " + e.name);
    archive.entries_.push_back(std::move(e));
  }
  return archive;
}

const EntryInfo* Archive::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

Bytes Archive::read(const EntryInfo& entry) const {
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path_);
  Bytes header = read_range(in, entry.local_header_offset, 30);
  ByteReader h(header, Errc::NotAnArchive);
  if (h.u32() != kLocalSig) not_archive(path_, "bad local header signature for " + entry.name);
  const std::uint16_t name_len = h.u16_at(26);
  const std::uint16_t extra_len = h.u16_at(28);
  const std::uint64_t data_off = entry.local_header_offset + 30 + name_len + extra_len;
  Bytes raw = read_range(in, data_off, entry.compressed_size);
  Bytes data = entry.method == Method::Stored ? std::move(raw) : inflate_raw(raw, entry.uncompressed_size);
  if (data.size() != entry.uncompressed_size) not_archive(path_, "size mismatch for " + entry.name);
  if (crc32(data) != entry.crc) not_archive(path_, "CRC mismatch for " + entry.name);
  return data;
}

void Writer::add(std::string name, ByteView data, Method method) {
  Bytes packed = method == Method::Deflated ? deflate_raw(data) : Bytes(data.begin(), data.end());
  Pending p{std::move(name), method, crc32(data), static_cast<std::uint32_t>(packed.size()),
            static_cast<std::uint32_t>(data.size()), static_cast<std::uint32_t>(out_.size())};
  out_.u32(kLocalSig);
  out_.u16(20);
  out_.u16(0);
  out_.u16(static_cast<std::uint16_t>(method));
  out_.u16(0);       // time
  out_.u16(0x21);    // date: 1980-01-01
  out_.u32(p.crc);
  out_.u32(p.compressed_size);
  out_.u32(p.uncompressed_size);
  out_.u16(static_cast<std::uint16_t>(p.name.size()));
  out_.u16(0);
  out_.str(p.name);
  out_.bytes(packed);
  central_.push_back(std::move(p));
}

Bytes Writer::finish() && {
  const auto cd_offset = static_cast<std::uint32_t>(out_.size());
  for (const auto& p : central_) {
    out_.u32(kCentralSig);
    out_.u16(20);
    out_.u16(20);
    out_.u16(0);
    out_.u16(static_cast<std::uint16_t>(p.method));
    out_.u16(0);
    out_.u16(0x21);
    out_.u32(p.crc);
    out_.u32(p.compressed_size);
    out_.u32(p.uncompressed_size);
    out_.u16(static_cast<std::uint16_t>(p.name.size()));
    out_.u16(0);
    out_.u16(0);
    out_.u16(0);
    out_.u16(0);
    out_.u32(0);
    out_.u32(p.offset);
    out_.str(p.name);
  }
  const auto cd_size = static_cast<std::uint32_t>(out_.size() - cd_offset);
  out_.u32(kEndSig);
  out_.u16(0);
  out_.u16(0);
  out_.u16(static_cast<std::uint16_t>(central_.size()));
  out_.u16(static_cast<std::uint16_t>(central_.size()));
  out_.u32(cd_size);
  out_.u32(cd_offset);
  out_.u16(0);
  return std::move(out_).take();
}

}  // namespace exifaudit::zip
