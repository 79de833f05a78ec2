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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exifaudit/error.hpp"

namespace exifaudit {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

enum class Endian { Little, Big };

// Bounds-checked cursor over a byte buffer. Reads past the end raise an
// Error carrying the code given at construction, so each format parser
// reports its own malformed-input error.
class ByteReader {
 public:
  ByteReader(ByteView data, Errc on_overrun, Endian endian = Endian::Little)
      : data_(data), errc_(on_overrun), endian_(endian) {}

  std::size_t size() const { return data_.size(); }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  Endian endian() const { return endian_; }
  void set_endian(Endian e) { endian_ = e; }

  void seek(std::size_t pos) {
    if (pos > data_.size()) fail("seek past end");
    pos_ = pos;
  }
  void skip(std::size_t n) { seek(checked_end(n)); }

  std::uint8_t u8() {
    require(1);
    return data_[pos_++];
  }
  std::uint16_t u16() { return static_cast<std::uint16_t>(uint_n(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint_n(4)); }
  std::uint64_t u64() { return uint_n(8); }

  ByteView bytes(std::size_t n) {
    require(n);
    ByteView out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  // Random access without moving the cursor.
  std::uint16_t u16_at(std::size_t off) const { return static_cast<std::uint16_t>(uint_at(off, 2)); }
  std::uint32_t u32_at(std::size_t off) const { return static_cast<std::uint32_t>(uint_at(off, 4)); }

  [[noreturn]] void fail(const std::string& what) const { throw Error(errc_, what); }

 private:
  std::size_t checked_end(std::size_t n) const {
    if (n > data_.size() - pos_) fail("read of " + std::to_string(n) + " bytes at offset " +
                                      std::to_string(pos_) + " overruns buffer of " +
                                      std::to_string(data_.size()));
    return pos_ + n;
  }
  void require(std::size_t n) const { (void)checked_end(n); }

  std::uint64_t uint_n(std::size_t n) {
    std::uint64_t v = uint_at(pos_, n);
    pos_ += n;
    return v;
  }

  std::uint64_t uint_at(std::size_t off, std::size_t n) const {
    if (off > data_.size() || n > data_.size() - off) fail("read at offset " + std::to_string(off) + " overruns buffer");
    std::uint64_t v = 0;
    if (endian_ == Endian::Little) {
      for (std::size_t i = n; i-- > 0;) v = (v << 8) | data_[off + i];
    } else {
      for (std::size_t i = 0; i < n; ++i) v = (v << 8) | data_[off + i];
    }
    return v;
  }

  ByteView data_;
  std::size_t pos_ = 0;
  Errc errc_;
  Endian endian_;
};

class ByteWriter {
 public:
  explicit ByteWriter(Endian endian = Endian::Little) : endian_(endian) {}

  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void bytes(ByteView b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void str(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void zeros(std::size_t n) { buf_.insert(buf_.end(), n, 0); }

  void patch_u16(std::size_t off, std::uint16_t v) { put_at(off, v, 2); }
  void patch_u32(std::size_t off, std::uint32_t v) { put_at(off, v, 4); }

  std::size_t size() const { return buf_.size(); }
  const Bytes& data() const& { return buf_; }
  Bytes take() && { return std::move(buf_); }

 private:
  void put(std::uint64_t v, std::size_t n) {
    std::size_t off = buf_.size();
    buf_.resize(off + n);
    put_at(off, v, n);
  }
  void put_at(std::size_t off, std::uint64_t v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t shift = endian_ == Endian::Little ? i : (n - 1 - i);
      buf_[off + i] = static_cast<std::uint8_t>(v >> (8 * shift));
    }
  }

  Bytes buf_;
  Endian endian_;
};

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::string to_string(ByteView b) { return {b.begin(), b.end()}; }

Bytes read_file(const std::string& path);
// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::string& path, ByteView data);
inline void write_file_atomic(const std::string& path, std::string_view text) {
  write_file_atomic(path, as_bytes(text));
}

}  // namespace exifaudit
