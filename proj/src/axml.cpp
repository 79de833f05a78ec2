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

#include "exifaudit/axml.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

#include "exifaudit/text.hpp"

namespace exifaudit {
namespace {

using namespace axml;

[[noreturn]] void malformed(const std::string& why) { throw Error(Errc::MalformedAxml, why); }

struct StringPool {
  std::vector<std::string> strings;

  const std::string& at(std::uint32_t idx) const {
    if (idx >= strings.size()) malformed("string index " + std::to_string(idx) + " out of range");
    return strings[idx];
  }
  std::optional<std::string> opt(std::uint32_t idx) const {
    if (idx == kNoIndex) return std::nullopt;
    return at(idx);
  }
};

// Lengths in the pool use a one- or two-unit prefix with the high bit as
// continuation flag.
std::size_t read_len8(ByteReader& r) {
  std::size_t len = r.u8();
  if (len & 0x80) len = ((len & 0x7F) << 8) | r.u8();
  return len;
}

std::size_t read_len16(ByteReader& r) {
  std::size_t len = r.u16();
  if (len & 0x8000) len = ((len & 0x7FFF) << 16) | r.u16();
  return len;
}

StringPool parse_string_pool(ByteView chunk, std::uint16_t header_size) {
  if (header_size < 28) malformed("string pool header too small");
  ByteReader h(chunk, Errc::MalformedAxml);
  h.seek(8);
  const std::uint32_t string_count = h.u32();
  h.u32();  // style count
  const std::uint32_t flags = h.u32();
  const std::uint32_t strings_start = h.u32();
  const std::uint32_t styles_start = h.u32();

  if (flags & ~(kSortedFlag | kUtf8Flag)) {
    throw Error(Errc::UnsupportedEncoding, "string pool flags 0x" + hex(flags) + " name neither UTF-8 nor UTF-16");
  }
  const bool utf8 = flags & kUtf8Flag;

  const std::size_t offsets_end = static_cast<std::size_t>(header_size) + 4ull * string_count;
  if (offsets_end > chunk.size()) malformed("string offsets overrun pool chunk");
  if (string_count > 0 && (strings_start < offsets_end || strings_start > chunk.size())) {
    malformed("strings start outside pool chunk");
  }
  const std::size_t data_end = styles_start != 0 && styles_start > strings_start && styles_start <= chunk.size()
                                   ? styles_start
                                   : chunk.size();
  ByteView data = chunk.subspan(0, data_end);

  StringPool pool;
  pool.strings.reserve(string_count);
  h.seek(header_size);
  for (std::uint32_t i = 0; i < string_count; ++i) {
    const std::uint64_t off = static_cast<std::uint64_t>(strings_start) + h.u32();
    if (off >= data.size()) malformed("string " + std::to_string(i) + " starts past pool data");
    ByteReader s(data, Errc::MalformedAxml);
    s.seek(static_cast<std::size_t>(off));
    if (utf8) {
      read_len8(s);  // UTF-16 length, unused
      const std::size_t n = read_len8(s);
      pool.strings.push_back(to_string(s.bytes(n)));
      if (s.u8() != 0) malformed("UTF-8 string " + std::to_string(i) + " is not NUL terminated");
    } else {
      const std::size_t n = read_len16(s);
      std::u16string units;
      units.reserve(n);
      for (std::size_t k = 0; k < n; ++k) units.push_back(static_cast<char16_t>(s.u16()));
      if (s.u16() != 0) malformed("UTF-16 string " + std::to_string(i) + " is not NUL terminated");
      pool.strings.push_back(utf16_to_utf8(units));
    }
  }
  return pool;
}

struct Attribute {
  std::optional<std::string> ns;
  std::string name;
  std::uint32_t resource_id = 0;
  std::optional<std::string> value;
};

bool is_valid_permission(const std::string& p) {
  return !p.empty() && std::none_of(p.begin(), p.end(), [](unsigned char c) { return std::isspace(c); });
}

bool is_valid_mime(const std::string& m) {
  const auto slash = m.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == m.size()) return false;
  if (m.find('/', slash + 1) != std::string::npos) return false;
  return std::none_of(m.begin(), m.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

ManifestInfo parse_binary_manifest(ByteView bytes) {
  ByteReader doc(bytes, Errc::MalformedAxml);
  if (doc.u16() != kXmlType) malformed("missing binary XML header");
  const std::uint16_t doc_header = doc.u16();
  const std::uint32_t doc_size = doc.u32();
  if (doc_header < 8 || doc_size < doc_header) malformed("bad XML header lengths");
  if (doc_size > bytes.size()) {
    malformed("declared size " + std::to_string(doc_size) + " exceeds " + std::to_string(bytes.size()) + " bytes");
  }
  ByteView body = bytes.subspan(0, doc_size);

  std::optional<StringPool> pool;
  std::vector<std::uint32_t> resource_map;
  std::vector<std::string> stack;
  ManifestInfo info;

  auto attribute_is = [&](const Attribute& a, std::uint32_t res_id, std::string_view plain) {
    if (a.resource_id != 0) return a.resource_id == res_id;
    return a.name == plain && a.ns && *a.ns == kAndroidNs;
  };

  std::size_t off = doc_header;
  while (off < body.size()) {
    ByteReader ch(body, Errc::MalformedAxml);
    ch.seek(off);
    const std::uint16_t type = ch.u16();
    const std::uint16_t header_size = ch.u16();
    const std::uint32_t size = ch.u32();
    if (header_size < 8 || size < header_size) malformed("chunk at " + std::to_string(off) + " has bad lengths");
    if (size > body.size() - off) malformed("chunk at " + std::to_string(off) + " overruns document");
    ByteView chunk = body.subspan(off, size);
    ByteReader c(chunk, Errc::MalformedAxml);

    switch (type) {
      case kStringPoolType:
        if (pool) malformed("duplicate string pool");
        pool = parse_string_pool(chunk, header_size);
        break;
      case kXmlResourceMap:
        c.seek(header_size);
        while (c.remaining() >= 4) resource_map.push_back(c.u32());
        break;
      case kXmlStartElement: {
        if (!pool) malformed("element before string pool");
        if (header_size < 16) malformed("node header too small");
        c.seek(header_size);
        const std::uint32_t ns_idx = c.u32();
        (void)ns_idx;
        const std::string& name = pool->at(c.u32());
        const std::uint16_t attr_start = c.u16();
        const std::uint16_t attr_size = c.u16();
        const std::uint16_t attr_count = c.u16();
        if (attr_count > 0 && attr_size < 20) malformed("attribute records too small");

        std::vector<Attribute> attrs;
        for (std::uint16_t i = 0; i < attr_count; ++i) {
          c.seek(static_cast<std::size_t>(header_size) + attr_start + static_cast<std::size_t>(i) * attr_size);
          Attribute a;
          a.ns = pool->opt(c.u32());
          const std::uint32_t name_idx = c.u32();
          a.name = pool->at(name_idx);
          if (name_idx < resource_map.size()) a.resource_id = resource_map[name_idx];
          const std::uint32_t raw = c.u32();
          c.u16();  // Res_value.size
          c.u8();   // res0
          const std::uint8_t data_type = c.u8();
          const std::uint32_t data = c.u32();
          if (raw != kNoIndex) {
            a.value = pool->at(raw);
          } else if (data_type == kTypeString) {
            a.value = pool->at(data);
          }
          attrs.push_back(std::move(a));
        }

        const std::string parent = stack.empty() ? "" : stack.back();
        if (name == "manifest") {
          for (const auto& a : attrs) {
            if (a.name == "package" && !a.ns && a.value) info.package_name = *a.value;
          }
        } else if (name == "uses-permission") {
          for (const auto& a : attrs) {
            if (attribute_is(a, kAttrName, "name") && a.value && is_valid_permission(*a.value)) {
              info.requested_permissions.insert(*a.value);
            }
          }
        } else if (name == "activity") {
          ++info.activity_count;
        } else if (name == "data" && parent == "intent-filter") {
          for (const auto& a : attrs) {
            if (attribute_is(a, kAttrMimeType, "mimeType") && a.value && is_valid_mime(*a.value)) {
              info.intent_mime_types.insert(*a.value);
            }
          }
        }
        stack.push_back(name);
        break;
      }
      case kXmlEndElement:
        if (stack.empty()) malformed("unbalanced end element");
        stack.pop_back();
        break;
      case kXmlStartNamespace:
      case kXmlEndNamespace:
      case kXmlCdata:
        break;
      default:
        // Unknown chunks are skipped by their declared size.
        break;
    }
    off += size;
  }
  if (!pool) malformed("no string pool");
  return info;
}

namespace axml {
namespace {

class PoolBuilder {
 public:
  std::uint32_t intern(const std::string& s) {
    auto [it, inserted] = index_.try_emplace(s, static_cast<std::uint32_t>(strings_.size()));
    if (inserted) strings_.push_back(s);
    return it->second;
  }
  const std::vector<std::string>& strings() const { return strings_; }

 private:
  std::map<std::string, std::uint32_t> index_;
  std::vector<std::string> strings_;
};

void write_len16(ByteWriter& w, std::size_t n) {
  if (n > 0x7FFF) {
    w.u16(static_cast<std::uint16_t>(0x8000 | (n >> 16)));
    w.u16(static_cast<std::uint16_t>(n & 0xFFFF));
  } else {
    w.u16(static_cast<std::uint16_t>(n));
  }
}

void write_len8(ByteWriter& w, std::size_t n) {
  if (n > 0x7F) {
    w.u8(static_cast<std::uint8_t>(0x80 | (n >> 8)));
    w.u8(static_cast<std::uint8_t>(n & 0xFF));
  } else {
    w.u8(static_cast<std::uint8_t>(n));
  }
}

Bytes encode_pool(const std::vector<std::string>& strings, bool utf8) {
  ByteWriter data;
  std::vector<std::uint32_t> offsets;
  for (const auto& s : strings) {
    offsets.push_back(static_cast<std::uint32_t>(data.size()));
    if (utf8) {
      write_len8(data, utf8_to_utf16(s).size());
      write_len8(data, s.size());
      data.str(s);
      data.u8(0);
    } else {
      const std::u16string units = utf8_to_utf16(s);
      write_len16(data, units.size());
      for (char16_t u : units) data.u16(static_cast<std::uint16_t>(u));
      data.u16(0);
    }
  }
  while (data.size() % 4 != 0) data.u8(0);

  const std::uint32_t header = 28;
  const std::uint32_t strings_start = header + 4 * static_cast<std::uint32_t>(strings.size());
  ByteWriter w;
  w.u16(kStringPoolType);
  w.u16(header);
  w.u32(strings_start + static_cast<std::uint32_t>(data.size()));
  w.u32(static_cast<std::uint32_t>(strings.size()));
  w.u32(0);
  w.u32(utf8 ? kUtf8Flag : 0);
  w.u32(strings_start);
  w.u32(0);
  for (auto o : offsets) w.u32(o);
  w.bytes(data.data());
  return std::move(w).take();
}

struct Attr {
  std::uint32_t ns;
  std::uint32_t name;
  std::uint32_t value;
};

}  // namespace

Bytes encode_manifest(const ManifestFixture& f) {
  PoolBuilder pool;
  // Attribute names backed by the resource map must occupy the first indices.
  const std::uint32_t s_name = pool.intern("name");
  const std::uint32_t s_mime = pool.intern("mimeType");
  const std::uint32_t s_android = pool.intern("android");
  const std::uint32_t s_ns = pool.intern(kAndroidNs);
  const std::uint32_t s_package = pool.intern("package");

  ByteWriter nodes;
  std::uint32_t line = 1;
  auto node_header = [&](std::uint16_t type, std::uint32_t size) {
    nodes.u16(type);
    nodes.u16(16);
    nodes.u32(size);
    nodes.u32(line++);
    nodes.u32(kNoIndex);
  };
  auto start = [&](const std::string& tag, const std::vector<Attr>& attrs) {
    const std::uint32_t tag_idx = pool.intern(tag);
    node_header(kXmlStartElement, 16 + 20 + 20 * static_cast<std::uint32_t>(attrs.size()));
    nodes.u32(kNoIndex);
    nodes.u32(tag_idx);
    nodes.u16(20);
    nodes.u16(20);
    nodes.u16(static_cast<std::uint16_t>(attrs.size()));
    nodes.u16(0);
    nodes.u16(0);
    nodes.u16(0);
    for (const auto& a : attrs) {
      nodes.u32(a.ns);
      nodes.u32(a.name);
      nodes.u32(a.value);
      nodes.u16(8);
      nodes.u8(0);
      nodes.u8(kTypeString);
      nodes.u32(a.value);
    }
  };
  auto end = [&](const std::string& tag) {
    node_header(kXmlEndElement, 24);
    nodes.u32(kNoIndex);
    nodes.u32(pool.intern(tag));
  };
  auto android_attr = [&](std::uint32_t name, const std::string& value) {
    return Attr{s_ns, name, pool.intern(value)};
  };

  node_header(kXmlStartNamespace, 24);
  nodes.u32(s_android);
  nodes.u32(s_ns);

  start("manifest", {Attr{kNoIndex, s_package, pool.intern(f.package_name)}});
  for (const auto& p : f.permissions) {
    start("uses-permission", {android_attr(s_name, p)});
    end("uses-permission");
  }
  start("application", {});
  const std::size_t activities = std::max<std::size_t>(f.activity_count, f.mime_types.empty() ? 0 : 1);
  for (std::size_t i = 0; i < activities; ++i) {
    start("activity", {android_attr(s_name, ".Activity" + std::to_string(i))});
    if (i == 0 && !f.mime_types.empty()) {
      start("intent-filter", {});
      start("action", {android_attr(s_name, "android.intent.action.SEND")});
      end("action");
      start("category", {android_attr(s_name, "android.intent.category.DEFAULT")});
      end("category");
      for (const auto& m : f.mime_types) {
        start("data", {android_attr(s_mime, m)});
        end("data");
      }
      end("intent-filter");
    }
    end("activity");
  }
  end("application");
  end("manifest");

  node_header(kXmlEndNamespace, 24);
  nodes.u32(s_android);
  nodes.u32(s_ns);

  const Bytes pool_chunk = encode_pool(pool.strings(), f.utf8_pool);
  ByteWriter resmap;
  resmap.u16(kXmlResourceMap);
  resmap.u16(8);
  resmap.u32(8 + 8);
  resmap.u32(kAttrName);
  resmap.u32(kAttrMimeType);

  ByteWriter out;
  out.u16(kXmlType);
  out.u16(8);
  out.u32(static_cast<std::uint32_t>(8 + pool_chunk.size() + resmap.size() + nodes.size()));
  out.bytes(pool_chunk);
  out.bytes(resmap.data());
  out.bytes(nodes.data());
  return std::move(out).take();
}

}  // namespace axml
}  // namespace exifaudit
