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

#include "exifaudit/dex.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <set>

namespace exifaudit::dex {
namespace {

constexpr std::size_t kHeaderSize = 0x70;
constexpr std::uint32_t kEndianConstant = 0x12345678;
constexpr std::uint32_t kNoIndex = 0xFFFFFFFF;

[[noreturn]] void malformed(const std::string& why) { throw Error(Errc::MalformedDex, why); }

std::uint32_t read_uleb128(ByteReader& r) {
  std::uint32_t result = 0;
  for (int shift = 0; shift < 35; shift += 7) {
    const std::uint8_t b = r.u8();
    result |= static_cast<std::uint32_t>(b & 0x7F) << shift;
    if (!(b & 0x80)) return result;
  }
  malformed("uleb128 longer than 5 bytes");
}

// Code units per opcode for the standard (non-payload) instruction formats.
constexpr std::array<std::uint8_t, 256> make_widths() {
  std::array<std::uint8_t, 256> w{};
  for (auto& x : w) x = 1;
  auto set = [&](int from, int to, std::uint8_t units) {
    for (int op = from; op <= to; ++op) w[op] = units;
  };
  set(0x02, 0x02, 2);
  set(0x03, 0x03, 3);
  set(0x05, 0x05, 2);
  set(0x06, 0x06, 3);
  set(0x08, 0x08, 2);
  set(0x09, 0x09, 3);
  set(0x13, 0x13, 2);
  set(0x14, 0x14, 3);
  set(0x15, 0x16, 2);
  set(0x17, 0x17, 3);
  set(0x18, 0x18, 5);
  set(0x19, 0x1a, 2);
  set(0x1b, 0x1b, 3);
  set(0x1c, 0x1c, 2);
  set(0x1f, 0x20, 2);
  set(0x22, 0x23, 2);
  set(0x24, 0x26, 3);
  set(0x29, 0x29, 2);
  set(0x2a, 0x2c, 3);
  set(0x2d, 0x3d, 2);
  set(0x44, 0x6d, 2);
  set(0x6e, 0x72, 3);
  set(0x74, 0x78, 3);
  set(0x90, 0xaf, 2);
  set(0xd0, 0xe2, 2);
  set(0xfa, 0xfb, 4);
  set(0xfc, 0xfd, 3);
  set(0xfe, 0xff, 2);
  return w;
}

constexpr auto kWidths = make_widths();

std::string escape_string(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::size_t instruction_width(std::span<const std::uint16_t> insns, std::size_t pc) {
  if (pc >= insns.size()) return 0;
  const std::uint16_t unit = insns[pc];
  const std::uint8_t op = unit & 0xFF;
  if (op == 0x00 && unit != 0) {
    auto at = [&](std::size_t k) -> std::uint64_t { return pc + k < insns.size() ? insns[pc + k] : 0; };
    if (pc + 1 >= insns.size()) return 0;
    switch (unit) {
      case 0x0100: return 4 + at(1) * 2;                  // packed-switch-payload
      case 0x0200: return 2 + at(1) * 4;                  // sparse-switch-payload
      case 0x0300: {                                      // fill-array-data-payload
        if (pc + 3 >= insns.size()) return 0;
        const std::uint64_t elements = at(2) | (at(3) << 16);
        return static_cast<std::size_t>(4 + (elements * at(1) + 1) / 2);
      }
      default: return 0;
    }
  }
  return kWidths[op];
}

DexFile DexFile::parse(ByteView bytes) {
  if (bytes.size() < kHeaderSize) malformed("file shorter than the DEX header");
  if (std::memcmp(bytes.data(), "dex\n", 4) != 0 || bytes[7] != 0 || !std::isdigit(bytes[4]) ||
      !std::isdigit(bytes[5]) || !std::isdigit(bytes[6])) {
    malformed("bad magic");
  }
  ByteReader h(bytes, Errc::MalformedDex);
  const std::uint32_t file_size = h.u32_at(32);
  const std::uint32_t header_size = h.u32_at(36);
  const std::uint32_t endian = h.u32_at(40);
  if (endian != kEndianConstant) malformed("unsupported endian tag 0x" + std::to_string(endian));
  if (header_size != kHeaderSize) malformed("header_size " + std::to_string(header_size));
  if (file_size < kHeaderSize || file_size > bytes.size()) {
    malformed("file_size " + std::to_string(file_size) + " disagrees with " + std::to_string(bytes.size()) + " bytes");
  }

  DexFile dex;
  dex.data_.assign(bytes.begin(), bytes.begin() + file_size);
  ByteReader r(dex.data_, Errc::MalformedDex);

  auto table = [&](std::size_t size_off, std::size_t item_size, const char* name) {
    const std::uint32_t count = r.u32_at(size_off);
    const std::uint32_t off = r.u32_at(size_off + 4);
    if (count != 0 && static_cast<std::uint64_t>(off) + static_cast<std::uint64_t>(count) * item_size > file_size) {
      malformed(std::string(name) + " table overruns file");
    }
    return std::pair<std::uint32_t, std::uint32_t>{count, off};
  };
  const auto [string_count, string_off] = table(56, 4, "string_ids");
  const auto [type_count, type_off] = table(64, 4, "type_ids");
  table(72, 12, "proto_ids");
  const auto [field_count, field_off] = table(80, 8, "field_ids");
  const auto [method_count, method_off] = table(88, 8, "method_ids");
  const auto [class_count, class_off] = table(96, 32, "class_defs");

  dex.strings_.reserve(string_count);
  for (std::uint32_t i = 0; i < string_count; ++i) {
    const std::uint32_t data_off = r.u32_at(string_off + 4ull * i);
    r.seek(data_off);
    read_uleb128(r);  // utf16 length
    const std::size_t start = r.pos();
    const auto* begin = dex.data_.data() + start;
    const auto* nul = static_cast<const std::uint8_t*>(std::memchr(begin, 0, dex.data_.size() - start));
    if (!nul) malformed("unterminated string " + std::to_string(i));
    dex.strings_.emplace_back(reinterpret_cast<const char*>(begin), static_cast<std::size_t>(nul - begin));
  }
  auto check_string = [&](std::uint32_t idx) {
    if (idx >= string_count) malformed("string index " + std::to_string(idx) + " out of range");
    return idx;
  };
  for (std::uint32_t i = 0; i < type_count; ++i) dex.type_ids_.push_back(check_string(r.u32_at(type_off + 4ull * i)));
  auto check_type = [&](std::uint32_t idx) {
    if (idx >= type_count) malformed("type index " + std::to_string(idx) + " out of range");
    return idx;
  };
  for (std::uint32_t i = 0; i < field_count; ++i) {
    const std::size_t o = field_off + 8ull * i;
    FieldId f{r.u16_at(o), r.u16_at(o + 2), r.u32_at(o + 4)};
    check_type(f.class_idx);
    check_string(f.name_idx);
    dex.field_ids_.push_back(f);
  }
  for (std::uint32_t i = 0; i < method_count; ++i) {
    const std::size_t o = method_off + 8ull * i;
    MethodId m{r.u16_at(o), r.u16_at(o + 2), r.u32_at(o + 4)};
    check_type(m.class_idx);
    check_string(m.name_idx);
    dex.method_ids_.push_back(m);
  }
  for (std::uint32_t i = 0; i < class_count; ++i) {
    const std::size_t o = class_off + 32ull * i;
    dex.class_defs_.push_back({check_type(r.u32_at(o)), r.u32_at(o + 24)});
  }
  return dex;
}

const std::string& DexFile::type_descriptor(std::uint32_t type_idx) const {
  return strings_.at(type_ids_.at(type_idx));
}

const std::string& DexFile::method_name(std::uint32_t method_idx) const {
  return strings_.at(method_ids_.at(method_idx).name_idx);
}

const std::string& DexFile::field_name(std::uint32_t field_idx) const {
  return strings_.at(field_ids_.at(field_idx).name_idx);
}

std::string DexFile::method_symbol(std::uint32_t method_idx) const {
  const MethodId& m = method_ids_.at(method_idx);
  return type_descriptor(m.class_idx) + "->" + strings_.at(m.name_idx);
}

std::string DexFile::field_symbol(std::uint32_t field_idx) const {
  const FieldId& f = field_ids_.at(field_idx);
  return type_descriptor(f.class_idx) + "->" + strings_.at(f.name_idx);
}

std::vector<MethodRefs> DexFile::method_references() const {
  std::vector<MethodRefs> out;
  ByteReader r(data_, Errc::MalformedDex);
  for (const ClassDef& cd : class_defs_) {
    if (cd.class_data_off == 0) continue;
    r.seek(cd.class_data_off);
    const std::uint32_t static_fields = read_uleb128(r);
    const std::uint32_t instance_fields = read_uleb128(r);
    const std::uint32_t direct_methods = read_uleb128(r);
    const std::uint32_t virtual_methods = read_uleb128(r);
    for (std::uint64_t i = 0; i < 2ull * (static_fields + static_cast<std::uint64_t>(instance_fields)); ++i) {
      read_uleb128(r);
    }
    for (std::uint32_t list_size : {direct_methods, virtual_methods}) {
      std::uint32_t method_idx = 0;
      for (std::uint32_t i = 0; i < list_size; ++i) {
        method_idx += read_uleb128(r);
        read_uleb128(r);  // access flags
        const std::uint32_t code_off = read_uleb128(r);
        if (method_idx >= method_ids_.size()) malformed("class_data method index out of range");
        if (code_off == 0) continue;

        const std::size_t resume = r.pos();
        ByteReader code(data_, Errc::MalformedDex);
        code.seek(code_off);
        code.skip(12);
        const std::uint32_t insns_size = code.u32();
        ByteView raw = code.bytes(static_cast<std::size_t>(insns_size) * 2);
        std::vector<std::uint16_t> insns(insns_size);
        for (std::uint32_t k = 0; k < insns_size; ++k) insns[k] = static_cast<std::uint16_t>(raw[2 * k] | raw[2 * k + 1] << 8);

        MethodRefs mr;
        mr.method_idx = method_idx;
        std::size_t pc = 0;
        while (pc < insns.size()) {
          const std::size_t width = instruction_width(insns, pc);
          if (width == 0 || width > insns.size() - pc) {
            malformed("bad instruction at pc " + std::to_string(pc) + " in " + method_symbol(method_idx));
          }
          const std::uint8_t op = insns[pc] & 0xFF;
          const bool payload = op == 0x00 && insns[pc] != 0;
          if (!payload) {
            if (op == 0x1a) {
              mr.refs.push_back({RefKind::String, insns[pc + 1]});
            } else if (op == 0x1b) {
              mr.refs.push_back({RefKind::String, insns[pc + 1] | static_cast<std::uint32_t>(insns[pc + 2]) << 16});
            } else if (op >= 0x52 && op <= 0x6d) {
              mr.refs.push_back({RefKind::Field, insns[pc + 1]});
            } else if ((op >= 0x6e && op <= 0x72) || (op >= 0x74 && op <= 0x78) || op == 0xfa || op == 0xfb) {
              mr.refs.push_back({RefKind::Invoke, insns[pc + 1]});
            }
          }
          pc += width;
        }
        for (const Reference& ref : mr.refs) {
          const std::size_t limit = ref.kind == RefKind::String   ? strings_.size()
                                    : ref.kind == RefKind::Field ? field_ids_.size()
                                                                 : method_ids_.size();
          if (ref.index >= limit) malformed("instruction references index " + std::to_string(ref.index) + " out of range");
        }
        out.push_back(std::move(mr));
        r.seek(resume);
      }
    }
  }
  return out;
}

std::vector<CodeBlock> scan_dex_bytes(std::string_view entry_name, ByteView bytes, const KeywordCatalog& catalog,
                                      std::size_t max_block_chars) {
  const DexFile dex = DexFile::parse(bytes);
  std::vector<CodeBlock> blocks;
  for (const MethodRefs& mr : dex.method_references()) {
    std::vector<std::string> matched_lines;
    std::vector<std::string> other_lines;
    std::set<std::string> keywords;
    TypeSet types;
    std::set<std::pair<int, std::uint32_t>> seen;
    for (const Reference& ref : mr.refs) {
      if (!seen.insert({static_cast<int>(ref.kind), ref.index}).second) continue;
      std::string symbol;
      std::string line;
      switch (ref.kind) {
        case RefKind::String:
          symbol = dex.strings()[ref.index];
          line = "  string \"" + escape_string(symbol) + "\"";
          break;
        case RefKind::Invoke:
          symbol = dex.method_name(ref.index);
          line = "  invoke " + dex.method_symbol(ref.index);
          break;
        case RefKind::Field:
          symbol = dex.field_name(ref.index);
          line = "  field " + dex.field_symbol(ref.index);
          break;
      }
      bool hit = false;
      for (const KeywordHit& h : catalog.scan(symbol)) {
        const KeywordEntry& e = catalog.at(h.entry);
        keywords.insert(e.keyword);
        types.insert(e.types.begin(), e.types.end());
        hit = true;
      }
      (hit ? matched_lines : other_lines).push_back(std::move(line));
    }
    if (keywords.empty()) continue;

    const MethodId& id = dex.method_ids()[mr.method_idx];
    CodeBlock b;
    b.source_id = std::string(entry_name) + ":" + dex.method_symbol(mr.method_idx);
    b.span = {mr.method_idx, mr.method_idx + 1u};
    b.text = "class " + dex.type_descriptor(id.class_idx) + "\nmethod " + dex.method_name(mr.method_idx) +
             "\nreferences:";
    std::size_t kept_matched = 0;
    for (const auto* group : {&matched_lines, &other_lines}) {
      for (const std::string& line : *group) {
        if (b.text.size() + 1 + line.size() > max_block_chars) {
          b.truncated = true;
          continue;
        }
        b.text += "\n" + line;
        if (group == &matched_lines) ++kept_matched;
      }
    }
    if (b.text.size() > max_block_chars) {
      b.text.resize(max_block_chars);
      b.truncated = true;
    }
    if (kept_matched < matched_lines.size()) {
      // Keep the keyword invariant: only report keywords visible in the text.
      std::set<std::string> visible;
      TypeSet visible_types;
      for (const KeywordHit& h : catalog.scan(b.text)) {
        const KeywordEntry& e = catalog.at(h.entry);
        if (keywords.count(e.keyword)) {
          visible.insert(e.keyword);
          visible_types.insert(e.types.begin(), e.types.end());
        }
      }
      keywords = std::move(visible);
      types = std::move(visible_types);
      if (keywords.empty()) continue;
    }
    b.matched_keywords = std::move(keywords);
    b.implicated_types = std::move(types);
    blocks.push_back(std::move(b));
  }
  std::sort(blocks.begin(), blocks.end(), [](const CodeBlock& a, const CodeBlock& b) {
    return a.source_id != b.source_id ? a.source_id < b.source_id : a.span.start < b.span.start;
  });
  return blocks;
}

}  // namespace exifaudit::dex

namespace exifaudit {

std::vector<CodeBlock> scan_dex_references(const ApkPackage& package, const KeywordCatalog& catalog,
                                           std::size_t max_block_chars) {
  const std::vector<std::string> entries = package.dex_entries();
  if (entries.empty()) throw Error(Errc::NoDexEntries, package.path() + " contains no classes*.dex");
  std::vector<CodeBlock> out;
  for (const std::string& name : entries) {
    auto blocks = dex::scan_dex_bytes(name, package.read_entry(name), catalog, max_block_chars);
    out.insert(out.end(), std::make_move_iterator(blocks.begin()), std::make_move_iterator(blocks.end()));
  }
  std::sort(out.begin(), out.end(), [](const CodeBlock& a, const CodeBlock& b) {
    return a.source_id != b.source_id ? a.source_id < b.source_id : a.span.start < b.span.start;
  });
  return out;
}

}  // namespace exifaudit
