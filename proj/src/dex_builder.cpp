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

#include "exifaudit/dex_builder.hpp"

#include <zlib.h>

#include <map>
#include <set>
#include <stdexcept>

namespace exifaudit::dex {
namespace {

constexpr std::uint32_t kNoIndex = 0xFFFFFFFF;
constexpr char kStringType[] = "Ljava/lang/String;";
constexpr char kObjectType[] = "Ljava/lang/Object;";

void uleb128(ByteWriter& w, std::uint32_t v) {
  do {
    std::uint8_t b = v & 0x7F;
    v >>= 7;
    if (v) b |= 0x80;
    w.u8(b);
  } while (v);
}

void align4(ByteWriter& w) {
  while (w.size() % 4) w.u8(0);
}

template <typename K>
std::map<K, std::uint32_t> index_of(const std::set<K>& keys) {
  std::map<K, std::uint32_t> out;
  std::uint32_t i = 0;
  for (const K& k : keys) out.emplace(k, i++);
  return out;
}

}  // namespace

Bytes build_dex(const std::vector<ClassSpec>& classes) {
  using Member = std::pair<std::string, std::string>;  // owner descriptor, name
  std::set<std::string> string_set = {"V", kStringType, kObjectType};
  std::set<std::string> type_set = {"V", kStringType, kObjectType};
  std::set<Member> field_set;
  std::set<Member> method_set;
  for (const ClassSpec& c : classes) {
    string_set.insert(c.descriptor);
    type_set.insert(c.descriptor);
    for (const MethodSpec& m : c.methods) {
      string_set.insert(m.name);
      method_set.insert({c.descriptor, m.name});
      for (const Insn& in : m.code) {
        if (in.op == Insn::Op::FillArray) continue;
        string_set.insert(in.name);
        if (in.op == Insn::Op::ConstString) continue;
        string_set.insert(in.owner);
        type_set.insert(in.owner);
        (in.op == Insn::Op::InvokeStatic ? method_set : field_set).insert({in.owner, in.name});
      }
    }
  }
  const auto strings = index_of(string_set);
  const auto types = index_of(type_set);
  const auto fields = index_of(field_set);
  const auto methods = index_of(method_set);
  if (types.size() > 0xFFFF || fields.size() > 0xFFFF || methods.size() > 0xFFFF) {
    throw std::length_error("fixture DEX exceeds 16-bit id tables");
  }

  const std::uint32_t string_ids_off = 0x70;
  const std::uint32_t type_ids_off = string_ids_off + 4 * static_cast<std::uint32_t>(strings.size());
  const std::uint32_t proto_ids_off = type_ids_off + 4 * static_cast<std::uint32_t>(types.size());
  const std::uint32_t field_ids_off = proto_ids_off + 12;
  const std::uint32_t method_ids_off = field_ids_off + 8 * static_cast<std::uint32_t>(fields.size());
  const std::uint32_t class_defs_off = method_ids_off + 8 * static_cast<std::uint32_t>(methods.size());
  const std::uint32_t data_off = class_defs_off + 32 * static_cast<std::uint32_t>(classes.size());

  // Data section, addressed from data_off.
  ByteWriter data;
  std::map<Member, std::uint32_t> code_offsets;
  for (const ClassSpec& c : classes) {
    for (const MethodSpec& m : c.methods) {
      std::vector<std::uint16_t> insns;
      std::vector<std::pair<std::size_t, const Bytes*>> fills;  // insn pc, payload bytes
      for (const Insn& in : m.code) {
        switch (in.op) {
          case Insn::Op::ConstString: {
            const std::uint32_t idx = strings.at(in.name);
            if (idx <= 0xFFFF) {
              insns.insert(insns.end(), {0x001a, static_cast<std::uint16_t>(idx)});
            } else {
              insns.insert(insns.end(), {0x001b, static_cast<std::uint16_t>(idx), static_cast<std::uint16_t>(idx >> 16)});
            }
            break;
          }
          case Insn::Op::InvokeStatic:
            insns.insert(insns.end(), {0x0071, static_cast<std::uint16_t>(methods.at({in.owner, in.name})), 0});
            break;
          case Insn::Op::SgetObject:
            insns.insert(insns.end(), {0x0062, static_cast<std::uint16_t>(fields.at({in.owner, in.name}))});
            break;
          case Insn::Op::FillArray:
            fills.emplace_back(insns.size(), &in.array);
            insns.insert(insns.end(), {0x0026, 0, 0});
            break;
        }
      }
      insns.push_back(0x000e);  // return-void
      for (auto [pc, payload] : fills) {
        if (insns.size() % 2) insns.push_back(0x0000);  // payloads are 4-byte aligned
        const auto rel = static_cast<std::uint32_t>(insns.size() - pc);
        insns[pc + 1] = static_cast<std::uint16_t>(rel);
        insns[pc + 2] = static_cast<std::uint16_t>(rel >> 16);
        const auto n = static_cast<std::uint32_t>(payload->size());
        insns.insert(insns.end(), {0x0300, 1, static_cast<std::uint16_t>(n), static_cast<std::uint16_t>(n >> 16)});
        for (std::size_t i = 0; i < payload->size(); i += 2) {
          const std::uint16_t hi = i + 1 < payload->size() ? (*payload)[i + 1] : 0;
          insns.push_back(static_cast<std::uint16_t>((*payload)[i] | hi << 8));
        }
      }

      align4(data);
      code_offsets[{c.descriptor, m.name}] = data_off + static_cast<std::uint32_t>(data.size());
      data.u16(1);  // registers_size
      data.u16(0);  // ins_size
      data.u16(0);  // outs_size
      data.u16(0);  // tries_size
      data.u32(0);  // debug_info_off
      data.u32(static_cast<std::uint32_t>(insns.size()));
      for (std::uint16_t u : insns) data.u16(u);
    }
  }

  std::vector<std::uint32_t> string_data_offsets;
  for (const auto& [s, idx] : strings) {
    string_data_offsets.push_back(data_off + static_cast<std::uint32_t>(data.size()));
    // Fixture strings are ASCII, so the UTF-16 length equals the byte length.
    uleb128(data, static_cast<std::uint32_t>(s.size()));
    data.str(s);
    data.u8(0);
  }

  std::vector<std::uint32_t> class_data_offsets;
  for (const ClassSpec& c : classes) {
    class_data_offsets.push_back(data_off + static_cast<std::uint32_t>(data.size()));
    std::map<std::uint32_t, std::uint32_t> by_index;  // method idx -> code off
    for (const MethodSpec& m : c.methods) by_index[methods.at({c.descriptor, m.name})] = code_offsets.at({c.descriptor, m.name});
    uleb128(data, 0);
    uleb128(data, 0);
    uleb128(data, static_cast<std::uint32_t>(by_index.size()));
    uleb128(data, 0);
    std::uint32_t prev = 0;
    for (auto [idx, code_off] : by_index) {
      uleb128(data, idx - prev);
      uleb128(data, 0x0009);  // public static
      uleb128(data, code_off);
      prev = idx;
    }
  }
  align4(data);

  ByteWriter w;
  w.str(std::string_view("dex\n035\0", 8));
  w.u32(0);      // checksum, patched below
  w.zeros(20);   // signature left blank
  w.u32(data_off + static_cast<std::uint32_t>(data.size()));
  w.u32(0x70);
  w.u32(0x12345678);
  w.u32(0);  // link
  w.u32(0);
  w.u32(0);  // map_off
  w.u32(static_cast<std::uint32_t>(strings.size()));
  w.u32(string_ids_off);
  w.u32(static_cast<std::uint32_t>(types.size()));
  w.u32(type_ids_off);
  w.u32(1);
  w.u32(proto_ids_off);
  w.u32(static_cast<std::uint32_t>(fields.size()));
  w.u32(fields.empty() ? 0 : field_ids_off);
  w.u32(static_cast<std::uint32_t>(methods.size()));
  w.u32(methods.empty() ? 0 : method_ids_off);
  w.u32(static_cast<std::uint32_t>(classes.size()));
  w.u32(classes.empty() ? 0 : class_defs_off);
  w.u32(static_cast<std::uint32_t>(data.size()));
  w.u32(data_off);

  for (std::uint32_t off : string_data_offsets) w.u32(off);
  for (const auto& [t, idx] : types) w.u32(strings.at(t));
  w.u32(strings.at("V"));  // shorty
  w.u32(types.at("V"));
  w.u32(0);                // no parameters
  for (const auto& [f, idx] : fields) {
    w.u16(static_cast<std::uint16_t>(types.at(f.first)));
    w.u16(static_cast<std::uint16_t>(types.at(kStringType)));
    w.u32(strings.at(f.second));
  }
  for (const auto& [m, idx] : methods) {
    w.u16(static_cast<std::uint16_t>(types.at(m.first)));
    w.u16(0);
    w.u32(strings.at(m.second));
  }
  for (std::size_t i = 0; i < classes.size(); ++i) {
    w.u32(types.at(classes[i].descriptor));
    w.u32(0x0001);  // public
    w.u32(types.at(kObjectType));
    w.u32(0);
    w.u32(kNoIndex);
    w.u32(0);
    w.u32(class_data_offsets[i]);
    w.u32(0);
  }
  w.bytes(data.data());

  Bytes out = std::move(w).take();
  const uLong adler = adler32(adler32(0L, Z_NULL, 0), out.data() + 12, static_cast<uInt>(out.size() - 12));
  for (int i = 0; i < 4; ++i) out[8 + i] = static_cast<std::uint8_t>(adler >> (8 * i));
  return out;
}

}  // namespace exifaudit::dex
