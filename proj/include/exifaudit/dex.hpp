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
#include <string>
#include <vector>

#include "exifaudit/apk.hpp"
#include "exifaudit/bytes.hpp"
#include "exifaudit/catalog.hpp"
#include "exifaudit/code_extract.hpp"

namespace exifaudit::dex {

struct MethodId {
  std::uint16_t class_idx = 0;
  std::uint16_t proto_idx = 0;
  std::uint32_t name_idx = 0;
};

struct FieldId {
  std::uint16_t class_idx = 0;
  std::uint16_t type_idx = 0;
  std::uint32_t name_idx = 0;
};

enum class RefKind { String, Invoke, Field };

struct Reference {
  RefKind kind;
  std::uint32_t index;  // into strings, method_ids or field_ids
};

// One method with code, and what its instructions reference.
struct MethodRefs {
  std::uint32_t method_idx = 0;
  std::vector<Reference> refs;
};

// Read-only view of the tables of a Dalvik executable. Parsing validates the
// header and every table's bounds up front; instructions are decoded only by
// method_references().
class DexFile {
 public:
  // Throws Error{MalformedDex}.
  static DexFile parse(ByteView bytes);

  const std::vector<std::string>& strings() const { return strings_; }
  const std::vector<std::uint32_t>& type_ids() const { return type_ids_; }
  const std::vector<MethodId>& method_ids() const { return method_ids_; }
  const std::vector<FieldId>& field_ids() const { return field_ids_; }

  const std::string& type_descriptor(std::uint32_t type_idx) const;
  // "Lpkg/Cls;->name"
  std::string method_symbol(std::uint32_t method_idx) const;
  std::string field_symbol(std::uint32_t field_idx) const;
  const std::string& method_name(std::uint32_t method_idx) const;
  const std::string& field_name(std::uint32_t field_idx) const;

  // Every method defined in class_defs that has a code item.
  std::vector<MethodRefs> method_references() const;

 private:
  Bytes data_;
  std::vector<std::string> strings_;
  std::vector<std::uint32_t> type_ids_;
  std::vector<MethodId> method_ids_;
  std::vector<FieldId> field_ids_;
  struct ClassDef {
    std::uint32_t class_idx;
    std::uint32_t class_data_off;
  };
  std::vector<ClassDef> class_defs_;
};

// Number of 16-bit code units taken by the instruction (or payload pseudo
// instruction) starting at insns[pc]. Zero means the opcode is not valid.
std::size_t instruction_width(std::span<const std::uint16_t> insns, std::size_t pc);

// Blocks for one DEX image. source_id is "<entry>:<class>-><method>"; the
// span holds the method id index as [idx, idx + 1).
std::vector<CodeBlock> scan_dex_bytes(std::string_view entry_name, ByteView bytes, const KeywordCatalog& catalog,
                                      std::size_t max_block_chars = 4000);

}  // namespace exifaudit::dex

namespace exifaudit {

// One block per method whose string, invoke or field references hit the
// catalog. Throws Error{NoDexEntries} or Error{MalformedDex}.
std::vector<CodeBlock> scan_dex_references(const ApkPackage& package, const KeywordCatalog& catalog,
                                           std::size_t max_block_chars = 4000);

}  // namespace exifaudit
