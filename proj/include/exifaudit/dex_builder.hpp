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

#include "exifaudit/bytes.hpp"

namespace exifaudit::dex {

// Minimal DEX writer used for fixtures and the synthetic corpus. Every
// method is static, takes no arguments, returns void and uses one register.
struct Insn {
  enum class Op { ConstString, InvokeStatic, SgetObject, FillArray };
  Op op;
  std::string owner;  // class descriptor for invokes and field reads
  std::string name;   // string value, method name or field name
  Bytes array;        // FillArray element bytes (width 1)

  static Insn const_string(std::string value) { return {Op::ConstString, {}, std::move(value), {}}; }
  static Insn invoke(std::string owner, std::string method) { return {Op::InvokeStatic, std::move(owner), std::move(method), {}}; }
  static Insn sget(std::string owner, std::string field) { return {Op::SgetObject, std::move(owner), std::move(field), {}}; }
  static Insn fill_array(Bytes data) { return {Op::FillArray, {}, {}, std::move(data)}; }
};

struct MethodSpec {
  std::string name;
  std::vector<Insn> code;
};

struct ClassSpec {
  std::string descriptor;  // "Lcom/example/Foo;"
  std::vector<MethodSpec> methods;
};

Bytes build_dex(const std::vector<ClassSpec>& classes);

}  // namespace exifaudit::dex
