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

#include <gtest/gtest.h>

#include "exifaudit/apk.hpp"
#include "exifaudit/dex.hpp"
#include "exifaudit/dex_builder.hpp"
#include "exifaudit/zip.hpp"
#include "support/temp_dir.hpp"

namespace exifaudit {
namespace {

using dex::ClassSpec;
using dex::Insn;
using testing::TempDir;

const std::string kExif = "Landroid/media/ExifInterface;";

Bytes sharer_dex() {
  return dex::build_dex({
      {"Lcom/example/Sharer;",
       {{"share", {Insn::invoke(kExif, "getLatLong"), Insn::const_string("https://upload.example.com")}},
        {"helper", {Insn::const_string("hello")}}}},
  });
}

std::string apk_with(const TempDir& dir, const std::vector<std::pair<std::string, Bytes>>& extra) {
  zip::Writer w;
  w.add(kManifestEntry, axml::encode_manifest({}), zip::Method::Deflated);
  for (const auto& [name, data] : extra) w.add(name, data, zip::Method::Deflated);
  return dir.write("app.apk", std::move(w).finish());
}

TEST(DexParse, TablesRoundTrip) {
  const dex::DexFile d = dex::DexFile::parse(sharer_dex());
  std::vector<std::string> symbols;
  for (std::uint32_t i = 0; i < d.method_ids().size(); ++i) symbols.push_back(d.method_symbol(i));
  EXPECT_EQ(symbols, (std::vector<std::string>{"Landroid/media/ExifInterface;->getLatLong",
                                               "Lcom/example/Sharer;->helper", "Lcom/example/Sharer;->share"}));
  const auto refs = d.method_references();
  ASSERT_EQ(refs.size(), 2u);
}

TEST(DexScan, GetLatLongInShareImplicatesGps) {
  TempDir dir;
  const ApkPackage pkg = open_package(apk_with(dir, {{"classes.dex", sharer_dex()}}));
  const auto blocks = scan_dex_references(pkg, KeywordCatalog::builtin());
  ASSERT_EQ(blocks.size(), 1u);
  const CodeBlock& b = blocks[0];
  EXPECT_EQ(b.source_id, "classes.dex:Lcom/example/Sharer;->share");
  EXPECT_EQ(b.implicated_types, TypeSet{MetadataType::Gps});
  EXPECT_EQ(b.matched_keywords, std::set<std::string>{"getLatLong"});
  EXPECT_NE(b.text.find("Lcom/example/Sharer;"), std::string::npos);
  EXPECT_NE(b.text.find("method share"), std::string::npos);
  EXPECT_NE(b.text.find("invoke Landroid/media/ExifInterface;->getLatLong"), std::string::npos);
  EXPECT_FALSE(b.truncated);
}

TEST(DexScan, NoCatalogStringsGivesNoBlocks) {
  const Bytes d = dex::build_dex({{"Lcom/example/Plain;",
                                   {{"run", {Insn::const_string("hello"), Insn::invoke("Ljava/io/File;", "delete")}}}}});
  EXPECT_TRUE(dex::scan_dex_bytes("classes.dex", d, KeywordCatalog::builtin()).empty());
}

TEST(DexScan, TagConstantsAndStringsAcrossMultidex) {
  TempDir dir;
  const Bytes first = dex::build_dex({{"Lcom/example/A;", {{"stamp", {Insn::sget(kExif, "TAG_DATETIME")}}}}});
  const Bytes second = dex::build_dex(
      {{"Lcom/example/B;", {{"camera", {Insn::const_string("Model"), Insn::sget(kExif, "TAG_MAKE")}}}}});
  const ApkPackage pkg = open_package(apk_with(dir, {{"classes.dex", first}, {"classes2.dex", second}}));
  const auto blocks = scan_dex_references(pkg, KeywordCatalog::builtin());
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[0].source_id, "classes.dex:Lcom/example/A;->stamp");
  EXPECT_EQ(blocks[0].implicated_types, TypeSet{MetadataType::DateTime});
  EXPECT_EQ(blocks[1].source_id, "classes2.dex:Lcom/example/B;->camera");
  EXPECT_EQ(blocks[1].implicated_types, (TypeSet{MetadataType::SmartphoneModel, MetadataType::SmartphoneBrand}));
}

TEST(DexScan, PayloadDataIsNotDecodedAsInstructions) {
  // Payload bytes that would read as "const-string v0, string@0" if the
  // walker stepped into them. String 0 is "GPSLatitude" (sorted first).
  const Bytes d = dex::build_dex({{"Lcom/example/P;",
                                   {{"table",
                                     {Insn::fill_array({0x1a, 0x00, 0x00, 0x00, 0x1a, 0x00}),
                                      Insn::const_string("safe")}},
                                    {"other", {Insn::const_string("GPSLatitude")}}}}});
  const dex::DexFile parsed = dex::DexFile::parse(d);
  ASSERT_EQ(parsed.strings().front(), "GPSLatitude");
  const auto blocks = dex::scan_dex_bytes("classes.dex", d, KeywordCatalog::builtin());
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_EQ(blocks[0].source_id, "classes.dex:Lcom/example/P;->other");
}

TEST(DexScan, BlockRespectsCharacterCap) {
  std::vector<Insn> code = {Insn::invoke(kExif, "getLatLong")};
  for (int i = 0; i < 200; ++i) code.push_back(Insn::const_string("filler string number " + std::to_string(i)));
  const Bytes d = dex::build_dex({{"Lcom/example/Big;", {{"run", code}}}});
  const auto blocks = dex::scan_dex_bytes("classes.dex", d, KeywordCatalog::builtin(), 300);
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_LE(blocks[0].text.size(), 300u);
  EXPECT_TRUE(blocks[0].truncated);
  // Matched references are listed before the rest, so they survive the cap.
  EXPECT_NE(blocks[0].text.find("getLatLong"), std::string::npos);
  EXPECT_EQ(blocks[0].implicated_types, TypeSet{MetadataType::Gps});
}

TEST(DexErrors, CorruptedMagicIsMalformed) {
  Bytes d = sharer_dex();
  d[0] = 'x';
  try {
    dex::DexFile::parse(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedDex);
  }
}

TEST(DexErrors, TruncationAndBadIndicesAreMalformed) {
  const Bytes d = sharer_dex();
  for (std::size_t cut : {std::size_t{0}, std::size_t{50}, std::size_t{0x70}, d.size() / 2, d.size() - 1}) {
    Bytes t(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(dex::scan_dex_bytes("classes.dex", t, KeywordCatalog::builtin()), Error) << cut;
  }
  // Point the invoke at a method id past the table.
  const dex::DexFile parsed = dex::DexFile::parse(d);
  Bytes bad = d;
  bool patched = false;
  for (std::size_t i = 0x70; i + 6 <= bad.size(); i += 2) {
    if (bad[i] == 0x71 && bad[i + 1] == 0x00 && bad[i + 4] == 0 && bad[i + 5] == 0) {
      bad[i + 2] = 0xFF;
      bad[i + 3] = 0x7F;
      patched = true;
      break;
    }
  }
  ASSERT_TRUE(patched);
  try {
    dex::scan_dex_bytes("classes.dex", bad, KeywordCatalog::builtin());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedDex);
  }
}

TEST(DexErrors, NoDexEntries) {
  TempDir dir;
  const ApkPackage pkg = open_package(apk_with(dir, {}));
  try {
    scan_dex_references(pkg, KeywordCatalog::builtin());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoDexEntries);
  }
}

TEST(DexInstructions, WidthsOfKnownFormats) {
  // Widths follow the format ids in the Dalvik bytecode table (10x, 21c, 35c, 51l, ...).
  auto width = [](std::vector<std::uint16_t> u) { return dex::instruction_width(u, 0); };
  EXPECT_EQ(width({0x000e}), 1u);                    // return-void 10x
  EXPECT_EQ(width({0x001a, 0}), 2u);                 // const-string 21c
  EXPECT_EQ(width({0x001b, 0, 0}), 3u);              // const-string/jumbo 31c
  EXPECT_EQ(width({0x0018, 0, 0, 0, 0}), 5u);        // const-wide 51l
  EXPECT_EQ(width({0x0071, 0, 0}), 3u);              // invoke-static 35c
  EXPECT_EQ(width({0x0077, 0, 0}), 3u);              // invoke-static/range 3rc
  EXPECT_EQ(width({0x00fa, 0, 0, 0}), 4u);           // invoke-polymorphic 45cc
  EXPECT_EQ(width({0x0090, 0}), 2u);                 // add-int 23x
  EXPECT_EQ(width({0x00b0}), 1u);                    // add-int/2addr 12x
  EXPECT_EQ(width({0x00d8, 0}), 2u);                 // add-int/lit8 22b
  EXPECT_EQ(width({0x0100, 3}), 4u + 6u);            // packed-switch payload
  EXPECT_EQ(width({0x0200, 3}), 2u + 12u);           // sparse-switch payload
  EXPECT_EQ(width({0x0300, 4, 3, 0}), 4u + 6u);      // fill-array-data, 3 ints
  EXPECT_EQ(width({0x0300, 1, 5, 0}), 4u + 3u);      // 5 bytes round up
  EXPECT_EQ(width({0x0400, 0}), 0u);                 // unknown payload ident
}

}  // namespace
}  // namespace exifaudit
