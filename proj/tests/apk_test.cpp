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

#include <random>

#include "exifaudit/apk.hpp"
#include "support/temp_dir.hpp"

namespace exifaudit {
namespace {

using testing::TempDir;

const std::string kRead = "android.permission.READ_EXTERNAL_STORAGE";
const std::string kWrite = "android.permission.WRITE_EXTERNAL_STORAGE";
const std::string kInternet = "android.permission.INTERNET";

ManifestInfo info_with(std::set<std::string> perms, std::set<std::string> mimes) {
  ManifestInfo m;
  m.package_name = "com.example";
  m.requested_permissions = std::move(perms);
  m.intent_mime_types = std::move(mimes);
  return m;
}

TEST(ManifestParse, ThreePermissionsAndImageMime) {
  axml::ManifestFixture f;
  f.package_name = "com.example.share";
  f.permissions = {kRead, kWrite, kInternet};
  f.mime_types = {"image/*"};
  const ManifestInfo info = parse_binary_manifest(axml::encode_manifest(f));
  EXPECT_EQ(info.package_name, "com.example.share");
  EXPECT_EQ(info.requested_permissions, (std::set<std::string>{kRead, kWrite, kInternet}));
  EXPECT_EQ(info.intent_mime_types, (std::set<std::string>{"image/*"}));
  EXPECT_EQ(info.activity_count, 1u);
}

TEST(ManifestParse, NoPermissions) {
  axml::ManifestFixture f;
  f.activity_count = 3;
  const ManifestInfo info = parse_binary_manifest(axml::encode_manifest(f));
  EXPECT_TRUE(info.requested_permissions.empty());
  EXPECT_TRUE(info.intent_mime_types.empty());
  EXPECT_EQ(info.activity_count, 3u);
}

TEST(ManifestParse, Utf8PoolAndNonAscii) {
  axml::ManifestFixture f;
  f.package_name = "com.exämple.\xE2\x82\xAC";
  f.permissions = {kInternet};
  f.mime_types = {"image/jpeg", "video/mp4"};
  f.utf8_pool = true;
  const ManifestInfo info = parse_binary_manifest(axml::encode_manifest(f));
  EXPECT_EQ(info.package_name, f.package_name);
  EXPECT_EQ(info.intent_mime_types, (std::set<std::string>{"image/jpeg", "video/mp4"}));
}

TEST(ManifestParse, TruncatedStringPoolIsMalformed) {
  axml::ManifestFixture f;
  f.permissions = {kRead};
  Bytes bytes = axml::encode_manifest(f);
  // Cut inside the string pool, which starts right after the 8-byte header.
  bytes.resize(60);
  try {
    parse_binary_manifest(bytes);
    FAIL() << "expected MalformedAxml";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedAxml);
  }
}

TEST(ManifestParse, StringPoolChunkShorterThanItsStrings) {
  axml::ManifestFixture f;
  f.permissions = {kRead};
  Bytes bytes = axml::encode_manifest(f);
  // Shrink the pool's declared size (offset 8 + 4) so string data escapes it.
  const std::uint32_t declared = bytes[12] | bytes[13] << 8 | bytes[14] << 16 | bytes[15] << 24;
  const std::uint32_t shrunk = declared - 40;
  for (int i = 0; i < 4; ++i) bytes[12 + i] = static_cast<std::uint8_t>(shrunk >> (8 * i));
  EXPECT_THROW(parse_binary_manifest(bytes), Error);
}

TEST(ManifestParse, UnknownPoolFlagsAreUnsupportedEncoding) {
  Bytes bytes = axml::encode_manifest({});
  bytes[8 + 16 + 2] |= 0x02;  // flags word of the string pool header, bit 17
  try {
    parse_binary_manifest(bytes);
    FAIL() << "expected UnsupportedEncoding";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnsupportedEncoding);
  }
}

TEST(ManifestParse, NotBinaryXml) {
  const std::string text = "<manifest package=\"x\"/>";
  EXPECT_THROW(parse_binary_manifest(as_bytes(text)), Error);
}

TEST(ManifestParse, Deterministic) {
  axml::ManifestFixture f;
  f.permissions = {kRead, kInternet};
  f.mime_types = {"*/*"};
  const Bytes bytes = axml::encode_manifest(f);
  EXPECT_EQ(parse_binary_manifest(bytes), parse_binary_manifest(bytes));
}

TEST(ManifestParse, RandomFixturesRoundTrip) {
  const std::vector<std::string> perm_pool = {kRead, kWrite, kInternet, "android.permission.CAMERA",
                                              "android.permission.ACCESS_FINE_LOCATION",
                                              "com.example.permission.C2D_MESSAGE"};
  const std::vector<std::string> mime_pool = {"image/*", "image/png", "application/pdf", "text/plain", "*/*",
                                              "video/*"};
  std::mt19937 rng(1234);
  for (int round = 0; round < 50; ++round) {
    axml::ManifestFixture f;
    f.package_name = "com.r" + std::to_string(round);
    for (const auto& p : perm_pool) if (rng() & 1) f.permissions.push_back(p);
    for (const auto& m : mime_pool) if (rng() & 1) f.mime_types.push_back(m);
    f.activity_count = rng() % 4;
    f.utf8_pool = rng() & 1;
    const ManifestInfo info = parse_binary_manifest(axml::encode_manifest(f));
    EXPECT_EQ(info.requested_permissions, std::set<std::string>(f.permissions.begin(), f.permissions.end()));
    EXPECT_EQ(info.intent_mime_types, std::set<std::string>(f.mime_types.begin(), f.mime_types.end()));
  }
}

TEST(OpenPackage, ListsEntriesAndReadsManifest) {
  TempDir dir;
  axml::ManifestFixture f;
  f.permissions = {kInternet};
  const Bytes manifest = axml::encode_manifest(f);
  zip::Writer w;
  w.add("AndroidManifest.xml", manifest, zip::Method::Deflated);
  w.add("classes.dex", as_bytes(std::string(100, 'x')));
  w.add("res/raw/readme.txt", as_bytes(std::string("hello")), zip::Method::Deflated);
  const std::string path = dir.write("app.apk", std::move(w).finish());

  const ApkPackage pkg = open_package(path);
  ASSERT_EQ(pkg.entries().size(), 3u);
  EXPECT_EQ(pkg.entries()[1].name, "classes.dex");
  EXPECT_EQ(pkg.entries()[1].byte_length, 100u);
  EXPECT_EQ(pkg.manifest_bytes(), manifest);
  EXPECT_EQ(pkg.dex_entries(), std::vector<std::string>{"classes.dex"});
  EXPECT_EQ(to_string(pkg.read_entry("res/raw/readme.txt")), "hello");
}

TEST(OpenPackage, EmptyZipHasNoManifest) {
  TempDir dir;
  const std::string path = dir.write("empty.apk", zip::Writer{}.finish());
  try {
    open_package(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingManifest);
  }
}

TEST(OpenPackage, TextFileIsNotAnArchive) {
  TempDir dir;
  const std::string path = dir.write("notes.apk", std::string_view("just some text, definitely not a zip\n"));
  try {
    open_package(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotAnArchive);
  }
}

TEST(OpenPackage, CorruptedPayloadFailsCrc) {
  TempDir dir;
  zip::Writer w;
  w.add("AndroidManifest.xml", axml::encode_manifest({}));
  Bytes bytes = std::move(w).finish();
  bytes[30 + 19 + 10] ^= 0xFF;  // inside the stored manifest payload
  const std::string path = dir.write("bad.apk", bytes);
  EXPECT_THROW(open_package(path), Error);
}

TEST(Gate, FullPermissionsWithImageMimePasses) {
  const GateDecision d = gate_filter(info_with({kRead, kWrite, kInternet}, {"image/*"}), GatePolicy::strict());
  EXPECT_TRUE(d.passes);
  EXPECT_TRUE(d.image_share_supported);
  EXPECT_TRUE(d.missing_permissions.empty());
  EXPECT_TRUE(d.reasons.empty());
}

TEST(Gate, InternetOnlyReportsMissingStorage) {
  const GateDecision d = gate_filter(info_with({kInternet}, {"image/*"}), GatePolicy::strict());
  EXPECT_FALSE(d.passes);
  EXPECT_EQ(d.missing_permissions, (std::set<std::string>{kRead, kWrite}));
  EXPECT_EQ(d.reasons.size(), 2u);
}

TEST(Gate, PdfOnlySharerIsRejected) {
  const GateDecision d =
      gate_filter(info_with({kRead, kWrite, kInternet}, {"application/pdf"}), GatePolicy::strict());
  EXPECT_FALSE(d.passes);
  EXPECT_FALSE(d.image_share_supported);
  EXPECT_TRUE(d.missing_permissions.empty());
}

TEST(Gate, NoMimeTypesFailsClosed) {
  const GateDecision d = gate_filter(info_with({kRead, kWrite, kInternet}, {}), GatePolicy::strict());
  EXPECT_FALSE(d.passes);
  EXPECT_FALSE(d.image_share_supported);
}

TEST(Gate, ImageMimeMatching) {
  EXPECT_TRUE(is_image_mime("image/*"));
  EXPECT_TRUE(is_image_mime("image/jpeg"));
  EXPECT_TRUE(is_image_mime("*/*"));
  EXPECT_FALSE(is_image_mime("video/*"));
  EXPECT_FALSE(is_image_mime("application/pdf"));
  EXPECT_FALSE(is_image_mime("images/png"));
}

TEST(Gate, ModernPolicyAcceptsMediaPermission) {
  const auto info = info_with({"android.permission.READ_MEDIA_IMAGES", kWrite, kInternet}, {"image/png"});
  EXPECT_FALSE(gate_filter(info, GatePolicy::strict()).passes);
  EXPECT_TRUE(gate_filter(info, GatePolicy::modern()).passes);
  EXPECT_TRUE(GatePolicy::by_name("modern").has_value());
  EXPECT_FALSE(GatePolicy::by_name("lenient").has_value());
}

TEST(GateProperty, PassingImpliesRequiredSubsetAndMonotone) {
  const std::vector<std::string> pool = {kRead, kWrite, kInternet, "android.permission.CAMERA",
                                         "android.permission.READ_MEDIA_IMAGES"};
  const std::vector<std::string> mimes = {"image/*", "application/pdf", "*/*", "text/plain"};
  const GatePolicy policy = GatePolicy::strict();
  std::mt19937 rng(99);
  for (int i = 0; i < 500; ++i) {
    ManifestInfo m;
    for (const auto& p : pool) if (rng() % 2) m.requested_permissions.insert(p);
    for (const auto& t : mimes) if (rng() % 3 == 0) m.intent_mime_types.insert(t);
    const GateDecision d = gate_filter(m, policy);
    EXPECT_EQ(d.passes, d.missing_permissions.empty() && d.image_share_supported);
    if (d.passes) {
      for (const auto& g : policy.required) EXPECT_TRUE(m.requested_permissions.count(g.canonical));
    }
    ManifestInfo more = m;
    more.requested_permissions.insert(pool[rng() % pool.size()]);
    if (d.passes) EXPECT_TRUE(gate_filter(more, policy).passes);
  }
}

}  // namespace
}  // namespace exifaudit
