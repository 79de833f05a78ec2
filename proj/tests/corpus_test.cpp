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

#include <cmath>
#include <regex>

#include "exifaudit/apk.hpp"
#include "exifaudit/catalog.hpp"
#include "exifaudit/code_extract.hpp"
#include "exifaudit/corpus.hpp"
#include "exifaudit/dex.hpp"
#include "exifaudit/exif.hpp"
#include "support/temp_dir.hpp"

namespace exifaudit {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::map<MetadataType, std::size_t> type_counts(const CorpusPlan& plan) {
  std::map<MetadataType, std::size_t> out;
  for (std::size_t i = 0; i < plan.leaky.size(); ++i)
    if (plan.leaky[i])
      for (MetadataType t : plan.retained[i]) ++out[t];
  return out;
}

std::size_t count(const std::vector<bool>& v) { return static_cast<std::size_t>(std::count(v.begin(), v.end(), true)); }

std::string read_text(const fs::path& p) { return to_string(read_file(p.string())); }

std::string all_sources(const fs::path& dir) {
  std::string out;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out += read_text(f);
  return out;
}

std::map<std::string, Bytes> tree(const fs::path& root) {
  std::map<std::string, Bytes> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path().string());
  return out;
}

}  // namespace

TEST(CorpusPlan, QuotaForDefaultSpec) {
  SyntheticCorpusSpec spec;  // 100 apps, 0.219, seed 7
  CorpusPlan plan = plan_corpus(spec);
  EXPECT_EQ(count(plan.leaky), 22u);
  EXPECT_EQ(count(plan.decoy), 0u);
  // Per-type quotas: round(count / 1095 * 22).
  auto counts = type_counts(plan);
  EXPECT_EQ(counts[MetadataType::Gps], 14u);                 // 680 * 22 / 1095 = 13.66
  EXPECT_EQ(counts[MetadataType::DateTime], 21u);            // 20.95
  EXPECT_EQ(counts[MetadataType::SmartphoneModel], 21u);     // 21.20
  EXPECT_EQ(counts[MetadataType::SmartphoneBrand], 21u);     // 21.20
  EXPECT_EQ(counts[MetadataType::DeviceSerialNumber], 20u);  // 20.05
  for (std::size_t i = 0; i < plan.leaky.size(); ++i) EXPECT_EQ(plan.leaky[i], !plan.retained[i].empty());
}

TEST(CorpusPlan, QuotasAreExactAcrossSpecs) {
  for (std::size_t n : {1u, 7u, 50u, 333u, 1000u})
    for (double rate : {0.0, 0.05, 0.219, 0.5, 1.0})
      for (std::uint64_t seed : {1u, 99u}) {
        SyntheticCorpusSpec spec;
        spec.app_count = n;
        spec.leak_rate = rate;
        spec.seed = seed;
        spec.gate_fail_rate = 0.1;
        CorpusPlan plan = plan_corpus(spec);
        std::size_t decoys = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n)));
        std::size_t leaky = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n - decoys)));
        ASSERT_EQ(count(plan.decoy), decoys);
        ASSERT_EQ(count(plan.leaky), leaky);
        for (std::size_t i = 0; i < n; ++i) ASSERT_FALSE(plan.decoy[i] && plan.leaky[i]);
        auto counts = type_counts(plan);
        for (MetadataType t : kAllMetadataTypes)
          ASSERT_EQ(counts[t], static_cast<std::size_t>(std::llround(spec.per_type_retention[t] * static_cast<double>(leaky))));
      }
}

TEST(CorpusPlan, ZeroLeakRateAndInfeasibleQuotas) {
  SyntheticCorpusSpec spec;
  spec.leak_rate = 0.0;
  CorpusPlan plan = plan_corpus(spec);
  EXPECT_EQ(count(plan.leaky), 0u);
  for (const auto& r : plan.retained) EXPECT_TRUE(r.empty());

  SyntheticCorpusSpec none;
  for (auto& [t, r] : none.per_type_retention) r = 0.0;
  try {
    plan_corpus(none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConfigError);
  }
  SyntheticCorpusSpec bad;
  bad.leak_rate = 1.5;
  EXPECT_THROW(plan_corpus(bad), Error);
}

TEST(CorpusSpec, ParseAndSerialize) {
  auto spec = SyntheticCorpusSpec::parse("# demo\napp_count = 12\nleak_rate=0.5\nseed = 3\nretention.gps = 0.25\n");
  EXPECT_EQ(spec.app_count, 12u);
  EXPECT_EQ(spec.leak_rate, 0.5);
  EXPECT_EQ(spec.seed, 3u);
  EXPECT_EQ(spec.per_type_retention[MetadataType::Gps], 0.25);
  EXPECT_EQ(spec.per_type_retention[MetadataType::DateTime], 1043.0 / 1095);
  auto again = SyntheticCorpusSpec::parse(spec.serialize());
  EXPECT_EQ(again.serialize(), spec.serialize());
  EXPECT_THROW(SyntheticCorpusSpec::parse("colour = red\n"), Error);
  EXPECT_THROW(SyntheticCorpusSpec::parse("app_count = -4\n"), Error);
  EXPECT_THROW(SyntheticCorpusSpec::parse("leak_rate = lots\n"), Error);
  EXPECT_THROW(SyntheticCorpusSpec::parse("retention.colour = 0.1\n"), Error);
}

TEST(Corpus, ByteIdenticalForIdenticalSpecs) {
  TempDir a, b;
  SyntheticCorpusSpec spec;
  spec.app_count = 12;
  spec.leak_rate = 0.5;
  spec.gate_fail_rate = 0.2;
  synthesize_corpus(spec, a.path(), 1);
  synthesize_corpus(spec, b.path(), 4);
  auto ta = tree(a.path()), tb = tree(b.path());
  EXPECT_EQ(ta.size(), 12u * 5 + 1);
  EXPECT_TRUE(ta == tb);

  TempDir c;
  spec.seed = 8;
  synthesize_corpus(spec, c.path(), 1);
  EXPECT_FALSE(tree(c.path()) == ta);
}

TEST(Corpus, ManifestRoundTripsAndMatchesPlan) {
  TempDir dir;
  SyntheticCorpusSpec spec;
  spec.app_count = 20;
  spec.gate_fail_rate = 0.1;
  CorpusManifest m = synthesize_corpus(spec, dir.path());
  CorpusManifest loaded = load_corpus_manifest(dir.path());
  EXPECT_EQ(loaded.to_json(), m.to_json());
  EXPECT_EQ(loaded.apps.size(), 20u);
  CorpusPlan plan = plan_corpus(spec);
  EXPECT_EQ(m.leaky_count(), count(plan.leaky));
  for (std::size_t i = 0; i < m.apps.size(); ++i) {
    const CorpusApp& app = m.apps[i];
    EXPECT_EQ(app.gate_expected, !plan.decoy[i]);
    EXPECT_EQ(app.retained, plan.retained[i]);
    for (MetadataType t : kAllMetadataTypes) {
      Disposition want = !app.gate_expected ? Disposition::Unknown
                         : app.retained.contains(t) ? Disposition::Retained
                                                    : Disposition::Removed;
      EXPECT_EQ(app.expected_verdict.at(t), want);
    }
  }
}

// Images, manifests and code of every generated app agree with the planted
// ground truth.
TEST(Corpus, ConsistencyOfEveryApp) {
  TempDir dir;
  SyntheticCorpusSpec spec;
  spec.app_count = 40;
  spec.leak_rate = 0.6;
  spec.gate_fail_rate = 0.15;
  CorpusManifest m = synthesize_corpus(spec, dir.path(), 4);

  struct Pattern {
    MetadataType type;
    std::string tag;     // regex naming the tag constants
    std::string getter;  // regex for the typed getter, may be empty
  };
  const std::vector<Pattern> patterns = {
      {MetadataType::DateTime, "TAG_DATETIME\\w*", ""},
      {MetadataType::SmartphoneModel, "TAG_MODEL", ""},
      {MetadataType::SmartphoneBrand, "TAG_MAKE", ""},
      {MetadataType::DeviceSerialNumber, "TAG_BODY_SERIAL_NUMBER", ""},
      {MetadataType::Gps, "TAG_GPS_\\w+", "getLatLong"},
  };

  for (const CorpusApp& app : m.apps) {
    SCOPED_TRACE(app.app_id);
    auto original = detect_sensitive_types(parse_exif(read_file((dir.path() / app.original_image).string())));
    EXPECT_EQ(original.present.size(), 5u);
    auto shared = detect_sensitive_types(parse_exif(read_file((dir.path() / app.shared_image).string())));
    EXPECT_EQ(shared.present, app.retained);

    ApkPackage pkg = open_package((dir.path() / app.apk).string());
    ManifestInfo info = parse_binary_manifest(pkg.manifest_bytes());
    EXPECT_EQ(info.package_name, app.package_name);
    EXPECT_EQ(gate_filter(info, GatePolicy::strict()).passes, app.gate_expected);

    std::string src = all_sources(dir.path() / app.source_dir);
    for (const Pattern& p : patterns) {
      std::regex strip("setAttribute\\((?:ExifInterface\\.)?" + p.tag + ", null\\)");
      std::string read_alt = "getAttribute\\((?:ExifInterface\\.)?" + p.tag + "\\)";
      if (!p.getter.empty()) read_alt += "|" + p.getter + "\\(";
      std::regex read(read_alt);
      bool strips = std::regex_search(src, strip);
      bool reads = std::regex_search(src, read);
      if (app.retained.contains(p.type)) {
        EXPECT_TRUE(reads && !strips) << to_string(p.type);
      } else {
        EXPECT_TRUE(strips && !reads) << to_string(p.type);
        EXPECT_NE(src.find("saveAttributes()"), std::string::npos);
      }
    }

    // The catalog finds one block per planted method in both modes.
    auto blocks = extract_code_blocks(dir.path() / app.source_dir, KeywordCatalog::builtin());
    EXPECT_TRUE(blocks.errors.empty());
    EXPECT_EQ(blocks.blocks.size(), 5u);
    TypeSet implicated;
    for (const auto& b : blocks.blocks) implicated.insert(b.implicated_types.begin(), b.implicated_types.end());
    EXPECT_EQ(implicated.size(), 5u);
    auto dex_blocks = scan_dex_references(pkg, KeywordCatalog::builtin());
    EXPECT_EQ(dex_blocks.size(), 5u);
  }
}

TEST(Corpus, ZeroLeakRateProducesCleanSharedImages) {
  TempDir dir;
  SyntheticCorpusSpec spec;
  spec.app_count = 10;
  spec.leak_rate = 0.0;
  CorpusManifest m = synthesize_corpus(spec, dir.path());
  EXPECT_EQ(m.leaky_count(), 0u);
  for (const CorpusApp& app : m.apps) {
    EXPECT_TRUE(detect_sensitive_types(parse_exif(read_file((dir.path() / app.shared_image).string()))).present.empty());
    for (const auto& [t, d] : app.expected_verdict) EXPECT_EQ(d, Disposition::Removed);
  }
}

TEST(Corpus, UnwritableOutputIsIoFailure) {
  TempDir dir;
  std::string blocker = dir.write("blocker", std::string_view("x"));
  SyntheticCorpusSpec spec;
  spec.app_count = 2;
  try {
    synthesize_corpus(spec, fs::path(blocker) / "corpus");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IoFailure);
  }
}

}  // namespace exifaudit
