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
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "exifaudit/metadata_type.hpp"
#include "exifaudit/prompt.hpp"

namespace exifaudit {

struct SyntheticCorpusSpec {
  std::size_t app_count = 100;
  // Fraction of gate-passing apps that retain at least one type. Counts are
  // quotas (llround(rate * n)), not independent draws.
  double leak_rate = 0.219;
  // Among leaky apps, the fraction retaining each type.
  std::map<MetadataType, double> per_type_retention = default_retention();
  std::uint64_t seed = 7;
  // Fraction of apps whose manifest fails the strict gate (decoys).
  double gate_fail_rate = 0.0;

  static std::map<MetadataType, double> default_retention();
  // key = value text: app_count, leak_rate, seed, gate_fail_rate and
  // retention.<type>. Unknown keys throw Error{ConfigError}.
  static SyntheticCorpusSpec parse(std::string_view text);
  static SyntheticCorpusSpec load(const std::string& path);
  std::string serialize() const;
};

struct CorpusApp {
  std::string app_id;
  std::string package_name;
  // Paths relative to the corpus root.
  std::string apk;
  std::string source_dir;
  std::string original_image;
  std::string shared_image;
  bool gate_expected = true;
  bool leaky = false;
  // Types the planted code forwards unstripped. Decoys carry planted code too,
  // but the pipeline never looks past their gate.
  TypeSet retained;
  std::map<MetadataType, Disposition> expected_verdict;
};

struct CorpusManifest {
  SyntheticCorpusSpec spec;
  std::vector<CorpusApp> apps;

  std::size_t leaky_count() const;
  std::string to_json() const;
  // Throws Error{ConfigError} on a malformed document.
  static CorpusManifest from_json(std::string_view text);
};

inline constexpr char kCorpusManifestName[] = "corpus_manifest.json";

CorpusManifest load_corpus_manifest(const std::filesystem::path& corpus_root);

// Quota plan without touching the disk: which apps are decoys, which are
// leaky and which types each leaky app retains. Throws Error{ConfigError}
// when the spec is out of range or the per-type quotas cannot give every
// leaky app at least one type.
struct CorpusPlan {
  std::vector<bool> decoy;
  std::vector<bool> leaky;
  std::vector<TypeSet> retained;
};
CorpusPlan plan_corpus(const SyntheticCorpusSpec& spec);

// Writes apps/<app_id>/{app.apk, src/..., images/original.jpg,
// images/shared.jpg} and corpus_manifest.json under out_dir. Identical specs
// produce byte-identical trees. Throws Error{IoFailure}.
CorpusManifest synthesize_corpus(const SyntheticCorpusSpec& spec, const std::filesystem::path& out_dir,
                                 std::size_t parallelism = 1);

}  // namespace exifaudit
