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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exifaudit/apk.hpp"
#include "exifaudit/metadata_type.hpp"
#include "exifaudit/prompt.hpp"
#include "exifaudit/rag.hpp"

namespace exifaudit {

// Key = value configuration; see docs/formats.md for every key. Relative
// paths are resolved against the directory of the config file.
struct AuditConfig {
  GatePolicy gate = GatePolicy::strict();
  std::string catalog_path;           // empty: built-in catalog
  std::string templates_path;         // empty: built-in templates
  std::string store_path;             // saved vector store; wins over knowledge_corpus
  std::string knowledge_corpus_path;  // JSONL indexed at start-up; empty: built-in
  std::size_t embedding_dim = kDefaultEmbeddingDim;
  std::size_t top_k = 3;
  double min_similarity = 0.0;
  BackendConfig backend;
  std::optional<BackendConfig> summary_backend;  // unset: same backend object
  std::string rag_template = std::string(kRagTemplate);
  std::size_t max_prompt_chars = 24000;
  std::size_t max_block_chars = 4000;
  std::size_t parallelism = 4;
  std::uint64_t seed = 0;
  // Recount the aggregate by brute force after every run.
  bool self_check = false;

  // Throws Error{ConfigError}.
  static AuditConfig parse(std::string_view text, const std::filesystem::path& base_dir = {});
  static AuditConfig load(const std::string& path);
  // Referenced files exist and numbers are in range. Throws Error{ConfigError}.
  void validate() const;
};

// JSON lines of {"id", "text", "label"}. Throws Error{ConfigError}.
std::vector<CorpusInput> read_knowledge_corpus(const std::string& path);
std::vector<CorpusInput> parse_knowledge_corpus(std::string_view jsonl);
const std::vector<CorpusInput>& builtin_knowledge_corpus();

inline constexpr std::array<std::string_view, 2> kRiskTags = {"R6", "R9"};

struct LeakReport {
  std::string app_id;
  std::string mode;  // "source", "dex" or "none"
  GateDecision gate;
  std::size_t blocks_analyzed = 0;
  Verdict verdict = Verdict::unknown();
  TypeSet leaked_types;
  std::vector<std::string> errors;
};

struct AggregateReport {
  std::size_t total_apps = 0;
  std::size_t gated_in = 0;
  std::size_t apps_leaking_any = 0;
  std::optional<double> fraction;  // apps_leaking_any / gated_in; unset when gated_in == 0
  std::map<MetadataType, std::size_t> per_type_counts;
  std::size_t apps_with_errors = 0;
};

AggregateReport aggregate(const std::vector<LeakReport>& reports);
// Recounts from scratch and throws std::logic_error on any disagreement.
void verify_aggregate(const std::vector<LeakReport>& reports, const AggregateReport& agg);

// One unit of work: an APK plus, when present, its decompiled sources.
struct AuditApp {
  std::string app_id;
  std::filesystem::path apk;
  std::optional<std::filesystem::path> source_dir;
  std::optional<std::map<MetadataType, Disposition>> expected;
};

// A directory holding corpus_manifest.json yields the corpus apps. Otherwise
// every *.apk in the directory (sorted by name) is an app, and a sibling
// directory named after the APK stem, if present, holds its sources.
std::vector<AuditApp> discover_apps(const std::filesystem::path& input_dir);

struct AuditResult {
  std::vector<LeakReport> reports;
  AggregateReport aggregate;
  std::optional<EvaluationReport> evaluation;  // when every app has labels
};

// Gate, extract, retrieve, prompt, summarize and merge for every app on a
// pool of config.parallelism workers. Per-app failures land in the app's
// report. Throws Error{ConfigError} for an unusable config or input.
AuditResult run_audit(const AuditConfig& config, const std::filesystem::path& input_dir);

std::string report_to_json(const LeakReport& report);
std::string aggregate_to_json(const AggregateReport& agg);
std::string per_type_counts_csv(const AggregateReport& agg);
std::string evaluation_to_json(const EvaluationReport& eval);

// reports.jsonl, aggregate.json, per_type_counts.csv and, when labels are
// known, evaluation.json; each written atomically. Throws Error{IoFailure}.
void write_outputs(const AuditResult& result, const std::filesystem::path& out_dir);

}  // namespace exifaudit
