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

#include <chrono>
#include <cstdint>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "exifaudit/code_extract.hpp"
#include "exifaudit/metadata_type.hpp"
#include "exifaudit/rag.hpp"

namespace exifaudit {

// The fixed line between rendered context and the user prompt. A final
// prompt always ends with "\n" + kSeparatorLine + "\n" + user_prompt.
inline constexpr std::string_view kSeparatorLine = "===== exifaudit:input =====";
std::string separator();

inline constexpr std::string_view kRagTemplate = "exif-rag-v1";
inline constexpr std::string_view kFslTemplate = "fsl-v1";
inline constexpr std::string_view kSummaryTemplate = "summary-v1";
inline constexpr std::string_view kSummaryRetryTemplate = "summary-retry-v1";

// A template has a header (placeholders {{task}}, {{count}}) and a per-item
// part ({{index}}, {{label}}, {{text}}). Substitution is single-pass, so
// placeholder-like text inside values is never expanded.
struct PromptTemplate {
  std::string id;
  std::string header;
  std::string item;
  bool operator==(const PromptTemplate&) const = default;
};

class TemplateRegistry {
 public:
  TemplateRegistry() = default;
  explicit TemplateRegistry(std::vector<PromptTemplate> templates);

  static const TemplateRegistry& builtin();
  // "@template <id>", "@header", "@item", "@end" section lines; '#' lines
  // outside a section are comments. Throws Error{ConfigError}.
  static TemplateRegistry parse(std::string_view text);
  static TemplateRegistry load(const std::string& path);
  std::string serialize() const;

  bool contains(std::string_view id) const;
  // Throws Error{UnknownTemplate}.
  const PromptTemplate& get(std::string_view id) const;
  const std::vector<PromptTemplate>& templates() const { return templates_; }

 private:
  std::vector<PromptTemplate> templates_;
};

struct ContextItem {
  std::string label;
  std::string text;
  bool operator==(const ContextItem&) const = default;
};

struct PromptBundle {
  std::string user_prompt;
  std::vector<ContextItem> relevant_information;
  std::string final_prompt;
  std::string template_id;
};

struct PromptOptions {
  std::size_t max_prompt_chars = 24000;
  const TemplateRegistry* registry = nullptr;  // builtin() when null
  std::string task;                            // {{task}} in the header
};

// render(header, items) + separator() + user_prompt. Context items are kept
// in the given order and dropped from the end until the prompt fits.
// Throws Error{UnknownTemplate} or Error{PromptOverflow}.
PromptBundle build_prompt(std::string_view template_id, std::vector<ContextItem> context, std::string user_prompt,
                          const PromptOptions& options = {});

// Context comes from `retrieved` (already in descending similarity), so the
// lowest-similarity records are trimmed first.
PromptBundle build_rag_prompt(const CodeBlock& block, const std::vector<RetrievalResult>& retrieved,
                              std::string_view template_id = kRagTemplate, const PromptOptions& options = {});

struct FslExample {
  std::string input;
  std::string output_label;
};

struct FslExampleSet {
  std::string task_description;
  std::vector<FslExample> examples;
  std::vector<std::string> label_set;
};

// Throws Error{ConfigError} for an empty example list or a label outside
// label_set, and Error{UnknownTemplate}.
PromptBundle build_fsl_prompt(const FslExampleSet& examples, std::string user_input,
                              std::string_view template_id = kFslTemplate, const PromptOptions& options = {});

struct RawResponse {
  std::string text;
  std::string backend_id;
  std::chrono::milliseconds latency{0};
  std::optional<long long> prompt_tokens;
  std::optional<long long> completion_tokens;
};

// Bounds concurrent calls into one backend across every caller.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(std::size_t max_in_flight) : available_(max_in_flight) {}
  void acquire();
  void release();
  std::size_t peak() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t available_;
  std::size_t in_use_ = 0;
  std::size_t peak_ = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  // Raw completion for one prompt. Implementations throw
  // Error{BackendTimeout} or Error{BackendRejected}.
  virtual RawResponse complete(const std::string& prompt) const = 0;
  // Null means unrestricted.
  virtual InFlightLimiter* limiter() const { return nullptr; }
};

// Per-type rules applied to the user-prompt part of a final prompt (the
// text after the last separator):
//   strip:  setAttribute(TAG, null) followed later by saveAttributes(  -> removed
//   read:   getAttribute(TAG) or a typed getter, then an upload call     -> retained
//   otherwise                                                            -> unknown
// A prompt whose header asks for the verdict JSON is answered with that
// JSON, built from the "- <type>: ... STATUS" lines of the analysis.
struct OracleRule {
  MetadataType type;
  std::string tag_pattern;     // regex alternatives naming the tag
  std::string getter_pattern;  // typed getter method names, may be empty
};

class OracleBackend final : public Backend {
 public:
  OracleBackend();
  explicit OracleBackend(std::vector<OracleRule> rules, std::string upload_pattern);
  static const std::vector<OracleRule>& default_rules();
  static const std::string& default_upload_pattern();

  std::string id() const override { return "oracle-rules-v1"; }
  RawResponse complete(const std::string& prompt) const override;

 private:
  struct Compiled;
  std::shared_ptr<const Compiled> compiled_;
};

struct RemoteConfig {
  std::string endpoint;  // full URL of an OpenAI-compatible /chat/completions
  std::string model;
  std::string token_env = "AUDITOR_LLM_TOKEN";
  std::chrono::milliseconds timeout{std::chrono::seconds(60)};
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{std::chrono::seconds(1)};
  std::size_t max_in_flight = 4;
  // Forwarded as the request "seed" for providers that honour it.
  std::optional<std::uint64_t> seed;
};

// Chat-completion client requesting temperature 0. Transport failures and
// 429/5xx replies are retried with exponential backoff; other non-2xx
// replies are rejected immediately with the body in the message.
class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig config);
  std::string id() const override { return "remote:" + config_.model; }
  RawResponse complete(const std::string& prompt) const override;
  InFlightLimiter* limiter() const override { return limiter_.get(); }

 private:
  RemoteConfig config_;
  std::unique_ptr<InFlightLimiter> limiter_;
};

struct BackendConfig {
  enum class Kind { Oracle, Remote };
  Kind kind = Kind::Oracle;
  RemoteConfig remote;
};

std::shared_ptr<Backend> make_backend(const BackendConfig& config);

// Empty prompts are rejected locally with Error{BackendRejected}.
RawResponse invoke_backend(const PromptBundle& bundle, const Backend& backend);

enum class Disposition { Removed, Retained, Unknown };
std::string to_string(Disposition d);
std::optional<Disposition> parse_disposition(std::string_view s);

struct Verdict {
  std::map<MetadataType, Disposition> per_type;
  std::string rationale;
  std::string backend_id;
  std::string template_id;
  std::string raw_response_digest;

  // Every MetadataType mapped to Unknown.
  static Verdict unknown();
  TypeSet retained() const;
};

// Parses the summary JSON; nullopt when it does not satisfy the schema.
// Types the reply omits are Unknown.
std::optional<Verdict> parse_verdict_json(std::string_view reply);
std::string verdict_to_json(const Verdict& v);

// Stage (9): asks `backend` to condense `response` into the verdict JSON,
// re-asking once with the stricter template. Throws Error{UnparseableSummary}.
Verdict summarize_to_verdict(const RawResponse& response, const Backend& backend, const PromptOptions& options = {});

// Combines block verdicts for one app: retained > removed > unknown per type.
Verdict merge_verdicts(const std::vector<Verdict>& verdicts);

struct EvaluationReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;  // correct / total, 0 when total == 0
};

// One comparison per app: correct when the predicted map equals the expected
// map for all five types.
EvaluationReport evaluate(const std::vector<std::map<MetadataType, Disposition>>& predicted,
                          const std::vector<std::map<MetadataType, Disposition>>& expected);

}  // namespace exifaudit
