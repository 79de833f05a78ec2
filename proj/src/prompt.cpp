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

#include "exifaudit/prompt.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>
#include <set>
#include <thread>

#include <json.hpp>

#include "exifaudit/bytes.hpp"
#include "exifaudit/error.hpp"
#include "exifaudit/hash.hpp"
#include "exifaudit/http.hpp"
#include "exifaudit/text.hpp"

namespace exifaudit {
namespace {

// Kept identical to data/templates.txt (checked by a unit test).
constexpr std::string_view kBuiltinTemplates = R"TPL(# Prompt templates. Each section runs from "@template <id>" to "@end";
# "@header" and "@item" start the two parts. Header placeholders: {{task}},
# {{count}}. Item placeholders: {{index}}, {{label}}, {{text}}.
@template exif-rag-v1
@header
You review Android app code that handles images before they are shared.
For each metadata type (datetime, smartphone_model, smartphone_brand, device_serial_number, gps), decide whether the code under review removes it from the image, keeps it in an image that leaves the device, or shows no handling of it.
Labeled reference snippets ({{count}}):
@item
--- reference {{index}}: {{label}}
{{text}}
@end
@template fsl-v1
@header
{{task}}
Labeled examples ({{count}}):
@item
--- example {{index}}
input:
{{text}}
output: {{label}}
@end
@template summary-v1
@header
Condense the analysis below into one JSON object and write nothing else.
Schema: {"verdict": {"<type>": "removed" | "retained" | "unknown"}, "rationale": "<string>"}
Types: datetime, smartphone_model, smartphone_brand, device_serial_number, gps. Leave a type out only if the analysis says nothing about it.
@item
@end
@template summary-retry-v1
@header
The previous reply could not be read as the required JSON. Reply with the JSON object only: no prose, no code fences.
Schema: {"verdict": {"<type>": "removed" | "retained" | "unknown"}, "rationale": "<string>"}
Types: datetime, smartphone_model, smartphone_brand, device_serial_number, gps.
@item
@end
)TPL";

// Single left-to-right pass: substituted values are never rescanned.
std::string substitute(std::string_view pattern, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern.compare(i, 2, "{{") == 0) {
      const std::size_t close = pattern.find("}}", i + 2);
      if (close != std::string_view::npos) {
        const auto it = values.find(std::string(pattern.substr(i + 2, close - i - 2)));
        if (it != values.end()) {
          out += it->second;
          i = close + 2;
          continue;
        }
      }
    }
    out.push_back(pattern[i++]);
  }
  return out;
}

std::string render(const PromptTemplate& t, const std::vector<ContextItem>& items, std::size_t n,
                   const std::string& task) {
  std::string out = substitute(t.header, {{"task", task}, {"count", std::to_string(n)}});
  for (std::size_t i = 0; i < n; ++i) {
    out += "\n";
    out += substitute(t.item, {{"index", std::to_string(i + 1)}, {"label", items[i].label}, {"text", items[i].text}});
  }
  return out;
}

const TemplateRegistry& registry_of(const PromptOptions& o) {
  return o.registry ? *o.registry : TemplateRegistry::builtin();
}

// The text after the last separator line, or everything when absent.
std::pair<std::string_view, std::string_view> split_prompt(std::string_view prompt) {
  const std::string sep = separator();
  const std::size_t at = prompt.rfind(sep);
  if (at == std::string_view::npos) return {{}, prompt};
  return {prompt.substr(0, at), prompt.substr(at + sep.size())};
}

}  // namespace

std::string separator() { return "\n" + std::string(kSeparatorLine) + "\n"; }

TemplateRegistry::TemplateRegistry(std::vector<PromptTemplate> templates) : templates_(std::move(templates)) {
  std::set<std::string_view> ids;
  for (const PromptTemplate& t : templates_) {
    if (t.id.empty()) throw Error(Errc::ConfigError, "template without an id");
    if (!ids.insert(t.id).second) throw Error(Errc::ConfigError, "duplicate template id '" + t.id + "'");
  }
}

const TemplateRegistry& TemplateRegistry::builtin() {
  static const TemplateRegistry r = parse(kBuiltinTemplates);
  return r;
}

TemplateRegistry TemplateRegistry::parse(std::string_view text) {
  enum class Part { None, Header, Item };
  std::vector<PromptTemplate> out;
  std::optional<PromptTemplate> cur;
  Part part = Part::None;
  std::vector<std::string> header, item;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw Error(Errc::ConfigError, "templates line " + std::to_string(line_no) + ": " + why);
  };
  auto join = [](const std::vector<std::string>& lines) {
    std::string s;
    for (std::size_t i = 0; i < lines.size(); ++i) s += (i ? "\n" : "") + lines[i];
    return s;
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!cur) {
      if (line.empty() || line[0] == '#') continue;
      if (!line.starts_with("@template ")) fail("expected @template");
      cur = PromptTemplate{std::string(trim(std::string_view(line).substr(10))), {}, {}};
      part = Part::None;
      header.clear();
      item.clear();
      continue;
    }
    if (line == "@header") {
      part = Part::Header;
    } else if (line == "@item") {
      part = Part::Item;
    } else if (line == "@end") {
      cur->header = join(header);
      cur->item = join(item);
      out.push_back(std::move(*cur));
      cur.reset();
    } else if (part == Part::Header) {
      header.push_back(line);
    } else if (part == Part::Item) {
      item.push_back(line);
    } else {
      fail("text outside @header/@item");
    }
  }
  if (cur) fail("template '" + cur->id + "' has no @end");
  return TemplateRegistry(std::move(out));
}

TemplateRegistry TemplateRegistry::load(const std::string& path) {
  try {
    return parse(to_string(read_file(path)));
  } catch (const Error& e) {
    if (e.code() == Errc::IoFailure) throw Error(Errc::ConfigError, e.what());
    throw;
  }
}

std::string TemplateRegistry::serialize() const {
  std::string out;
  for (const PromptTemplate& t : templates_) {
    out += "@template " + t.id + "\n@header\n";
    if (!t.header.empty()) out += t.header + "\n";
    out += "@item\n";
    if (!t.item.empty()) out += t.item + "\n";
    out += "@end\n";
  }
  return out;
}

bool TemplateRegistry::contains(std::string_view id) const {
  return std::any_of(templates_.begin(), templates_.end(), [&](const PromptTemplate& t) { return t.id == id; });
}

const PromptTemplate& TemplateRegistry::get(std::string_view id) const {
  for (const PromptTemplate& t : templates_) {
    if (t.id == id) return t;
  }
  throw Error(Errc::UnknownTemplate, "no template '" + std::string(id) + "'");
}

PromptBundle build_prompt(std::string_view template_id, std::vector<ContextItem> context, std::string user_prompt,
                          const PromptOptions& options) {
  const PromptTemplate& t = registry_of(options).get(template_id);
  const std::string sep = separator();
  if (user_prompt.size() > options.max_prompt_chars) {
    throw Error(Errc::PromptOverflow, "user prompt of " + std::to_string(user_prompt.size()) +
                                          " chars exceeds max_prompt_chars " + std::to_string(options.max_prompt_chars));
  }
  std::size_t n = context.size();
  for (;;) {
    std::string head = render(t, context, n, options.task);
    if (head.size() + sep.size() + user_prompt.size() <= options.max_prompt_chars) {
      context.resize(n);
      PromptBundle b;
      b.final_prompt = std::move(head) + sep + user_prompt;
      b.user_prompt = std::move(user_prompt);
      b.relevant_information = std::move(context);
      b.template_id = t.id;
      return b;
    }
    if (n == 0) {
      throw Error(Errc::PromptOverflow, "template '" + t.id + "' and user prompt exceed max_prompt_chars " +
                                            std::to_string(options.max_prompt_chars));
    }
    --n;
  }
}

PromptBundle build_rag_prompt(const CodeBlock& block, const std::vector<RetrievalResult>& retrieved,
                              std::string_view template_id, const PromptOptions& options) {
  std::vector<ContextItem> context;
  for (const RetrievalResult& r : retrieved) context.push_back({r.record.label, r.record.text});
  return build_prompt(template_id, std::move(context), block.text, options);
}

PromptBundle build_fsl_prompt(const FslExampleSet& set, std::string user_input, std::string_view template_id,
                              const PromptOptions& options) {
  if (set.examples.empty()) throw Error(Errc::ConfigError, "few-shot example set is empty");
  std::vector<ContextItem> context;
  for (const FslExample& e : set.examples) {
    if (std::find(set.label_set.begin(), set.label_set.end(), e.output_label) == set.label_set.end()) {
      throw Error(Errc::ConfigError, "example label '" + e.output_label + "' is not in the declared label set");
    }
    context.push_back({e.output_label, e.input});
  }
  PromptOptions o = options;
  o.task = set.task_description;
  PromptBundle b = build_prompt(template_id, context, std::move(user_input), o);
  if (b.relevant_information.size() != context.size()) {
    throw Error(Errc::PromptOverflow, "few-shot examples do not fit in max_prompt_chars");
  }
  return b;
}

void InFlightLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_use_ < available_; });
  ++in_use_;
  peak_ = std::max(peak_, in_use_);
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_use_;
  }
  cv_.notify_one();
}

std::size_t InFlightLimiter::peak() const {
  std::lock_guard lock(mu_);
  return peak_;
}

// ---- oracle ----

struct OracleBackend::Compiled {
  struct Rule {
    MetadataType type;
    std::regex strip;
    std::regex read;
  };
  std::vector<Rule> rules;
  std::regex save{R"(saveAttributes\s*\()"};
  std::regex upload;
};

const std::vector<OracleRule>& OracleBackend::default_rules() {
  static const std::vector<OracleRule> rules = {
      {MetadataType::DateTime, R"(TAG_DATETIME(?:_ORIGINAL|_DIGITIZED)?|"DateTime(?:Original|Digitized)?")",
       "getDateTime(?:Original|Digitized)?"},
      {MetadataType::SmartphoneModel, R"(TAG_MODEL|"Model")", ""},
      {MetadataType::SmartphoneBrand, R"(TAG_MAKE|"Make")", ""},
      {MetadataType::DeviceSerialNumber, R"(TAG_BODY_SERIAL_NUMBER|"BodySerialNumber")", ""},
      {MetadataType::Gps, R"(TAG_GPS_\w+|"GPS\w+")", "getLatLong|getAltitude|getGpsDateTime|getGPS"},
  };
  return rules;
}

const std::string& OracleBackend::default_upload_pattern() {
  static const std::string p =
      R"(\b(?:upload\w*|HttpURLConnection|openConnection|OkHttpClient|MultipartBody|sendToServer|postImage\w*)\b)";
  return p;
}

OracleBackend::OracleBackend() : OracleBackend(default_rules(), default_upload_pattern()) {}

OracleBackend::OracleBackend(std::vector<OracleRule> rules, std::string upload_pattern) {
  auto c = std::make_shared<Compiled>();
  for (const OracleRule& r : rules) {
    const std::string tag = "(?:" + r.tag_pattern + ")";
    const std::string qualified = R"((?:[\w$]+\.)*)" + tag;
    std::string read = R"(getAttribute(?:Int|Double)?\s*\(\s*)" + qualified + R"(\s*[,)])";
    if (!r.getter_pattern.empty()) read += R"(|\b(?:)" + r.getter_pattern + R"()\s*\()";
    c->rules.push_back({r.type, std::regex(R"(setAttribute\s*\(\s*)" + qualified + R"(\s*,\s*null\s*\))"),
                        std::regex(read)});
  }
  c->upload = std::regex(upload_pattern, std::regex::ECMAScript | std::regex::icase);
  compiled_ = std::move(c);
}

namespace {

std::optional<std::size_t> find_from(const std::string& s, const std::regex& re, std::size_t from) {
  std::smatch m;
  if (from > s.size() || !std::regex_search(s.cbegin() + static_cast<std::ptrdiff_t>(from), s.cend(), m, re)) {
    return std::nullopt;
  }
  return from + static_cast<std::size_t>(m.position(0));
}

std::string oracle_summary(std::string_view analysis) {
  static const std::regex kLine(R"(^- (\w+): (.*) (REMOVED|RETAINED|UNKNOWN)$)");
  nlohmann::json verdict = nlohmann::json::object();
  std::vector<std::string> reasons;
  for (const std::string& raw : split(analysis, '\n')) {
    std::smatch m;
    const std::string line(trim(raw));
    if (!std::regex_match(line, m, kLine) || !parse_metadata_type(m[1].str())) continue;
    const std::string status = to_lower(m[3].str());
    verdict[m[1].str()] = status;
    if (status == "retained") reasons.push_back(m[1].str() + ": " + m[2].str());
  }
  std::string rationale;
  for (const auto& r : reasons) rationale += (rationale.empty() ? "" : " ") + r;
  if (rationale.empty()) rationale = "no metadata type is retained";
  return nlohmann::json{{"verdict", verdict}, {"rationale", rationale}}.dump();
}

}  // namespace

RawResponse OracleBackend::complete(const std::string& prompt) const {
  const auto start = std::chrono::steady_clock::now();
  const auto [head, body] = split_prompt(prompt);
  RawResponse r;
  r.backend_id = id();
  if (head.find("\"verdict\"") != std::string_view::npos) {
    r.text = oracle_summary(body);
  } else {
    const std::string code(body);
    std::string out = "Findings for the code under review, one line per metadata type:\n";
    for (const Compiled::Rule& rule : compiled_->rules) {
      const std::string name(to_string(rule.type));
      std::optional<std::size_t> effective_strip;
      if (auto s = find_from(code, rule.strip, 0)) effective_strip = find_from(code, compiled_->save, *s);
      std::optional<std::size_t> upload;
      if (auto rd = find_from(code, rule.read, 0)) upload = find_from(code, compiled_->upload, *rd);
      if (upload && (!effective_strip || *effective_strip > *upload)) {
        out += "- " + name + ": the value is read and the image is then sent off the device without clearing it. RETAINED\n";
      } else if (effective_strip) {
        out += "- " + name + ": the tag is set to null and the change is saved with saveAttributes(). REMOVED\n";
      } else {
        out += "- " + name + ": this block neither clears nor forwards the tag. UNKNOWN\n";
      }
    }
    r.text = std::move(out);
  }
  r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  return r;
}

// ---- remote ----

RemoteBackend::RemoteBackend(RemoteConfig config)
    : config_(std::move(config)), limiter_(std::make_unique<InFlightLimiter>(std::max<std::size_t>(1, config_.max_in_flight))) {
  if (config_.endpoint.empty()) throw Error(Errc::ConfigError, "remote backend needs an endpoint");
  if (config_.attempts < 1) throw Error(Errc::ConfigError, "remote backend needs at least one attempt");
}

RawResponse RemoteBackend::complete(const std::string& prompt) const {
  HttpRequest req;
  req.url = config_.endpoint;
  req.timeout = config_.timeout;
  nlohmann::json body{{"model", config_.model},
                      {"messages", {{{"role", "user"}, {"content", prompt}}}},
                      {"temperature", 0}};
  if (config_.seed) body["seed"] = *config_.seed;
  req.body = body.dump();
  if (const char* token = std::getenv(config_.token_env.c_str()); token && *token) {
    req.headers.emplace_back("Authorization", std::string("Bearer ") + token);
  }

  std::optional<Error> last;
  auto backoff = config_.initial_backoff;
  for (int attempt = 1; attempt <= config_.attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    const auto start = std::chrono::steady_clock::now();
    HttpResponse resp;
    try {
      resp = http_post_json(req);
    } catch (const Error& e) {
      if (e.code() != Errc::BackendTimeout) throw;
      last = Error(Errc::BackendTimeout, std::string(e.what()) + " (attempt " + std::to_string(attempt) + " of " +
                                             std::to_string(config_.attempts) + ")");
      continue;
    }
    if (resp.status == 429 || resp.status >= 500) {
      last = Error(Errc::BackendRejected, "HTTP " + std::to_string(resp.status) + ": " + resp.body);
      continue;
    }
    if (resp.status < 200 || resp.status >= 300) {
      throw Error(Errc::BackendRejected, "HTTP " + std::to_string(resp.status) + ": " + resp.body);
    }
    RawResponse r;
    r.backend_id = id();
    r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    try {
      const auto j = nlohmann::json::parse(resp.body);
      r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
      if (j.contains("usage")) {
        const auto& u = j["usage"];
        if (u.contains("prompt_tokens")) r.prompt_tokens = u["prompt_tokens"].get<long long>();
        if (u.contains("completion_tokens")) r.completion_tokens = u["completion_tokens"].get<long long>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::BackendRejected, std::string("unexpected reply shape: ") + e.what() + ": " + resp.body);
    }
    return r;
  }
  throw *last;
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.kind == BackendConfig::Kind::Remote) return std::make_shared<RemoteBackend>(config.remote);
  return std::make_shared<OracleBackend>();
}

RawResponse invoke_backend(const PromptBundle& bundle, const Backend& backend) {
  if (bundle.final_prompt.empty()) throw Error(Errc::BackendRejected, "refusing to send an empty prompt");
  InFlightLimiter* limiter = backend.limiter();
  if (!limiter) return backend.complete(bundle.final_prompt);
  limiter->acquire();
  struct Release {
    InFlightLimiter* l;
    ~Release() { l->release(); }
  } release{limiter};
  return backend.complete(bundle.final_prompt);
}

// ---- verdicts ----

std::string to_string(Disposition d) {
  switch (d) {
    case Disposition::Removed: return "removed";
    case Disposition::Retained: return "retained";
    case Disposition::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Disposition> parse_disposition(std::string_view s) {
  const std::string l = to_lower(trim(s));
  if (l == "removed") return Disposition::Removed;
  if (l == "retained") return Disposition::Retained;
  if (l == "unknown") return Disposition::Unknown;
  return std::nullopt;
}

Verdict Verdict::unknown() {
  Verdict v;
  for (MetadataType t : kAllMetadataTypes) v.per_type[t] = Disposition::Unknown;
  return v;
}

TypeSet Verdict::retained() const {
  TypeSet out;
  for (const auto& [t, d] : per_type) {
    if (d == Disposition::Retained) out.insert(t);
  }
  return out;
}

std::optional<Verdict> parse_verdict_json(std::string_view reply) {
  const std::size_t open = reply.find('{');
  const std::size_t close = reply.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply.substr(open, close - open + 1));
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (!j.is_object() || !j.contains("verdict") || !j["verdict"].is_object()) return std::nullopt;
  if (j.contains("rationale") && !j["rationale"].is_string()) return std::nullopt;
  Verdict v = Verdict::unknown();
  for (const auto& [key, value] : j["verdict"].items()) {
    const auto type = parse_metadata_type(key);
    if (!type || !value.is_string()) return std::nullopt;
    const auto d = parse_disposition(value.get<std::string>());
    if (!d) return std::nullopt;
    v.per_type[*type] = *d;
  }
  v.rationale = j.value("rationale", "");
  if (v.rationale.empty() && !v.retained().empty()) {
    v.rationale = "no rationale given; retained:";
    for (const std::string& t : to_strings(v.retained())) v.rationale += " " + t;
  }
  return v;
}

std::string verdict_to_json(const Verdict& v) {
  nlohmann::ordered_json verdict = nlohmann::ordered_json::object();
  for (MetadataType t : kAllMetadataTypes) {
    const auto it = v.per_type.find(t);
    verdict[to_string(t)] = to_string(it == v.per_type.end() ? Disposition::Unknown : it->second);
  }
  return nlohmann::ordered_json{{"verdict", verdict}, {"rationale", v.rationale}}.dump();
}

Verdict summarize_to_verdict(const RawResponse& response, const Backend& backend, const PromptOptions& options) {
  if (response.text.empty()) throw Error(Errc::UnparseableSummary, "empty response to summarize");
  for (std::string_view tid : {kSummaryTemplate, kSummaryRetryTemplate}) {
    // Long analyses are cut to fit; the verdict lines come first in practice.
    const PromptTemplate& t = registry_of(options).get(tid);
    const std::size_t overhead = render(t, {}, 0, options.task).size() + separator().size();
    std::string text = response.text;
    if (overhead < options.max_prompt_chars && text.size() > options.max_prompt_chars - overhead) {
      text.resize(options.max_prompt_chars - overhead);
    }
    const PromptBundle bundle = build_prompt(tid, {}, std::move(text), options);
    const RawResponse reply = invoke_backend(bundle, backend);
    if (auto v = parse_verdict_json(reply.text)) {
      v->backend_id = backend.id();
      v->template_id = std::string(tid);
      v->raw_response_digest = fnv1a64_digest(response.text);
      return *v;
    }
  }
  throw Error(Errc::UnparseableSummary, "summary reply did not match the verdict schema after one re-ask");
}

Verdict merge_verdicts(const std::vector<Verdict>& verdicts) {
  Verdict out = Verdict::unknown();
  if (verdicts.empty()) return out;
  auto rank = [](Disposition d) { return d == Disposition::Retained ? 2 : d == Disposition::Removed ? 1 : 0; };
  std::string digests;
  std::set<std::string> seen;
  for (const Verdict& v : verdicts) {
    for (const auto& [t, d] : v.per_type) {
      if (rank(d) > rank(out.per_type[t])) out.per_type[t] = d;
    }
    digests += v.raw_response_digest;
  }
  // Once anything is retained, explanations from blocks that retain nothing
  // would contradict the merged verdict.
  const bool any_retained = !out.retained().empty();
  for (const Verdict& v : verdicts) {
    if (any_retained && v.retained().empty()) continue;
    if (!v.rationale.empty() && seen.insert(v.rationale).second) {
      out.rationale += (out.rationale.empty() ? "" : "\n") + v.rationale;
    }
  }
  out.backend_id = verdicts.front().backend_id;
  out.template_id = verdicts.front().template_id;
  out.raw_response_digest = fnv1a64_digest(digests);
  return out;
}

EvaluationReport evaluate(const std::vector<std::map<MetadataType, Disposition>>& predicted,
                          const std::vector<std::map<MetadataType, Disposition>>& expected) {
  if (predicted.size() != expected.size()) throw std::invalid_argument("prediction and label counts differ");
  auto full = [](std::map<MetadataType, Disposition> m) {
    for (MetadataType t : kAllMetadataTypes) m.try_emplace(t, Disposition::Unknown);
    return m;
  };
  EvaluationReport r;
  r.total = predicted.size();
  for (std::size_t i = 0; i < predicted.size(); ++i) r.correct += full(predicted[i]) == full(expected[i]);
  r.accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
  return r;
}

}  // namespace exifaudit
