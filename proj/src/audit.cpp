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

#include "exifaudit/audit.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "exifaudit/catalog.hpp"
#include "exifaudit/code_extract.hpp"
#include "exifaudit/corpus.hpp"
#include "exifaudit/dex.hpp"
#include "exifaudit/parallel.hpp"
#include "exifaudit/text.hpp"

namespace exifaudit {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(Errc::ConfigError, what); }

std::string resolve(const fs::path& base, const std::string& value) {
  if (value.empty()) return value;
  fs::path p(value);
  return (p.is_relative() && !base.empty() ? base / p : p).lexically_normal().string();
}

BackendConfig::Kind backend_kind(const KeyValue& kv) {
  if (kv.value == "oracle") return BackendConfig::Kind::Oracle;
  if (kv.value == "remote") return BackendConfig::Kind::Remote;
  config_error("line " + std::to_string(kv.line) + ": " + kv.key + " must be oracle or remote");
}

// backend.<field> and summary_backend.<field>.
void set_backend_field(BackendConfig& b, std::string_view field, const KeyValue& kv) {
  RemoteConfig& r = b.remote;
  if (field == "endpoint") r.endpoint = kv.value;
  else if (field == "model") r.model = kv.value;
  else if (field == "token_env") r.token_env = kv.value;
  else if (field == "timeout_ms") r.timeout = std::chrono::milliseconds(kv_count(kv));
  else if (field == "attempts") r.attempts = static_cast<int>(std::min<std::uint64_t>(kv_count(kv), 100));
  else if (field == "backoff_ms") r.initial_backoff = std::chrono::milliseconds(kv_count(kv));
  else if (field == "max_in_flight") r.max_in_flight = kv_count(kv);
  else config_error("line " + std::to_string(kv.line) + ": unknown key " + kv.key);
}

void check_file(const std::string& path, const char* key) {
  if (path.empty()) return;
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) config_error(std::string(key) + " file not found: " + path);
}

void check_remote(const BackendConfig& b, const char* key) {
  if (b.kind != BackendConfig::Kind::Remote) return;
  if (b.remote.endpoint.empty()) config_error(std::string(key) + ".endpoint is required for a remote backend");
  if (b.remote.model.empty()) config_error(std::string(key) + ".model is required for a remote backend");
  if (b.remote.attempts < 1) config_error(std::string(key) + ".attempts must be positive");
  if (b.remote.max_in_flight == 0) config_error(std::string(key) + ".max_in_flight must be positive");
}

}  // namespace

AuditConfig AuditConfig::parse(std::string_view text, const fs::path& base_dir) {
  AuditConfig c;
  std::optional<std::string> summary_kind;
  BackendConfig summary;
  for (const KeyValue& kv : parse_key_values(text)) {
    const std::string& k = kv.key;
    if (k == "gate_policy") {
      auto p = GatePolicy::by_name(kv.value);
      if (!p) config_error("line " + std::to_string(kv.line) + ": unknown gate policy " + kv.value);
      c.gate = *p;
    } else if (k == "catalog") c.catalog_path = resolve(base_dir, kv.value);
    else if (k == "templates") c.templates_path = resolve(base_dir, kv.value);
    else if (k == "store") c.store_path = resolve(base_dir, kv.value);
    else if (k == "knowledge_corpus") c.knowledge_corpus_path = resolve(base_dir, kv.value);
    else if (k == "embedding_dim") c.embedding_dim = kv_count(kv);
    else if (k == "top_k") c.top_k = kv_count(kv);
    else if (k == "min_similarity") c.min_similarity = kv_real(kv);
    else if (k == "backend") c.backend.kind = backend_kind(kv);
    else if (k.starts_with("backend.")) set_backend_field(c.backend, std::string_view(k).substr(8), kv);
    else if (k == "summary_backend") {
      if (kv.value != "same") summary.kind = backend_kind(kv);
      summary_kind = kv.value;
    } else if (k.starts_with("summary_backend.")) set_backend_field(summary, std::string_view(k).substr(16), kv);
    else if (k == "rag_template") c.rag_template = kv.value;
    else if (k == "max_prompt_chars") c.max_prompt_chars = kv_count(kv);
    else if (k == "max_block_chars") c.max_block_chars = kv_count(kv);
    else if (k == "parallelism") c.parallelism = kv_count(kv);
    else if (k == "seed") c.seed = kv_count(kv);
    else if (k == "self_check") c.self_check = kv_bool(kv);
    else config_error("line " + std::to_string(kv.line) + ": unknown key " + k);
  }
  if (summary_kind && *summary_kind != "same") c.summary_backend = summary;
  c.backend.remote.seed = c.seed;
  if (c.summary_backend) c.summary_backend->remote.seed = c.seed;
  return c;
}

AuditConfig AuditConfig::load(const std::string& path) {
  Bytes b;
  try {
    b = read_file(path);
  } catch (const Error& e) {
    config_error("cannot read config " + path + ": " + e.what());
  }
  return parse(to_string(b), fs::path(path).parent_path());
}

void AuditConfig::validate() const {
  check_file(catalog_path, "catalog");
  check_file(templates_path, "templates");
  check_file(store_path, "store");
  check_file(knowledge_corpus_path, "knowledge_corpus");
  if (embedding_dim == 0) config_error("embedding_dim must be positive");
  if (top_k == 0) config_error("top_k must be positive");
  if (max_prompt_chars == 0) config_error("max_prompt_chars must be positive");
  if (max_block_chars == 0) config_error("max_block_chars must be positive");
  if (parallelism == 0) config_error("parallelism must be positive");
  if (!(min_similarity >= -1.0 && min_similarity <= 1.0)) config_error("min_similarity must be within [-1, 1]");
  check_remote(backend, "backend");
  if (summary_backend) check_remote(*summary_backend, "summary_backend");
}

// ---- knowledge corpus ----

namespace {

constexpr std::string_view kBuiltinKnowledgeCorpus = R"jsonl({"id":"kc-01","text":"ExifInterface exif = new ExifInterface(path);\nexif.setAttribute(ExifInterface.TAG_GPS_LATITUDE, null);\nexif.setAttribute(ExifInterface.TAG_GPS_LONGITUDE, null);\nexif.saveAttributes();\nupload(file);","label":"Clears the GPS position tags and writes the file back before it is uploaded, so location is removed."}
{"id":"kc-02","text":"float[] latLong = new float[2];\nif (exif.getLatLong(latLong)) {\n    api.uploadImage(file, latLong[0], latLong[1]);\n}","label":"Reads the GPS position and sends it along with the untouched image, so location is retained."}
{"id":"kc-03","text":"String taken = exif.getAttribute(ExifInterface.TAG_DATETIME);\nclient.upload(photo, taken);","label":"Reads the capture time and uploads the original file, so the datetime is retained."}
{"id":"kc-04","text":"exif.setAttribute(ExifInterface.TAG_DATETIME, null);\nexif.setAttribute(ExifInterface.TAG_DATETIME_ORIGINAL, null);\nexif.saveAttributes();","label":"Blanks both capture-time tags and persists the change, so the datetime is removed."}
{"id":"kc-05","text":"exif.setAttribute(ExifInterface.TAG_MAKE, null);\nexif.setAttribute(ExifInterface.TAG_MODEL, null);\nexif.saveAttributes();\nsendToServer(file);","label":"Drops the camera make and model before sending, so brand and model are removed."}
{"id":"kc-06","text":"String model = exif.getAttribute(ExifInterface.TAG_MODEL);\nString make = exif.getAttribute(ExifInterface.TAG_MAKE);\nuploader.uploadImage(file, make + \" \" + model);","label":"Forwards the device brand and model with the original image, so both are retained."}
{"id":"kc-07","text":"String serial = exif.getAttribute(ExifInterface.TAG_BODY_SERIAL_NUMBER);\nuploadImage(file, serial);","label":"Reads the body serial number and uploads it, so the device serial number is retained."}
{"id":"kc-08","text":"exif.setAttribute(ExifInterface.TAG_BODY_SERIAL_NUMBER, null);\nexif.saveAttributes();\nuploadImage(file);","label":"Erases the body serial number and saves before upload, so the serial number is removed."}
{"id":"kc-09","text":"exif.setAttribute(ExifInterface.TAG_GPS_LATITUDE, null);\nuploadImage(file);","label":"Changes a GPS tag in memory but never calls saveAttributes, so the uploaded file still carries location."}
{"id":"kc-10","text":"Bitmap bmp = BitmapFactory.decodeFile(path);\nByteArrayOutputStream out = new ByteArrayOutputStream();\nbmp.compress(Bitmap.CompressFormat.JPEG, 90, out);\nupload(out.toByteArray());","label":"Re-encodes the pixels into a new JPEG, which carries no EXIF block, so metadata is removed."}
)jsonl";

}  // namespace

std::vector<CorpusInput> parse_knowledge_corpus(std::string_view jsonl) {
  std::vector<CorpusInput> out;
  std::size_t lineno = 0;
  for (const std::string& line : split(jsonl, '\n')) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>(), j.at("label").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      config_error("knowledge corpus line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<CorpusInput> read_knowledge_corpus(const std::string& path) {
  Bytes b;
  try {
    b = read_file(path);
  } catch (const Error& e) {
    config_error("cannot read knowledge corpus " + path + ": " + e.what());
  }
  return parse_knowledge_corpus(to_string(b));
}

const std::vector<CorpusInput>& builtin_knowledge_corpus() {
  static const std::vector<CorpusInput> records = parse_knowledge_corpus(kBuiltinKnowledgeCorpus);
  return records;
}

// ---- aggregation ----

AggregateReport aggregate(const std::vector<LeakReport>& reports) {
  AggregateReport a;
  a.total_apps = reports.size();
  for (MetadataType t : kAllMetadataTypes) a.per_type_counts[t] = 0;
  for (const LeakReport& r : reports) {
    if (!r.errors.empty()) ++a.apps_with_errors;
    if (!r.gate.passes) continue;
    ++a.gated_in;
    if (!r.leaked_types.empty()) ++a.apps_leaking_any;
    for (MetadataType t : r.leaked_types) ++a.per_type_counts[t];
  }
  if (a.gated_in > 0) a.fraction = static_cast<double>(a.apps_leaking_any) / static_cast<double>(a.gated_in);
  return a;
}

void verify_aggregate(const std::vector<LeakReport>& reports, const AggregateReport& agg) {
  std::size_t gated = 0, any = 0;
  std::map<MetadataType, std::size_t> per;
  for (const LeakReport& r : reports) {
    TypeSet retained = r.verdict.retained();
    if (retained != r.leaked_types) throw std::logic_error(r.app_id + ": leaked_types disagree with the verdict");
    if (!r.gate.passes && r.blocks_analyzed != 0) throw std::logic_error(r.app_id + ": gated-out app has analyzed blocks");
    if (!r.gate.passes) continue;
    ++gated;
    bool leaks = false;
    for (MetadataType t : kAllMetadataTypes)
      if (r.verdict.per_type.count(t) && r.verdict.per_type.at(t) == Disposition::Retained) {
        ++per[t];
        leaks = true;
      }
    any += leaks ? 1 : 0;
  }
  if (gated != agg.gated_in || any != agg.apps_leaking_any || agg.total_apps != reports.size())
    throw std::logic_error("aggregate counts disagree with a recount");
  for (MetadataType t : kAllMetadataTypes) {
    std::size_t got = agg.per_type_counts.count(t) ? agg.per_type_counts.at(t) : 0;
    if (got != per[t] || got > agg.gated_in) throw std::logic_error("per-type count disagrees with a recount");
  }
  if (agg.apps_leaking_any > agg.gated_in) throw std::logic_error("more leaking apps than gated-in apps");
}

// ---- discovery ----

std::vector<AuditApp> discover_apps(const fs::path& input_dir) {
  std::error_code ec;
  if (!fs::is_directory(input_dir, ec)) config_error("input is not a directory: " + input_dir.string());
  std::vector<AuditApp> apps;
  if (fs::exists(input_dir / kCorpusManifestName)) {
    CorpusManifest m = load_corpus_manifest(input_dir);
    for (const CorpusApp& c : m.apps) {
      AuditApp a;
      a.app_id = c.app_id;
      a.apk = input_dir / c.apk;
      if (fs::is_directory(input_dir / c.source_dir)) a.source_dir = input_dir / c.source_dir;
      a.expected = c.expected_verdict;
      apps.push_back(std::move(a));
    }
    return apps;
  }
  for (const auto& e : fs::directory_iterator(input_dir)) {
    if (e.path().extension() != ".apk") continue;
    AuditApp a;
    a.app_id = e.path().stem().string();
    a.apk = e.path();
    fs::path src = input_dir / a.app_id;
    if (fs::is_directory(src)) a.source_dir = src;
    apps.push_back(std::move(a));
  }
  std::sort(apps.begin(), apps.end(), [](const AuditApp& x, const AuditApp& y) { return x.app_id < y.app_id; });
  return apps;
}

// ---- pipeline ----

namespace {

struct Pipeline {
  const AuditConfig& config;
  KeywordCatalog catalog;
  TemplateRegistry registry;
  std::unique_ptr<Embedder> embedder;
  VectorStore store;
  std::shared_ptr<Backend> backend;
  std::shared_ptr<Backend> summary_backend;

  PromptOptions prompt_options() const {
    PromptOptions o;
    o.max_prompt_chars = config.max_prompt_chars;
    o.registry = &registry;
    return o;
  }

  LeakReport run(const AuditApp& app) const {
    LeakReport r;
    r.app_id = app.app_id;
    r.mode = "none";
    std::optional<ApkPackage> pkg;
    try {
      pkg = open_package(app.apk.string());
      r.gate = gate_filter(parse_binary_manifest(pkg->manifest_bytes()), config.gate);
    } catch (const Error& e) {
      r.gate = GateDecision{};
      r.gate.reasons.push_back("package could not be read");
      r.errors.push_back(e.what());
      return r;
    }
    if (!r.gate.passes) return r;

    std::vector<CodeBlock> blocks;
    try {
      if (app.source_dir) {
        r.mode = "source";
        ExtractOptions eo;
        eo.max_block_chars = config.max_block_chars;
        ExtractionResult ex = extract_code_blocks(*app.source_dir, catalog, eo);
        for (const SourceError& se : ex.errors) r.errors.push_back("UnreadableSource: " + se.path + ": " + se.message);
        blocks = std::move(ex.blocks);
      } else {
        r.mode = "dex";
        blocks = scan_dex_references(*pkg, catalog, config.max_block_chars);
      }
    } catch (const Error& e) {
      r.errors.push_back(e.what());
    }

    std::vector<Verdict> verdicts;
    const PromptOptions po = prompt_options();
    RetrieveOptions ro;
    ro.k = config.top_k;
    ro.min_similarity = config.min_similarity;
    for (const CodeBlock& block : blocks) {
      try {
        Retrieval ret = retrieve_similar(store, *embedder, block.text, ro);
        PromptBundle bundle = build_rag_prompt(block, ret.results, config.rag_template, po);
        RawResponse resp = invoke_backend(bundle, *backend);
        Verdict v = summarize_to_verdict(resp, *summary_backend, po);
        v.backend_id = backend->id();
        v.template_id = config.rag_template;
        verdicts.push_back(std::move(v));
        ++r.blocks_analyzed;
      } catch (const Error& e) {
        r.errors.push_back(block.source_id + ": " + std::string(e.what()));
      }
    }
    if (!verdicts.empty()) r.verdict = merge_verdicts(verdicts);
    else r.verdict.backend_id = backend->id();
    r.leaked_types = r.verdict.retained();
    return r;
  }
};

}  // namespace

AuditResult run_audit(const AuditConfig& config, const fs::path& input_dir) {
  config.validate();
  Pipeline p{config, {}, {}, {}, {}, {}, {}};
  try {
    p.catalog = config.catalog_path.empty() ? KeywordCatalog::builtin() : KeywordCatalog::load(config.catalog_path);
  } catch (const Error& e) {
    config_error(std::string("catalog: ") + e.what());
  }
  p.registry = config.templates_path.empty() ? TemplateRegistry::builtin() : TemplateRegistry::load(config.templates_path);
  if (!p.registry.contains(config.rag_template)) config_error("unknown rag_template " + config.rag_template);
  for (std::string_view id : {kSummaryTemplate, kSummaryRetryTemplate})
    if (!p.registry.contains(id)) config_error("template registry lacks " + std::string(id));

  p.embedder = make_hash_embedder(config.embedding_dim);
  try {
    if (!config.store_path.empty()) p.store = load_store(config.store_path, *p.embedder);
    else
      p.store = index_corpus(config.knowledge_corpus_path.empty() ? builtin_knowledge_corpus()
                                                                  : read_knowledge_corpus(config.knowledge_corpus_path),
                             *p.embedder);
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    config_error(std::string("vector store: ") + e.what());
  }
  try {
    p.backend = make_backend(config.backend);
    p.summary_backend = config.summary_backend ? make_backend(*config.summary_backend) : p.backend;
  } catch (const Error& e) {
    config_error(std::string("backend: ") + e.what());
  }

  std::vector<AuditApp> apps = discover_apps(input_dir);
  AuditResult result;
  result.reports.resize(apps.size());
  parallel_for(apps.size(), config.parallelism, [&](std::size_t i) {
    try {
      result.reports[i] = p.run(apps[i]);
    } catch (const std::exception& e) {  // never abort the batch for one app
      LeakReport r;
      r.app_id = apps[i].app_id;
      r.mode = "none";
      r.errors.push_back(std::string("internal: ") + e.what());
      result.reports[i] = std::move(r);
    }
  });
  result.aggregate = aggregate(result.reports);
  if (config.self_check) verify_aggregate(result.reports, result.aggregate);

  if (!apps.empty() && std::all_of(apps.begin(), apps.end(), [](const AuditApp& a) { return a.expected.has_value(); })) {
    std::vector<std::map<MetadataType, Disposition>> predicted, expected;
    for (std::size_t i = 0; i < apps.size(); ++i) {
      predicted.push_back(result.reports[i].verdict.per_type);
      expected.push_back(*apps[i].expected);
    }
    result.evaluation = evaluate(predicted, expected);
  }
  return result;
}

// ---- serialization ----

namespace {

ordered_json types_json(const TypeSet& s) {
  ordered_json a = ordered_json::array();
  for (MetadataType t : kAllMetadataTypes)
    if (s.contains(t)) a.push_back(std::string(to_string(t)));
  return a;
}

}  // namespace

std::string report_to_json(const LeakReport& r) {
  ordered_json j;
  j["app_id"] = r.app_id;
  j["mode"] = r.mode;
  ordered_json gate;
  gate["passes"] = r.gate.passes;
  gate["missing_permissions"] = r.gate.missing_permissions;
  gate["image_share_supported"] = r.gate.image_share_supported;
  gate["reasons"] = r.gate.reasons;
  j["gate"] = gate;
  j["blocks_analyzed"] = r.blocks_analyzed;
  ordered_json verdict = ordered_json::parse(verdict_to_json(r.verdict));
  verdict["backend_id"] = r.verdict.backend_id;
  verdict["template_id"] = r.verdict.template_id;
  verdict["raw_response_digest"] = r.verdict.raw_response_digest;
  j["verdict"] = verdict;
  j["leaked_types"] = types_json(r.leaked_types);
  ordered_json tags = ordered_json::array();
  if (!r.leaked_types.empty())
    for (std::string_view t : kRiskTags) tags.push_back(std::string(t));
  j["risk_tags"] = tags;
  j["errors"] = r.errors;
  return j.dump();
}

std::string aggregate_to_json(const AggregateReport& a) {
  ordered_json j;
  j["total_apps"] = a.total_apps;
  j["gated_in"] = a.gated_in;
  ordered_json any;
  any["count"] = a.apps_leaking_any;
  any["fraction"] = a.fraction ? ordered_json(*a.fraction) : ordered_json(nullptr);
  j["apps_leaking_any"] = any;
  ordered_json per = ordered_json::object();
  for (MetadataType t : kAllMetadataTypes) per[std::string(to_string(t))] = a.per_type_counts.count(t) ? a.per_type_counts.at(t) : 0;
  j["per_type_counts"] = per;
  ordered_json tags = ordered_json::array();
  for (std::string_view t : kRiskTags) tags.push_back(std::string(t));
  j["risk_tags"] = tags;
  j["apps_with_errors"] = a.apps_with_errors;
  return j.dump(2) + "\n";
}

std::string per_type_counts_csv(const AggregateReport& a) {
  std::ostringstream os;
  os << "metadata_type,apps_leaking\n";
  for (MetadataType t : kAllMetadataTypes)
    os << to_string(t) << "," << (a.per_type_counts.count(t) ? a.per_type_counts.at(t) : 0) << "\n";
  return os.str();
}

std::string evaluation_to_json(const EvaluationReport& e) {
  ordered_json j;
  j["total"] = e.total;
  j["correct"] = e.correct;
  j["accuracy"] = e.accuracy;
  return j.dump(2) + "\n";
}

void write_outputs(const AuditResult& result, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
  std::string lines;
  for (const LeakReport& r : result.reports) lines += report_to_json(r) + "\n";
  write_file_atomic((out_dir / "reports.jsonl").string(), lines);
  write_file_atomic((out_dir / "aggregate.json").string(), aggregate_to_json(result.aggregate));
  write_file_atomic((out_dir / "per_type_counts.csv").string(), per_type_counts_csv(result.aggregate));
  if (result.evaluation) write_file_atomic((out_dir / "evaluation.json").string(), evaluation_to_json(*result.evaluation));
}

}  // namespace exifaudit
