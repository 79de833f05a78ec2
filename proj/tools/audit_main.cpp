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

#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "exifaudit/audit.hpp"
#include "exifaudit/corpus.hpp"
#include "exifaudit/exif.hpp"
#include "exifaudit/rag.hpp"

namespace {

using namespace exifaudit;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitPartial = 2;
constexpr int kExitConfig = 3;

int fail(const Error& e) {
  std::cerr << "audit: " << e.what() << "\n";
  return e.code() == Errc::ConfigError || e.code() == Errc::BadCatalog || e.code() == Errc::UnknownTemplate ? kExitConfig
                                                                                                          : kExitFailure;
}

int cmd_run(const std::string& config_path, const std::string& input, const std::string& out) {
  AuditConfig config = AuditConfig::load(config_path);
  AuditResult result = run_audit(config, input);
  write_outputs(result, out);
  const AggregateReport& a = result.aggregate;
  std::printf("apps=%zu gated_in=%zu leaking=%zu", a.total_apps, a.gated_in, a.apps_leaking_any);
  if (a.fraction) std::printf(" fraction=%.4f", *a.fraction);
  if (result.evaluation) std::printf(" accuracy=%.4f", result.evaluation->accuracy);
  std::printf(" errors=%zu\n", a.apps_with_errors);
  return a.apps_with_errors ? kExitPartial : kExitOk;
}

int cmd_synth(const std::string& spec_path, const std::string& out) {
  SyntheticCorpusSpec spec = SyntheticCorpusSpec::load(spec_path);
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  CorpusManifest m = synthesize_corpus(spec, out, workers);
  std::printf("apps=%zu leaky=%zu manifest=%s\n", m.apps.size(), m.leaky_count(),
              (std::filesystem::path(out) / kCorpusManifestName).string().c_str());
  return kExitOk;
}

int cmd_index(const std::string& corpus, const std::string& store_path, std::size_t dim) {
  if (dim == 0) throw Error(Errc::ConfigError, "--dim must be positive");
  HashEmbedder embedder(dim);
  VectorStore store = index_corpus(read_knowledge_corpus(corpus), embedder);
  save_store(store, store_path);
  std::printf("records=%zu dim=%zu version=%s\n", store.size(), store.dim(), store.embedding_version().c_str());
  return kExitOk;
}

nlohmann::ordered_json value_json(const ExifValue& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::vector<Rational>>) {
          nlohmann::ordered_json a = nlohmann::ordered_json::array();
          for (const Rational& r : x) a.push_back({r.num, r.den});
          return a;
        } else {
          return x;
        }
      },
      v);
}

int cmd_exif(const std::string& image, const std::string& strip_out) {
  Bytes jpeg = read_file(image);
  auto records = parse_exif(jpeg);
  nlohmann::ordered_json doc;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const ExifRecord& r : records) {
    nlohmann::ordered_json j;
    j["ifd"] = std::string(to_string(r.ifd));
    j["tag"] = r.tag_id;
    j["type"] = static_cast<int>(r.value_type);
    j["value"] = value_json(r.value);
    list.push_back(std::move(j));
  }
  doc["records"] = list;
  doc["sensitive"] = to_strings(detect_sensitive_types(records).present);
  if (!strip_out.empty()) write_file_atomic(strip_out, strip_metadata(jpeg));
  std::cout << doc.dump() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EXIF metadata leak audit for Android apps"};
  app.require_subcommand(1);

  std::string config, input, out;
  auto* run = app.add_subcommand("run", "Audit a directory of APKs or a synthetic corpus");
  run->add_option("--config", config, "Key = value audit configuration")->required()->check(CLI::ExistingFile);
  run->add_option("--input", input, "Directory of APKs or a corpus root")->required();
  run->add_option("--out", out, "Output directory for reports")->required();

  std::string spec, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic corpus");
  synth->add_option("--spec", spec, "Key = value corpus spec")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output directory")->required();

  std::string corpus, store;
  std::size_t dim = kDefaultEmbeddingDim;
  auto* index = app.add_subcommand("index", "Embed a JSONL knowledge corpus into a vector store");
  index->add_option("--corpus", corpus, "JSONL with id, text and label")->required()->check(CLI::ExistingFile);
  index->add_option("--store", store, "Output store file")->required();
  index->add_option("--dim", dim, "Embedding dimension")->capture_default_str();

  std::string image, strip_out;
  auto* exif = app.add_subcommand("exif", "Dump the EXIF records of one JPEG");
  exif->add_option("--image", image, "JPEG file")->required()->check(CLI::ExistingFile);
  exif->add_option("--strip", strip_out, "Also write a copy without Exif segments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, input, out);
    if (*synth) return cmd_synth(spec, synth_out);
    if (*index) return cmd_index(corpus, store, dim);
    if (*exif) return cmd_exif(image, strip_out);
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    std::cerr << "audit: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
