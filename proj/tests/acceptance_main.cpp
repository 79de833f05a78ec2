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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <regex>
#include <string>
#include <vector>

// jpeglib.h needs size_t and FILE declared first.
#include <jpeglib.h>

#include "exifaudit/apk.hpp"
#include "exifaudit/audit.hpp"
#include "exifaudit/axml.hpp"
#include "exifaudit/corpus.hpp"
#include "exifaudit/exif.hpp"
#include "exifaudit/prompt.hpp"
#include "exifaudit/rag.hpp"
#include "support/temp_dir.hpp"

namespace exifaudit {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

// Collects the first few failure messages of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_.size() < 8) failures_.push_back(what);
    ++count_;
  }
  bool ok() const { return count_ == 0; }
  const std::vector<std::string>& failures() const { return failures_; }
  std::size_t count() const { return count_; }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

struct Criterion {
  int number;
  std::string name;
  double limit_s;  // 0: no time limit
  std::function<void(Check&)> body;
};

const std::string kRead = "android.permission.READ_EXTERNAL_STORAGE";
const std::string kWrite = "android.permission.WRITE_EXTERNAL_STORAGE";
const std::string kInternet = "android.permission.INTERNET";

// --- 1 --------------------------------------------------------------------

void gate_truth_table(Check& c) {
  const std::vector<std::string> perms = {kRead, kWrite, kInternet};
  const std::vector<std::vector<std::string>> mimes = {{"image/*"}, {"application/pdf"}, {}};
  int passes = 0, cases = 0;
  for (int mask = 0; mask < 8; ++mask) {
    for (std::size_t m = 0; m < mimes.size(); ++m) {
      axml::ManifestFixture f;
      for (int b = 0; b < 3; ++b)
        if (mask & (1 << b)) f.permissions.push_back(perms[static_cast<std::size_t>(b)]);
      f.mime_types = mimes[m];
      const GateDecision d = gate_filter(parse_binary_manifest(axml::encode_manifest(f)), GatePolicy::strict());
      const bool want = mask == 7 && m == 0;
      c.expect(d.passes == want, "mask " + std::to_string(mask) + " mime case " + std::to_string(m));
      passes += d.passes;
      ++cases;
    }
  }
  c.expect(cases == 24, "case count");
  c.expect(passes == 1, "exactly one passing case");
}

// --- 2 --------------------------------------------------------------------

void manifest_round_trip(Check& c) {
  const std::vector<std::string> perm_pool = {kRead,
                                              kWrite,
                                              kInternet,
                                              "android.permission.CAMERA",
                                              "android.permission.ACCESS_FINE_LOCATION",
                                              "android.permission.READ_MEDIA_IMAGES",
                                              "com.example.permission.C2D_MESSAGE"};
  const std::vector<std::string> mime_pool = {"image/*", "image/jpeg", "image/png", "application/pdf",
                                              "text/plain", "*/*",        "video/mp4"};
  std::mt19937_64 rng(20);
  for (int i = 0; i < 20; ++i) {
    axml::ManifestFixture f;
    f.package_name = "com.accept.m" + std::to_string(i);
    for (const auto& p : perm_pool)
      if (rng() % 2) f.permissions.push_back(p);
    for (const auto& m : mime_pool)
      if (rng() % 3 == 0) f.mime_types.push_back(m);
    f.activity_count = 1 + rng() % 3;
    f.utf8_pool = i % 2 == 0;
    const ManifestInfo info = parse_binary_manifest(axml::encode_manifest(f));
    const std::string id = "fixture " + std::to_string(i);
    c.expect(info.package_name == f.package_name, id + " package");
    c.expect(info.requested_permissions == std::set<std::string>(f.permissions.begin(), f.permissions.end()),
             id + " permissions");
    c.expect(info.intent_mime_types == std::set<std::string>(f.mime_types.begin(), f.mime_types.end()),
             id + " mime types");
  }
}

// --- 3 --------------------------------------------------------------------

std::vector<std::uint8_t> decode_gray(const Bytes& jpeg, int& width, int& height) {
  jpeg_decompress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, jpeg.data(), static_cast<unsigned long>(jpeg.size()));
  jpeg_read_header(&cinfo, TRUE);
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                               static_cast<std::size_t>(cinfo.output_components));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = px.data() + static_cast<std::size_t>(cinfo.output_scanline) * static_cast<std::size_t>(width);
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return px;
}

void exif_round_trip(Check& c) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> makes = {"Google", "samsung", "Apple", "HUAWEI", "Xiaomi"};
  std::size_t detect_ok = 0, strip_ok = 0;
  for (int i = 0; i < 200; ++i) {
    ExifContents all;
    all.make = makes[rng() % makes.size()];
    all.model = "Model " + std::to_string(rng() % 1000);
    all.datetime = "2023:0" + std::to_string(1 + rng() % 9) + ":1" + std::to_string(rng() % 10) + " 12:34:56";
    all.serial = "SN" + std::to_string(rng() % 1000000);
    std::uniform_real_distribution<double> lat(-89.9, 89.9), lon(-179.9, 179.9), alt(0, 3000);
    all.gps = GpsFix{lat(rng), lon(rng), alt(rng)};
    all.orientation = static_cast<std::uint16_t>(1 + rng() % 8);
    all.byte_order = rng() % 2 ? Endian::Big : Endian::Little;

    TypeSet planted;
    for (MetadataType t : kAllMetadataTypes)
      if (rng() % 2) planted.insert(t);
    JpegSpec spec{static_cast<std::uint16_t>(8 + rng() % 48), static_cast<std::uint16_t>(8 + rng() % 48), {}};
    for (int k = 0, n = 1 + static_cast<int>(rng() % 6); k < n; ++k)
      spec.dc_levels.push_back(static_cast<int>(rng() % 121) - 60);
    const Bytes jpeg = encode_jpeg(spec, restrict_to(all, planted));
    const std::string id = "image " + std::to_string(i);

    const bool detected = detect_sensitive_types(parse_exif(jpeg)).present == planted;
    c.expect(detected, id + " detect(parse) != planted");
    detect_ok += detected;

    const Bytes stripped = strip_metadata(jpeg);
    const bool clean = detect_sensitive_types(parse_exif(stripped)).present.empty() && parse_exif(stripped).empty();
    c.expect(clean, id + " strip left findings");
    strip_ok += clean;
    c.expect(strip_metadata(stripped) == stripped, id + " strip not idempotent");

    int w0 = 0, h0 = 0, w1 = 0, h1 = 0;
    const auto before = decode_gray(jpeg, w0, h0);
    const auto after = decode_gray(stripped, w1, h1);
    c.expect(w0 == w1 && h0 == h1 && before == after, id + " pixels changed");
  }
  c.expect(detect_ok == 200, "detect " + std::to_string(detect_ok) + "/200");
  c.expect(strip_ok == 200, "strip " + std::to_string(strip_ok) + "/200");
}

// --- 4 --------------------------------------------------------------------

const std::vector<CorpusInput> kLabelledBlocks = {
    {"row1", "def add(a, b):\n    return a + b", "Sum function"},
    {"row2", "def subtract(a, b):\n    return a - b", "Subtraction function"},
    {"row3", "def multiply(a, b):\n    return a * b", "Multiplication function"},
    {"row4", "def divide(a, b):\n    if b == 0: return \"Error\"\n    else: return a / b", "Division function"},
};
const std::string kQueryBlock =
    "def add(number_array):\n    total = 0\n    for num in number_array:\n        total += num\n    return total";

// Exact cosine over lowercased alphanumeric token counts.
double multiset_cosine(const std::string& a, const std::string& b) {
  auto bag = [](const std::string& text) {
    static const std::regex kTok("[A-Za-z0-9]+");
    std::map<std::string, long long> m;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), kTok); it != std::sregex_iterator(); ++it) {
      std::string t = it->str();
      std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      ++m[t];
    }
    return m;
  };
  const auto ma = bag(a), mb = bag(b);
  long long dot = 0, na = 0, nb = 0;
  for (const auto& [t, n] : ma) {
    na += n * n;
    if (auto it = mb.find(t); it != mb.end()) dot += n * it->second;
  }
  for (const auto& [t, n] : mb) nb += n * n;
  if (na == 0 || nb == 0) return 0;
  return static_cast<double>(dot) / std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
}

void labelled_retrieval(Check& c) {
  const VectorStore store = index_corpus(kLabelledBlocks);
  const Retrieval top1 = retrieve_similar(store, kQueryBlock, {.k = 1});
  c.expect(top1.results.size() == 1 && top1.results[0].record.label == "Sum function", "top-1 label");

  // Oracle ranking: score descending, insertion order on ties.
  std::vector<std::pair<double, std::size_t>> oracle;
  for (std::size_t i = 0; i < kLabelledBlocks.size(); ++i)
    oracle.emplace_back(multiset_cosine(kLabelledBlocks[i].text, kQueryBlock), i);
  std::stable_sort(oracle.begin(), oracle.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  // Hand values: add/def/return shared with row 1, def/return with rows 2-3,
  // def plus three returns with row 4.
  const double hand[] = {3 / std::sqrt(297.0), 2 / std::sqrt(297.0), 2 / std::sqrt(297.0), 4 / std::sqrt(621.0)};
  for (std::size_t i = 0; i < 4; ++i)
    c.expect(std::abs(multiset_cosine(kLabelledBlocks[i].text, kQueryBlock) - hand[i]) < 1e-15, "hand value row " + std::to_string(i + 1));

  const Retrieval all = retrieve_similar(store, kQueryBlock, {.k = 4});
  c.expect(all.results.size() == 4, "ranking size");
  for (std::size_t i = 0; i < std::min<std::size_t>(4, all.results.size()); ++i) {
    c.expect(all.results[i].index == oracle[i].second, "rank " + std::to_string(i) + " index");
    c.expect(std::abs(all.results[i].similarity - oracle[i].first) < 1e-12, "rank " + std::to_string(i) + " similarity");
  }
}

// --- 5 --------------------------------------------------------------------

void concatenation_law(Check& c) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> ch(32, 126), len(0, 300), items(0, 5);
  auto text = [&] {
    std::string s(static_cast<std::size_t>(len(rng)), ' ');
    for (char& x : s) x = static_cast<char>(ch(rng));
    if (rng() % 4 == 0 && !s.empty()) s[s.size() / 2] = '\n';
    return s;
  };
  PromptOptions options;
  options.max_prompt_chars = 1 << 20;
  for (int i = 0; i < 1000; ++i) {
    std::vector<ContextItem> context;
    for (int k = items(rng); k > 0; --k) context.push_back({"ctx" + std::to_string(k), text()});
    const std::string user = text();
    const PromptBundle b = build_prompt(kRagTemplate, context, user, options);
    const std::string id = "pair " + std::to_string(i);
    const std::string tail = separator() + user;
    c.expect(b.final_prompt.ends_with(tail), id + " separator + user prompt not at end");
    c.expect(b.user_prompt == user, id + " user prompt");
    c.expect(b.relevant_information == context, id + " context kept");
    const std::size_t head_end = b.final_prompt.size() - std::min(b.final_prompt.size(), tail.size());
    std::size_t at = 0;
    for (const ContextItem& item : context) {
      at = b.final_prompt.find(item.text, at);
      c.expect(at != std::string::npos && at + item.text.size() <= head_end, id + " context order");
      if (at == std::string::npos) break;
      at += item.text.size();
    }
  }
}

// --- 6 --------------------------------------------------------------------

// Serves one fixed query vector; shares the store's version string.
class FixedEmbedder final : public Embedder {
 public:
  FixedEmbedder(EmbeddingVector v, std::string version) : v_(std::move(v)), version_(std::move(version)) {}
  std::size_t dim() const override { return v_.dim; }
  std::string version() const override { return version_; }
  EmbeddingVector embed(std::string_view) const override { return v_; }

 private:
  EmbeddingVector v_;
  std::string version_;
};

EmbeddingVector raw(std::vector<double> values) {
  const std::size_t n = values.size();
  return EmbeddingVector{n, std::move(values), false};
}

void cosine_properties(Check& c) {
  constexpr std::size_t kDim = 24;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0, 1);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  std::vector<EmbeddingVector> vs;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(kDim);
    for (double& v : x) v = normal(rng);
    vs.push_back(raw(std::move(x)));
  }
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const EmbeddingVector& a = vs[i];
    const EmbeddingVector& b = vs[(i * 7 + 1) % vs.size()];
    const std::string id = "vector " + std::to_string(i);
    c.expect(std::abs(cosine(a, a) - 1.0) <= 1e-9, id + " self-similarity");
    c.expect(cosine(a, b) == cosine(b, a), id + " symmetry");
    EmbeddingVector sa = a;
    const double alpha = scale(rng);
    for (double& v : sa.values) v *= alpha;
    c.expect(std::abs(cosine(sa, b) - cosine(a, b)) <= 1e-12, id + " scale invariance");
    c.expect(cosine(a, b) >= -1.0 && cosine(a, b) <= 1.0, id + " range");
  }

  // Argmax under common scaling: 100 stores of 10 vectors each, plus a query.
  for (std::size_t trial = 0; trial < 100; ++trial) {
    std::vector<CorpusRecord> recs, scaled;
    const double alpha = scale(rng);
    for (std::size_t k = 0; k < 10; ++k) {
      const EmbeddingVector& v = vs[trial * 10 + k];
      recs.push_back({"r" + std::to_string(k), "", "l", v});
      EmbeddingVector s = v;
      for (double& x : s.values) x *= alpha;
      scaled.push_back({"r" + std::to_string(k), "", "l", s});
    }
    EmbeddingVector q = vs[(trial * 13 + 5) % vs.size()];
    EmbeddingVector qs = q;
    for (double& x : qs.values) x *= alpha;
    const VectorStore s1(kDim, "fixed", recs), s2(kDim, "fixed", scaled);
    const auto a = retrieve_similar(s1, FixedEmbedder(q, "fixed"), "", {.k = 10}).results;
    const auto b = retrieve_similar(s2, FixedEmbedder(qs, "fixed"), "", {.k = 10}).results;
    // Brute-force argmax as the reference.
    std::size_t best = 0;
    for (std::size_t k = 1; k < recs.size(); ++k)
      if (cosine(q, recs[k].vector) > cosine(q, recs[best].vector)) best = k;
    const std::string id = "store " + std::to_string(trial);
    c.expect(!a.empty() && !b.empty(), id + " empty");
    if (a.empty() || b.empty()) continue;
    c.expect(a[0].index == best, id + " argmax");
    c.expect(b[0].index == best, id + " argmax after scaling");
  }
}

// --- 7 and 9 ----------------------------------------------------------------

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = to_string(read_file(e.path().string()));
  return out;
}

SyntheticCorpusSpec end_to_end_spec() {
  SyntheticCorpusSpec spec;
  spec.app_count = 100;
  spec.leak_rate = 0.219;
  spec.seed = 7;
  return spec;
}

AuditConfig end_to_end_config() {
  AuditConfig config;  // oracle backend, built-in templates and knowledge corpus
  config.parallelism = 4;
  config.self_check = true;
  return config;
}

// Synthesizes the corpus, audits it and writes the reports under `root`.
AuditResult end_to_end(const fs::path& root) {
  const CorpusManifest m = synthesize_corpus(end_to_end_spec(), root / "corpus", 4);
  AuditResult r = run_audit(end_to_end_config(), root / "corpus");
  write_outputs(r, root / "out");
  return r;
}

void end_to_end_run(Check& c) {
  TempDir dir;
  const AuditResult r = end_to_end(dir.path());
  const CorpusManifest m = load_corpus_manifest(dir.path() / "corpus");
  c.expect(m.leaky_count() == 22, "planted leaky apps " + std::to_string(m.leaky_count()));
  c.expect(r.reports.size() == 100, "report count");
  c.expect(r.aggregate.gated_in == 100, "gated in");
  c.expect(r.aggregate.fraction.has_value() && *r.aggregate.fraction == 0.22, "fraction != 0.22");
  c.expect(r.evaluation.has_value() && r.evaluation->accuracy == 1.0, "accuracy != 1.0");
  c.expect(r.aggregate.apps_with_errors == 0, "apps with errors");
  for (std::size_t i = 0; i < r.reports.size() && i < m.apps.size(); ++i) {
    c.expect(r.reports[i].verdict.per_type == m.apps[i].expected_verdict, m.apps[i].app_id + " verdict");
    c.expect(r.reports[i].leaked_types == m.apps[i].retained, m.apps[i].app_id + " leaked types");
  }
}

void determinism(Check& c) {
  TempDir a, b;
  end_to_end(a.path());
  end_to_end(b.path());
  const auto ta = read_tree(a.path() / "out"), tb = read_tree(b.path() / "out");
  c.expect(ta.size() == 4, "expected four report files, got " + std::to_string(ta.size()));
  for (const auto& [name, bytes] : ta) {
    auto it = tb.find(name);
    c.expect(it != tb.end() && it->second == bytes, name + " differs");
  }
  c.expect(read_tree(a.path() / "corpus") == read_tree(b.path() / "corpus"), "corpus differs");
}

// --- 8 --------------------------------------------------------------------

void table_aggregation(Check& c) {
  const std::map<MetadataType, std::size_t> want = {{MetadataType::Gps, 680},
                                                    {MetadataType::DateTime, 1043},
                                                    {MetadataType::SmartphoneModel, 1055},
                                                    {MetadataType::SmartphoneBrand, 1055},
                                                    {MetadataType::DeviceSerialNumber, 998}};
  // 1,095 leaking apps at shuffled positions. DateTime and Model take
  // overlapping slices that cover every leaking app; Brand, Serial and GPS
  // take random subsets.
  std::mt19937_64 rng(8);
  std::vector<std::size_t> order(5000);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const std::vector<std::size_t> leaking(order.begin(), order.begin() + 1095);
  std::vector<LeakReport> reports(5000);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    reports[i].app_id = "app" + std::to_string(i);
    reports[i].gate.passes = true;
  }
  for (const auto& [type, n] : want) {
    std::vector<std::size_t> pool = leaking;
    if (type == MetadataType::DateTime)
      std::rotate(pool.begin(), pool.begin() + 52, pool.end());
    else if (type != MetadataType::SmartphoneModel)
      std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t k = 0; k < n; ++k) {
      LeakReport& r = reports[pool[k]];
      r.verdict.per_type[type] = Disposition::Retained;
      r.leaked_types.insert(type);
    }
  }
  const AggregateReport a = aggregate(reports);
  c.expect(a.total_apps == 5000 && a.gated_in == 5000, "totals");
  c.expect(a.apps_leaking_any == 1095, "leaking " + std::to_string(a.apps_leaking_any));
  c.expect(a.fraction.has_value() && *a.fraction == 0.219, "fraction != 0.219");
  for (const auto& [type, n] : want) {
    auto it = a.per_type_counts.find(type);
    c.expect(it != a.per_type_counts.end() && it->second == n, std::string(to_string(type)) + " count");
  }
  try {
    verify_aggregate(reports, a);
  } catch (const std::exception& e) {
    c.expect(false, e.what());
  }
}

// --- 10 -------------------------------------------------------------------

template <typename F>
std::optional<Errc> error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

void store_persistence(Check& c) {
  TempDir dir;
  std::mt19937_64 rng(10);
  const std::vector<std::string> words = {"getAttribute", "TAG_GPS_LATITUDE", "upload", "bitmap", "return",
                                          "saveAttributes", "null", "ExifInterface", "file", "stream", "int"};
  std::vector<CorpusInput> in;
  for (int i = 0; i < 1000; ++i) {
    std::string text;
    for (int k = 0, n = 3 + static_cast<int>(rng() % 30); k < n; ++k) text += words[rng() % words.size()] + " ";
    in.push_back({"rec" + std::to_string(i), text, i % 3 ? "retain" : "strip"});
  }
  const HashEmbedder embedder(512);
  const VectorStore store = index_corpus(in, embedder);
  const std::string path = dir.file("store.bin");
  save_store(store, path);
  const VectorStore back = load_store(path, embedder);
  c.expect(back == store, "round trip differs");
  bool bits = back.size() == store.size();
  for (std::size_t i = 0; bits && i < store.size(); ++i)
    for (std::size_t d = 0; d < store.dim(); ++d)
      bits = bits && std::bit_cast<std::uint64_t>(back.records()[i].vector.values[d]) ==
                         std::bit_cast<std::uint64_t>(store.records()[i].vector.values[d]);
  c.expect(bits, "vector bits differ");
  save_store(back, dir.file("again.bin"));
  c.expect(read_file(dir.file("again.bin")) == read_file(path), "re-saved file differs");

  Bytes bad = read_file(path);
  bad.back() ^= 0x80;  // checksum trailer
  dir.write("bad.bin", bad);
  c.expect(error_of([&] { load_store(dir.file("bad.bin"), embedder); }) == Errc::CorruptStore,
           "corrupted checksum accepted");
  Bytes body = read_file(path);
  body[body.size() / 3] ^= 0x01;
  dir.write("body.bin", body);
  c.expect(error_of([&] { load_store(dir.file("body.bin"), embedder); }) == Errc::CorruptStore,
           "corrupted payload accepted");
  c.expect(error_of([&] { load_store(path, HashEmbedder(1024)); }) == Errc::VersionMismatch, "mismatched dim accepted");
}

}  // namespace
}  // namespace exifaudit

int main() {
  using namespace exifaudit;
  const std::vector<Criterion> criteria = {
      {1, "gate truth table, 24 cases", 1, gate_truth_table},
      {2, "binary manifest round trip, 20 fixtures", 1, manifest_round_trip},
      {3, "EXIF detect/strip round trip, 200 JPEGs", 10, exif_round_trip},
      {4, "labelled-block retrieval ranking", 1, labelled_retrieval},
      {5, "prompt concatenation law, 1000 pairs", 1, concatenation_law},
      {6, "cosine properties, 1000 vectors", 1, cosine_properties},
      {7, "end-to-end oracle run, 100 apps", 60, end_to_end_run},
      {8, "aggregation of 5000 reports", 5, table_aggregation},
      {9, "determinism of two end-to-end runs", 0, determinism},
      {10, "vector store persistence, 1000 records", 5, store_persistence},
  };
  int failed = 0;
  for (const Criterion& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cr.limit_s > 0 && secs > cr.limit_s) {
      char msg[96];
      std::snprintf(msg, sizeof msg, "took %.3f s, limit %.0f s", secs, cr.limit_s);
      check.expect(false, msg);
    }
    std::printf("criterion %2d: %s  %s (%.3f s)\n", cr.number, check.ok() ? "PASS" : "FAIL", cr.name.c_str(), secs);
    for (const std::string& f : check.failures()) std::printf("    - %s\n", f.c_str());
    if (check.count() > check.failures().size())
      std::printf("    ... %zu more\n", check.count() - check.failures().size());
    failed += !check.ok();
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
