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

#include "exifaudit/rag.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "exifaudit/bytes.hpp"
#include "exifaudit/hash.hpp"
#include "exifaudit/http.hpp"

namespace exifaudit {
namespace {

constexpr char kStoreMagic[8] = {'E', 'X', 'A', 'V', 'S', 'T', 'O', 'R'};
constexpr std::uint32_t kStoreFormat = 1;

bool is_unit(const std::vector<double>& v) {
  double sq = 0;
  for (double x : v) sq += x * x;
  return sq > 0 && std::abs(std::sqrt(sq) - 1.0) <= 1e-9;
}

void put_string(ByteWriter& w, std::string_view s) {
  w.u32(static_cast<std::uint32_t>(s.size()));
  w.str(s);
}

std::string get_string(ByteReader& r) {
  const std::uint32_t n = r.u32();
  return to_string(r.bytes(n));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

EmbeddingVector embed_text(std::string_view text, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("embedding dim must be positive");
  std::vector<double> counts(dim, 0.0);
  for (const std::string& t : tokenize(text)) counts[fnv1a64(t) % dim] += 1.0;
  return make_vector(std::move(counts));
}

EmbeddingVector make_vector(std::vector<double> values) {
  EmbeddingVector v;
  v.dim = values.size();
  double sq = 0;
  for (double x : values) sq += x * x;
  if (sq > 0) {
    const double norm = std::sqrt(sq);
    for (double& x : values) x /= norm;
  }
  v.values = std::move(values);
  v.norm_flag = is_unit(v.values);
  return v;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("cosine of vectors with different dimensions");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("embedding dim must be positive");
}

std::string HashEmbedder::version() const { return "fnv1a64-bow-v1:" + std::to_string(dim_); }

std::unique_ptr<Embedder> make_hash_embedder(std::size_t dim) { return std::make_unique<HashEmbedder>(dim); }

HttpEmbedder::HttpEmbedder(std::string endpoint, std::string model, std::size_t dim, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), dim_(dim), timeout_(timeout) {
  if (dim == 0) throw std::invalid_argument("embedding dim must be positive");
}

EmbeddingVector HttpEmbedder::embed(std::string_view text) const {
  HttpRequest req;
  req.url = endpoint_;
  req.body = nlohmann::json{{"model", model_}, {"input", std::string(text)}}.dump();
  req.timeout = timeout_;
  const HttpResponse resp = http_post_json(req);
  if (resp.status < 200 || resp.status >= 300) {
    throw Error(Errc::BackendRejected, "embedding endpoint returned " + std::to_string(resp.status) + ": " + resp.body);
  }
  std::vector<double> values;
  try {
    values = nlohmann::json::parse(resp.body).at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BackendRejected, std::string("unexpected embedding reply: ") + e.what());
  }
  if (values.size() != dim_) {
    throw Error(Errc::BackendRejected,
                "embedding of length " + std::to_string(values.size()) + ", expected " + std::to_string(dim_));
  }
  return make_vector(std::move(values));
}

VectorStore::VectorStore(std::size_t dim, std::string embedding_version, std::vector<CorpusRecord> records)
    : dim_(dim), embedding_version_(std::move(embedding_version)), records_(std::move(records)) {
  std::set<std::string_view> ids;
  for (const CorpusRecord& r : records_) {
    if (!ids.insert(r.id).second) throw Error(Errc::DuplicateId, "duplicate record id '" + r.id + "'");
    if (r.vector.dim != dim_ || r.vector.values.size() != dim_) {
      throw std::invalid_argument("record '" + r.id + "' has dimension " + std::to_string(r.vector.values.size()) +
                                  ", store expects " + std::to_string(dim_));
    }
  }
}

VectorStore index_corpus(const std::vector<CorpusInput>& records, const Embedder& embedder) {
  std::set<std::string_view> ids;
  for (const CorpusInput& in : records) {
    if (!ids.insert(in.id).second) throw Error(Errc::DuplicateId, "duplicate record id '" + in.id + "'");
  }
  std::vector<CorpusRecord> out;
  out.reserve(records.size());
  for (const CorpusInput& in : records) out.push_back({in.id, in.text, in.label, embedder.embed(in.text)});
  return VectorStore(embedder.dim(), embedder.version(), std::move(out));
}

VectorStore index_corpus(const std::vector<CorpusInput>& records, std::size_t dim) {
  return index_corpus(records, HashEmbedder(dim));
}

Retrieval retrieve_similar(const VectorStore& store, const Embedder& embedder, std::string_view query_text,
                           const RetrieveOptions& options) {
  if (options.k == 0) throw std::invalid_argument("k must be at least 1");
  Retrieval out;
  if (store.empty()) {
    out.empty_store = true;
    return out;
  }
  if (embedder.version() != store.embedding_version()) {
    throw Error(Errc::VersionMismatch, "store built with '" + store.embedding_version() + "', query embedder is '" +
                                           embedder.version() + "'");
  }
  const EmbeddingVector q = embedder.embed(query_text);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) scored.emplace_back(cosine(q, store.records()[i].vector), i);
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  scored.resize(std::min(options.k, scored.size()));
  for (const auto& [similarity, i] : scored) {
    if (similarity < options.min_similarity) continue;
    out.results.push_back({store.records()[i], i, similarity});
  }
  return out;
}

Retrieval retrieve_similar(const VectorStore& store, std::string_view query_text, const RetrieveOptions& options) {
  return retrieve_similar(store, HashEmbedder(store.dim() == 0 ? kDefaultEmbeddingDim : store.dim()), query_text,
                          options);
}

void save_store(const VectorStore& store, const std::string& path) {
  ByteWriter w;
  w.bytes(ByteView(reinterpret_cast<const std::uint8_t*>(kStoreMagic), sizeof kStoreMagic));
  w.u32(kStoreFormat);
  w.u32(static_cast<std::uint32_t>(store.dim()));
  put_string(w, store.embedding_version());
  w.u64(store.size());
  for (const CorpusRecord& r : store.records()) {
    put_string(w, r.id);
    put_string(w, r.text);
    put_string(w, r.label);
    w.u8(r.vector.norm_flag ? 1 : 0);
    std::uint32_t nnz = 0;
    for (double x : r.vector.values) nnz += std::bit_cast<std::uint64_t>(x) != 0;
    w.u32(nnz);
    for (std::size_t i = 0; i < r.vector.values.size(); ++i) {
      const auto bits = std::bit_cast<std::uint64_t>(r.vector.values[i]);
      if (bits == 0) continue;
      w.u32(static_cast<std::uint32_t>(i));
      w.u64(bits);
    }
  }
  w.u32(crc32(w.data()));
  write_file_atomic(path, w.data());
}

VectorStore load_store(const std::string& path, std::string_view expected_embedding_version) {
  const Bytes bytes = read_file(path);
  if (bytes.size() < sizeof kStoreMagic + 4) throw Error(Errc::CorruptStore, path + ": file too short");
  const ByteView body(bytes.data(), bytes.size() - 4);
  ByteReader tail(bytes, Errc::CorruptStore);
  if (tail.u32_at(body.size()) != crc32(body)) throw Error(Errc::CorruptStore, path + ": checksum mismatch");
  if (std::memcmp(bytes.data(), kStoreMagic, sizeof kStoreMagic) != 0) {
    throw Error(Errc::CorruptStore, path + ": not a vector store");
  }

  ByteReader r(body, Errc::CorruptStore);
  r.skip(sizeof kStoreMagic);
  const std::uint32_t format = r.u32();
  if (format != kStoreFormat) {
    throw Error(Errc::VersionMismatch, path + ": store format " + std::to_string(format) + ", expected " +
                                           std::to_string(kStoreFormat));
  }
  const std::uint32_t dim = r.u32();
  std::string version = get_string(r);
  if (version != expected_embedding_version) {
    throw Error(Errc::VersionMismatch,
                path + ": embedding version '" + version + "', expected '" + std::string(expected_embedding_version) + "'");
  }
  const std::uint64_t count = r.u64();
  std::vector<CorpusRecord> records;
  for (std::uint64_t n = 0; n < count; ++n) {
    CorpusRecord rec;
    rec.id = get_string(r);
    rec.text = get_string(r);
    rec.label = get_string(r);
    rec.vector.norm_flag = r.u8() != 0;
    rec.vector.dim = dim;
    rec.vector.values.assign(dim, 0.0);
    const std::uint32_t nnz = r.u32();
    for (std::uint32_t i = 0; i < nnz; ++i) {
      const std::uint32_t idx = r.u32();
      const std::uint64_t bits = r.u64();
      if (idx >= dim) throw Error(Errc::CorruptStore, path + ": vector index out of range");
      rec.vector.values[idx] = std::bit_cast<double>(bits);
    }
    records.push_back(std::move(rec));
  }
  if (r.remaining() != 0) throw Error(Errc::CorruptStore, path + ": trailing bytes after records");
  try {
    return VectorStore(dim, std::move(version), std::move(records));
  } catch (const std::invalid_argument& e) {
    throw Error(Errc::CorruptStore, path + ": " + e.what());
  }
}

VectorStore load_store(const std::string& path, const Embedder& embedder) {
  return load_store(path, embedder.version());
}

}  // namespace exifaudit
