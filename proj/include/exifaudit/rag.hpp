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
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace exifaudit {

inline constexpr std::size_t kDefaultEmbeddingDim = 4096;

struct EmbeddingVector {
  std::size_t dim = 0;
  std::vector<double> values;
  // True iff the L2 norm is 1 (within 1e-9). The zero vector is never flagged.
  bool norm_flag = false;

  bool operator==(const EmbeddingVector&) const = default;
};

// Lowercased alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view text);

// Bag-of-words: each token is hashed with FNV-1a 64 into bucket
// hash % dim, counts are accumulated and the result is L2-normalized.
// Throws std::invalid_argument when dim == 0.
EmbeddingVector embed_text(std::string_view text, std::size_t dim = kDefaultEmbeddingDim);

// Cosine similarity, defined as 0 when either side is the zero vector.
// Throws std::invalid_argument on a dimension mismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

EmbeddingVector make_vector(std::vector<double> values);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dim() const = 0;
  // Stored in the vector-store header; a store only loads under an embedder
  // with the same version.
  virtual std::string version() const = 0;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
};

class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dim = kDefaultEmbeddingDim);
  std::size_t dim() const override { return dim_; }
  std::string version() const override;
  EmbeddingVector embed(std::string_view text) const override { return embed_text(text, dim_); }

 private:
  std::size_t dim_;
};

// Embeddings from an OpenAI-compatible endpoint: POST {"model", "input"},
// reply {"data": [{"embedding": [...]}]}. Vectors of the wrong length throw
// Error{BackendRejected}; transport failures throw Error{BackendTimeout}.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(std::string endpoint, std::string model, std::size_t dim,
               std::chrono::milliseconds timeout = std::chrono::seconds(30));
  std::size_t dim() const override { return dim_; }
  std::string version() const override { return "http:" + model_ + ":" + std::to_string(dim_); }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  std::string endpoint_;
  std::string model_;
  std::size_t dim_;
  std::chrono::milliseconds timeout_;
};

std::unique_ptr<Embedder> make_hash_embedder(std::size_t dim = kDefaultEmbeddingDim);

struct CorpusInput {
  std::string id;
  std::string text;
  std::string label;
};

struct CorpusRecord {
  std::string id;
  std::string text;
  std::string label;
  EmbeddingVector vector;

  bool operator==(const CorpusRecord&) const = default;
};

// Immutable once built; concurrent retrieval over one store is safe.
class VectorStore {
 public:
  VectorStore() = default;
  // Throws Error{DuplicateId}, or std::invalid_argument when a vector's
  // dimension differs from `dim`.
  VectorStore(std::size_t dim, std::string embedding_version, std::vector<CorpusRecord> records);

  std::size_t dim() const { return dim_; }
  const std::string& embedding_version() const { return embedding_version_; }
  const std::vector<CorpusRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  bool operator==(const VectorStore&) const = default;

 private:
  std::size_t dim_ = 0;
  std::string embedding_version_;
  std::vector<CorpusRecord> records_;
};

VectorStore index_corpus(const std::vector<CorpusInput>& records, const Embedder& embedder);
VectorStore index_corpus(const std::vector<CorpusInput>& records, std::size_t dim = kDefaultEmbeddingDim);

struct RetrievalResult {
  CorpusRecord record;
  std::size_t index = 0;  // insertion position in the store
  double similarity = 0.0;
};

struct RetrieveOptions {
  std::size_t k = 3;
  // Results scoring below this are dropped. The default keeps every top-k
  // record under the non-negative hash embedding.
  double min_similarity = 0.0;
};

struct Retrieval {
  std::vector<RetrievalResult> results;
  bool empty_store = false;
};

// Top-k by cosine similarity, ties kept in insertion order. Throws
// Error{VersionMismatch} if the embedder is not the one the store was built
// with, std::invalid_argument if k == 0.
Retrieval retrieve_similar(const VectorStore& store, const Embedder& embedder, std::string_view query_text,
                           const RetrieveOptions& options = {});
// Same, using the hash embedder at the store's dimension.
Retrieval retrieve_similar(const VectorStore& store, std::string_view query_text, const RetrieveOptions& options = {});

// Binary layout documented in docs/formats.md. Written atomically.
void save_store(const VectorStore& store, const std::string& path);
// Throws Error{CorruptStore} on checksum or structural failure and
// Error{VersionMismatch} when the file's format or embedding version differs
// from what the caller expects.
VectorStore load_store(const std::string& path, std::string_view expected_embedding_version);
VectorStore load_store(const std::string& path, const Embedder& embedder);

}  // namespace exifaudit
