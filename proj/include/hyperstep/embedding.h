// Copyright 2026 The Hyperstep Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HYPERSTEP_EMBEDDING_H_
#define HYPERSTEP_EMBEDDING_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hyperstep/hypergraph.h"

namespace hyperstep {

// Dense real vector of fixed dimension.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values)
      : values_(std::move(values)) {}

  size_t dimension() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](size_t i) const { return values_[i]; }

  double norm() const;

  // Unit-length copy. Throws std::domain_error on a zero or non-finite norm.
  EmbeddingVector normalized() const;

  bool operator==(const EmbeddingVector& other) const = default;

 private:
  std::vector<double> values_;
};

// Lowercases, replaces ASCII punctuation by spaces, collapses whitespace.
// Shared by the synthetic provider (tokenization) and sidecar cache keys.
std::string normalize_text(std::string_view text);

// Text encoder. Implementations are deterministic and read-only after
// construction, so embed() is safe to call concurrently.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual size_t dimension() const = 0;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
};

// Bag-of-words hash embedding: each normalized token maps to a seeded
// pseudo-random vector; a text is the L2-normalized sum of its tokens. Texts
// that share tokens land near each other, which is all the synthetic corpora
// need from an encoder. Bit-identical across runs and platforms.
EmbeddingVector synthetic_embed(std::string_view text, uint64_t seed,
                                size_t dimension);

class SyntheticEmbeddingProvider : public EmbeddingProvider {
 public:
  SyntheticEmbeddingProvider(uint64_t seed, size_t dimension);

  size_t dimension() const override { return dimension_; }
  EmbeddingVector embed(std::string_view text) const override {
    return synthetic_embed(text, seed_, dimension_);
  }

 private:
  uint64_t seed_;
  size_t dimension_;
};

// Precomputed embeddings loaded from a sidecar file of lines
// {"text": ..., "vector": [...]}. Lookups are keyed by normalize_text; a miss
// throws DataError rather than falling back to another encoder.
class SidecarEmbeddingProvider : public EmbeddingProvider {
 public:
  static SidecarEmbeddingProvider load(std::istream& in);
  static SidecarEmbeddingProvider load_file(const std::string& path);

  size_t dimension() const override { return dimension_; }
  EmbeddingVector embed(std::string_view text) const override;
  size_t size() const { return table_.size(); }

 private:
  SidecarEmbeddingProvider() = default;

  size_t dimension_ = 0;
  std::unordered_map<std::string, EmbeddingVector> table_;
};

// Writes embeddings of `texts` in sidecar format.
void write_sidecar(const EmbeddingProvider& provider,
                   std::span<const std::string> texts, std::ostream& out);

// dot(a, b) / (|a| |b|). Throws std::invalid_argument on dimension mismatch
// and std::domain_error on a zero-norm input.
double cosine_sim(const EmbeddingVector& a, const EmbeddingVector& b);

// Arithmetic mean of the inputs, renormalized to unit length. Throws
// std::invalid_argument on an empty set.
EmbeddingVector mean_embedding(std::span<const EmbeddingVector> vectors);

// The text embedded for an entity: its name followed by its aliases.
std::string entity_embedding_text(const Entity& entity);

// Mean embedding of a set of graph entities, renormalized.
EmbeddingVector aggregate_entity_embedding(const KnowledgeHypergraph& graph,
                                           std::span<const EntityId> ids,
                                           const EmbeddingProvider& provider);

}  // namespace hyperstep

#endif  // HYPERSTEP_EMBEDDING_H_
