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

#include "hyperstep/embedding.h"

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "hyperstep/errors.h"
#include "hyperstep/rng.h"
#include "json.hpp"

namespace hyperstep {

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

EmbeddingVector EmbeddingVector::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::domain_error("cannot normalize a zero or non-finite vector");
  }
  std::vector<double> out(values_.size());
  for (size_t i = 0; i < values_.size(); ++i) out[i] = values_[i] / n;
  return EmbeddingVector(std::move(out));
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c) || (c < 0x80 && std::ispunct(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

namespace {

void add_token_vector(std::string_view token, uint64_t seed,
                      std::vector<double>* acc) {
  const uint64_t base = mix64(fnv1a64(token) ^ mix64(seed));
  for (size_t j = 0; j < acc->size(); ++j) {
    const uint64_t bits = mix64(base + j * 0x9e3779b97f4a7c15ULL);
    // Uniform in [-1, 1) from the top 53 bits; exact in binary64.
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-52 - 1.0;
    (*acc)[j] += u;
  }
}

}  // namespace

EmbeddingVector synthetic_embed(std::string_view text, uint64_t seed,
                                size_t dimension) {
  std::vector<double> acc(dimension, 0.0);
  const std::string norm = normalize_text(text);
  size_t start = 0;
  bool any = false;
  while (start < norm.size()) {
    size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    add_token_vector(std::string_view(norm).substr(start, end - start), seed,
                     &acc);
    any = true;
    start = end + 1;
  }
  if (!any) add_token_vector("", seed, &acc);
  EmbeddingVector v(std::move(acc));
  if (!(v.norm() > 0.0)) {
    // Cancellation to exactly zero; fall back to the first basis vector.
    std::vector<double> e(dimension, 0.0);
    e[0] = 1.0;
    return EmbeddingVector(std::move(e));
  }
  return v.normalized();
}

SyntheticEmbeddingProvider::SyntheticEmbeddingProvider(uint64_t seed,
                                                       size_t dimension)
    : seed_(seed), dimension_(dimension) {
  if (dimension < 2) {
    throw std::invalid_argument("synthetic embedding dimension must be >= 2");
  }
}

SidecarEmbeddingProvider SidecarEmbeddingProvider::load(std::istream& in) {
  SidecarEmbeddingProvider provider;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_text(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    const std::string where = "sidecar line " + std::to_string(line_no);
    if (j.is_discarded() || !j.is_object()) {
      throw DataError(where + ": malformed JSON");
    }
    auto text = j.find("text");
    auto vec = j.find("vector");
    if (text == j.end() || !text->is_string() || vec == j.end() ||
        !vec->is_array()) {
      throw DataError(where + ": expected {\"text\", \"vector\"}");
    }
    std::vector<double> values;
    for (const auto& x : *vec) {
      if (!x.is_number()) throw DataError(where + ": non-numeric component");
      values.push_back(x.get<double>());
      if (!std::isfinite(values.back())) {
        throw DataError(where + ": non-finite component");
      }
    }
    if (values.empty()) throw DataError(where + ": empty vector");
    if (provider.dimension_ == 0) provider.dimension_ = values.size();
    if (values.size() != provider.dimension_) {
      throw DataError(where + ": dimension " + std::to_string(values.size()) +
                      " differs from " + std::to_string(provider.dimension_));
    }
    provider.table_[normalize_text(text->get<std::string>())] =
        EmbeddingVector(std::move(values));
  }
  if (provider.table_.empty()) throw DataError("sidecar file is empty");
  return provider;
}

SidecarEmbeddingProvider SidecarEmbeddingProvider::load_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sidecar " + path);
  return load(in);
}

EmbeddingVector SidecarEmbeddingProvider::embed(std::string_view text) const {
  auto it = table_.find(normalize_text(text));
  if (it == table_.end()) {
    throw DataError("no sidecar embedding for text \"" + std::string(text) +
                    "\"");
  }
  return it->second;
}

void write_sidecar(const EmbeddingProvider& provider,
                   std::span<const std::string> texts, std::ostream& out) {
  for (const std::string& text : texts) {
    nlohmann::ordered_json j;
    j["text"] = text;
    const EmbeddingVector e = provider.embed(text);
    j["vector"] = std::vector<double>(e.values().begin(), e.values().end());
    out << j.dump() << '\n';
  }
}

double cosine_sim(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw std::invalid_argument("cosine_sim: dimension mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.dimension(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw std::domain_error("cosine_sim: zero-norm input");
  }
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return c;
}

EmbeddingVector mean_embedding(std::span<const EmbeddingVector> vectors) {
  if (vectors.empty()) {
    throw std::invalid_argument("mean of an empty embedding set");
  }
  const size_t d = vectors.front().dimension();
  std::vector<double> sum(d, 0.0);
  for (const EmbeddingVector& v : vectors) {
    if (v.dimension() != d) {
      throw std::invalid_argument("mean_embedding: dimension mismatch");
    }
    for (size_t i = 0; i < d; ++i) sum[i] += v[i];
  }
  for (double& x : sum) x /= static_cast<double>(vectors.size());
  return EmbeddingVector(std::move(sum)).normalized();
}

std::string entity_embedding_text(const Entity& entity) {
  std::string text = entity.name;
  for (const std::string& alias : entity.aliases) {
    text.push_back(' ');
    text += alias;
  }
  return text;
}

EmbeddingVector aggregate_entity_embedding(const KnowledgeHypergraph& graph,
                                           std::span<const EntityId> ids,
                                           const EmbeddingProvider& provider) {
  if (ids.empty()) {
    throw std::invalid_argument(
        "aggregate_entity_embedding: empty entity set");
  }
  std::vector<EmbeddingVector> vectors;
  vectors.reserve(ids.size());
  for (EntityId id : ids) {
    vectors.push_back(provider.embed(entity_embedding_text(graph.entity(id))));
  }
  return mean_embedding(vectors);
}

}  // namespace hyperstep
