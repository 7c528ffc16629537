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

#ifndef HYPERSTEP_RETRIEVAL_H_
#define HYPERSTEP_RETRIEVAL_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hyperstep/embedding.h"
#include "hyperstep/entity_matcher.h"
#include "hyperstep/hypergraph.h"

namespace hyperstep {

enum class RetrievalMode { kBaseline, kInformativeness };

const char* retrieval_mode_name(RetrievalMode mode);
// Accepts "baseline" or "informativeness". Throws ConfigError otherwise.
RetrievalMode parse_retrieval_mode(std::string_view name);

struct RetrievalQuery {
  std::string text;
  int turn_index = 0;
  // Overrides entity extraction from `text` when set.
  std::optional<std::vector<EntityId>> explicit_entities;
  int k = 1;
};

// One row of a hyperedge's score decomposition.
struct EntityContribution {
  EntityId entity_id = 0;
  double semantic = 0.0;        // s_v
  double share = 0.0;           // within-edge normalized weight
  double informativeness = 0.0; // I(v)
  double relevance = 0.0;       // share * informativeness
};

struct ScoredHyperedge {
  EdgeId edge_id = 0;
  double score = 0.0;
  std::vector<EntityContribution> breakdown;
};

struct RetrievedFact {
  EdgeId edge_id = 0;
  std::string text;
  std::vector<EntityId> entity_ids;
  std::vector<std::string> entity_names;
  double score = 0.0;
  std::vector<EntityContribution> breakdown;  // informativeness mode only
};

struct RetrievedFactSet {
  std::vector<RetrievedFact> facts;
  std::string query_echo;
  RetrievalMode mode = RetrievalMode::kBaseline;
  // Set when fewer than k facts exist in the graph.
  bool truncated = false;
  // Set when informativeness was requested but the query named no entity.
  bool fell_back = false;
};

// Per-entity semantic score s_v = cos(phi(v), mean of query-entity
// embeddings), for every entity in the graph. Throws std::invalid_argument
// on an empty query set.
std::vector<double> entity_semantic_scores(
    std::span<const EmbeddingVector> entity_embeddings,
    const KnowledgeHypergraph& graph, std::span<const EntityId> query_entities);

// I(v) = ln(1 + |{e in E_q : v in e}| / deg(v)) for every entity, where E_q is
// the set of hyperedges containing any query entity.
std::vector<double> entity_informativeness(
    const KnowledgeHypergraph& graph, std::span<const EntityId> query_entities);

// Clipped-positive share of each member of `edge`:
// max(s_v, 0) / sum_u max(s_u, 0), uniform when the sum is zero.
std::vector<double> within_edge_normalization(const Hyperedge& edge,
                                              std::span<const double> semantic);

// Ranks hyperedges against queries. Edge and entity embeddings are computed
// once at construction; afterwards the retriever is immutable and
// thread-safe.
class Retriever {
 public:
  Retriever(const KnowledgeHypergraph& graph,
            const EmbeddingProvider& provider);

  const KnowledgeHypergraph& graph() const { return graph_; }
  const EntityMatcher& matcher() const { return matcher_; }
  const EmbeddingProvider& provider() const { return provider_; }
  std::span<const EmbeddingVector> entity_embeddings() const {
    return entity_embeddings_;
  }
  std::span<const EmbeddingVector> edge_embeddings() const {
    return edge_embeddings_;
  }

  // Query entity set: explicit override, else mentions in the query text.
  std::vector<EntityId> query_entities(const RetrievalQuery& query) const;

  // Top-k hyperedges by cos(phi(query text), phi(edge text)).
  RetrievedFactSet baseline_retrieve(const RetrievalQuery& query) const;

  std::vector<double> entity_semantic_score(
      std::span<const EntityId> query_entities) const {
    return entity_semantic_scores(entity_embeddings_, graph_, query_entities);
  }

  // Scores every hyperedge. Returns nullopt when the query names no entity,
  // in which case the caller must use baseline_retrieve.
  std::optional<std::vector<ScoredHyperedge>> score_hyperedges(
      const RetrievalQuery& query) const;

  // Informativeness ranking with fallback to the baseline when the query
  // entity set is empty.
  RetrievedFactSet retrieve_topk(const RetrievalQuery& query) const;

  RetrievedFactSet retrieve(const RetrievalQuery& query,
                            RetrievalMode mode) const;

 private:
  RetrievedFactSet assemble(const RetrievalQuery& query,
                            std::vector<ScoredHyperedge> scored,
                            RetrievalMode mode, bool explain) const;

  const KnowledgeHypergraph& graph_;
  const EmbeddingProvider& provider_;
  EntityMatcher matcher_;
  std::vector<EmbeddingVector> entity_embeddings_;
  std::vector<EmbeddingVector> edge_embeddings_;
};

// Sort order for retrieval results: score descending, then edge id
// ascending.
void rank_scored(std::vector<ScoredHyperedge>* scored);

}  // namespace hyperstep

#endif  // HYPERSTEP_RETRIEVAL_H_
