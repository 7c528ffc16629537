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

#include "hyperstep/retrieval.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hyperstep/errors.h"

namespace hyperstep {

const char* retrieval_mode_name(RetrievalMode mode) {
  return mode == RetrievalMode::kBaseline ? "baseline" : "informativeness";
}

RetrievalMode parse_retrieval_mode(std::string_view name) {
  if (name == "baseline") return RetrievalMode::kBaseline;
  if (name == "informativeness") return RetrievalMode::kInformativeness;
  throw ConfigError("unknown retrieval mode '" + std::string(name) +
                    "' (expected baseline or informativeness)");
}

std::vector<double> entity_semantic_scores(
    std::span<const EmbeddingVector> entity_embeddings,
    const KnowledgeHypergraph& graph,
    std::span<const EntityId> query_entities) {
  if (query_entities.empty()) {
    throw std::invalid_argument(
        "entity_semantic_score: empty query entity set");
  }
  std::vector<EmbeddingVector> members;
  members.reserve(query_entities.size());
  for (EntityId id : query_entities) {
    graph.entity(id);  // validates the id
    members.push_back(entity_embeddings[id]);
  }
  const EmbeddingVector center = mean_embedding(members);
  std::vector<double> scores(graph.num_entities());
  for (EntityId v = 0; v < graph.num_entities(); ++v) {
    scores[v] = cosine_sim(entity_embeddings[v], center);
  }
  return scores;
}

std::vector<double> entity_informativeness(
    const KnowledgeHypergraph& graph,
    std::span<const EntityId> query_entities) {
  const std::vector<EdgeId> relevant = edges_containing(graph, query_entities);
  std::vector<size_t> hits(graph.num_entities(), 0);
  for (EdgeId e : relevant) {
    for (EntityId v : graph.edge(e).entity_ids) ++hits[v];
  }
  std::vector<double> info(graph.num_entities(), 0.0);
  for (EntityId v = 0; v < graph.num_entities(); ++v) {
    if (hits[v] == 0) continue;
    info[v] = std::log(1.0 + static_cast<double>(hits[v]) /
                                 static_cast<double>(graph.degree(v)));
  }
  return info;
}

namespace {

// Member positions by ascending entity id. Sums taken in this order depend
// only on the member set, so equal sets tie exactly.
std::vector<size_t> id_order(const Hyperedge& edge) {
  std::vector<size_t> order(edge.entity_ids.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return edge.entity_ids[a] < edge.entity_ids[b];
  });
  return order;
}

}  // namespace

std::vector<double> within_edge_normalization(
    const Hyperedge& edge, std::span<const double> semantic) {
  const size_t n = edge.entity_ids.size();
  std::vector<double> share(n);
  double total = 0.0;
  for (size_t i : id_order(edge)) {
    share[i] = std::max(semantic[edge.entity_ids[i]], 0.0);
    total += share[i];
  }
  if (total > 0.0) {
    for (double& s : share) s /= total;
  } else {
    std::fill(share.begin(), share.end(), 1.0 / static_cast<double>(n));
  }
  return share;
}

void rank_scored(std::vector<ScoredHyperedge>* scored) {
  std::sort(scored->begin(), scored->end(),
            [](const ScoredHyperedge& a, const ScoredHyperedge& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.edge_id < b.edge_id;
            });
}

Retriever::Retriever(const KnowledgeHypergraph& graph,
                     const EmbeddingProvider& provider)
    : graph_(graph), provider_(provider), matcher_(graph) {
  entity_embeddings_.reserve(graph.num_entities());
  for (const Entity& entity : graph.entities()) {
    entity_embeddings_.push_back(
        provider.embed(entity_embedding_text(entity)));
  }
  edge_embeddings_.reserve(graph.num_edges());
  for (const Hyperedge& edge : graph.edges()) {
    edge_embeddings_.push_back(provider.embed(edge.text));
  }
}

std::vector<EntityId> Retriever::query_entities(
    const RetrievalQuery& query) const {
  if (query.explicit_entities) {
    std::vector<EntityId> ids;
    for (EntityId id : *query.explicit_entities) {
      graph_.entity(id);
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
        ids.push_back(id);
      }
    }
    return ids;
  }
  return matcher_.extract(query.text);
}

RetrievedFactSet Retriever::assemble(const RetrievalQuery& query,
                                     std::vector<ScoredHyperedge> scored,
                                     RetrievalMode mode, bool explain) const {
  if (query.k < 1) throw std::invalid_argument("retrieval k must be >= 1");
  rank_scored(&scored);
  RetrievedFactSet result;
  result.query_echo = query.text;
  result.mode = mode;
  const size_t k = static_cast<size_t>(query.k);
  result.truncated = k > scored.size();
  const size_t take = std::min(k, scored.size());
  result.facts.reserve(take);
  for (size_t i = 0; i < take; ++i) {
    const Hyperedge& edge = graph_.edge(scored[i].edge_id);
    RetrievedFact fact;
    fact.edge_id = edge.id;
    fact.text = edge.text;
    fact.entity_ids = edge.entity_ids;
    for (EntityId v : edge.entity_ids) {
      fact.entity_names.push_back(graph_.entity(v).name);
    }
    fact.score = scored[i].score;
    if (explain) fact.breakdown = std::move(scored[i].breakdown);
    result.facts.push_back(std::move(fact));
  }
  return result;
}

RetrievedFactSet Retriever::baseline_retrieve(
    const RetrievalQuery& query) const {
  const EmbeddingVector q = provider_.embed(query.text);
  std::vector<ScoredHyperedge> scored(graph_.num_edges());
  for (EdgeId e = 0; e < graph_.num_edges(); ++e) {
    scored[e].edge_id = e;
    scored[e].score = cosine_sim(q, edge_embeddings_[e]);
  }
  return assemble(query, std::move(scored), RetrievalMode::kBaseline, false);
}

std::optional<std::vector<ScoredHyperedge>> Retriever::score_hyperedges(
    const RetrievalQuery& query) const {
  const std::vector<EntityId> q_entities = query_entities(query);
  if (q_entities.empty()) return std::nullopt;
  const std::vector<double> semantic = entity_semantic_score(q_entities);
  const std::vector<double> info = entity_informativeness(graph_, q_entities);

  std::vector<ScoredHyperedge> scored(graph_.num_edges());
  for (EdgeId e = 0; e < graph_.num_edges(); ++e) {
    const Hyperedge& edge = graph_.edge(e);
    const std::vector<double> share = within_edge_normalization(edge, semantic);
    ScoredHyperedge& out = scored[e];
    out.edge_id = e;
    out.breakdown.reserve(edge.entity_ids.size());
    for (size_t i = 0; i < edge.entity_ids.size(); ++i) {
      const EntityId v = edge.entity_ids[i];
      out.breakdown.push_back(
          {v, semantic[v], share[i], info[v], share[i] * info[v]});
    }
    for (size_t i : id_order(edge)) out.score += out.breakdown[i].relevance;
  }
  return scored;
}

RetrievedFactSet Retriever::retrieve_topk(const RetrievalQuery& query) const {
  auto scored = score_hyperedges(query);
  if (!scored) {
    RetrievedFactSet fallback = baseline_retrieve(query);
    fallback.fell_back = true;
    return fallback;
  }
  return assemble(query, std::move(*scored), RetrievalMode::kInformativeness,
                  true);
}

RetrievedFactSet Retriever::retrieve(const RetrievalQuery& query,
                                     RetrievalMode mode) const {
  return mode == RetrievalMode::kBaseline ? baseline_retrieve(query)
                                          : retrieve_topk(query);
}

}  // namespace hyperstep
