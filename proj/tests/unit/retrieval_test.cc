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


#include <cmath>

#include "doctest.h"
#include "fixtures.h"
#include "hyperstep/errors.h"
#include "hyperstep/retrieval.h"
#include "oracles/retrieval_oracle.h"

namespace hyperstep {
namespace {

using testing::fact;

RetrievalQuery entity_query(std::vector<EntityId> ids, int k) {
  RetrievalQuery q;
  q.explicit_entities = std::move(ids);
  q.k = k;
  return q;
}

TEST_CASE("baseline ranks by text similarity") {
  std::vector<FactRecord> r = {
      fact("Ada Lark mentored Bo Crane", {"Ada Lark", "Bo Crane"}),
      fact("Bo Crane founded Marsh Works", {"Bo Crane", "Marsh Works"}),
      fact("Marsh Works is based in Dunmore", {"Marsh Works", "Dunmore"}),
      fact("Dunmore hosts the spring fair", {"Dunmore"}),
      fact("Ada Lark wrote a travel book", {"Ada Lark"})};
  KnowledgeHypergraph g = ingest_facts(r);
  SyntheticEmbeddingProvider p(7, 64);
  Retriever retriever(g, p);

  RetrievalQuery q;
  q.text = "Marsh Works is based in Dunmore";
  q.k = 1;
  RetrievedFactSet top = retriever.baseline_retrieve(q);
  REQUIRE(top.facts.size() == 1);
  CHECK(top.facts[0].edge_id == 2);
  CHECK(top.facts[0].score == doctest::Approx(1.0).epsilon(1e-12));

  q.text = "who did Ada Lark mentor";
  q.k = static_cast<int>(g.num_edges());
  RetrievedFactSet all = retriever.baseline_retrieve(q);
  CHECK_FALSE(all.truncated);
  auto want = oracle::rank(g, p, q.text, {}, false);
  REQUIRE(all.facts.size() == want.size());
  for (size_t i = 0; i < want.size(); ++i) {
    CHECK(all.facts[i].edge_id == want[i].edge);
    CHECK(all.facts[i].score == doctest::Approx(want[i].score).epsilon(1e-12));
  }

  q.k = 9;
  CHECK(retriever.baseline_retrieve(q).truncated);
  q.k = 0;
  CHECK_THROWS_AS(retriever.baseline_retrieve(q), std::invalid_argument);
}

TEST_CASE("entity semantic scores") {
  KnowledgeHypergraph g = testing::chain_graph();
  SyntheticEmbeddingProvider p(7, 64);
  Retriever retriever(g, p);
  const EntityId a = *g.find_entity("A");
  std::vector<EntityId> q = {a};
  std::vector<double> s = retriever.entity_semantic_score(q);
  CHECK(s[a] == doctest::Approx(1.0).epsilon(1e-12));
  for (double x : s) {
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
  }

  // Flat recomputation: cosine against the renormalized mean.
  std::vector<EntityId> pair = {*g.find_entity("A"), *g.find_entity("C")};
  std::vector<double> got = retriever.entity_semantic_score(pair);
  std::vector<double> center(64, 0.0);
  for (EntityId v : pair) {
    auto e = p.embed(g.entity(v).name);
    for (size_t i = 0; i < 64; ++i) center[i] += e[i];
  }
  double cn = 0;
  for (double c : center) cn += c * c;
  for (EntityId v = 0; v < g.num_entities(); ++v) {
    auto e = p.embed(g.entity(v).name);
    double dot = 0, en = 0;
    for (size_t i = 0; i < 64; ++i) {
      dot += e[i] * center[i];
      en += e[i] * e[i];
    }
    CHECK(got[v] == doctest::Approx(dot / std::sqrt(cn * en)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(retriever.entity_semantic_score(std::vector<EntityId>{}),
                  std::invalid_argument);
}

TEST_CASE("informativeness on the chain") {
  KnowledgeHypergraph g = testing::chain_graph();
  const EntityId a = *g.find_entity("A"), b = *g.find_entity("B"),
                 c = *g.find_entity("C"), d = *g.find_entity("D");
  std::vector<EntityId> q = {a};
  std::vector<double> info = entity_informativeness(g, q);
  CHECK(info[a] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(info[b] == doctest::Approx(std::log(1.5)).epsilon(1e-15));
  CHECK(info[b] == doctest::Approx(0.4055).epsilon(1e-4));
  CHECK(info[c] == 0.0);
  CHECK(info[d] == 0.0);
}

TEST_CASE("within-edge normalization") {
  std::vector<FactRecord> r = {fact("solo", {"S"}),
                               fact("P with Q with R", {"P", "Q", "R"})};
  KnowledgeHypergraph g = ingest_facts(r);
  std::vector<double> s(g.num_entities(), 0.0);
  const Hyperedge& solo = g.edge(0);
  const Hyperedge& tri = g.edge(1);
  s[solo.entity_ids[0]] = 0.3;
  CHECK(within_edge_normalization(solo, s) == std::vector<double>{1.0});

  s[tri.entity_ids[0]] = 0.8;
  s[tri.entity_ids[1]] = 0.2;
  s[tri.entity_ids[2]] = -0.1;
  std::vector<double> share = within_edge_normalization(tri, s);
  CHECK(share[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(share[1] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(share[2] == 0.0);

  s[tri.entity_ids[0]] = 0.4;
  s[tri.entity_ids[1]] = 0.4;
  share = within_edge_normalization(tri, s);
  CHECK(share[0] == 0.5);
  CHECK(share[1] == 0.5);

  s[tri.entity_ids[0]] = s[tri.entity_ids[1]] = -0.5;
  share = within_edge_normalization(tri, s);
  CHECK(share[0] == doctest::Approx(1.0 / 3));
}

TEST_CASE("informativeness retrieval on the chain") {
  KnowledgeHypergraph g = testing::chain_graph();
  SyntheticEmbeddingProvider p(7, 64);
  Retriever retriever(g, p);
  const EntityId a = *g.find_entity("A");

  RetrievedFactSet top = retriever.retrieve_topk(entity_query({a}, 1));
  REQUIRE(top.facts.size() == 1);
  CHECK(top.facts[0].edge_id == 0);
  CHECK(top.mode == RetrievalMode::kInformativeness);

  RetrievedFactSet all = retriever.retrieve_topk(entity_query({a}, 5));
  CHECK(all.truncated);
  auto want = oracle::rank(g, p, "", {a}, true);
  REQUIRE(all.facts.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(all.facts[i].edge_id == want[i].edge);
    CHECK(all.facts[i].score == doctest::Approx(want[i].score).epsilon(1e-12));
    double sum = 0;
    for (const auto& row : all.facts[i].breakdown) sum += row.relevance;
    CHECK(std::abs(sum - all.facts[i].score) < 1e-9);
  }
  // {C,D} holds only entities outside every query-relevant edge.
  CHECK(all.facts[2].edge_id == 2);
  CHECK(all.facts[2].score == 0.0);

  // Text mentions drive extraction when no override is given.
  RetrievalQuery text;
  text.text = "what did A do";
  text.k = 1;
  CHECK(retriever.retrieve_topk(text).facts[0].edge_id == 0);
}

TEST_CASE("single-entity edge scores its informativeness") {
  std::vector<FactRecord> r = {fact("X alone", {"X"}),
                               fact("X meets Y", {"X", "Y"})};
  KnowledgeHypergraph g = ingest_facts(r);
  SyntheticEmbeddingProvider p(7, 64);
  Retriever retriever(g, p);
  const EntityId x = *g.find_entity("X");
  auto scored = retriever.score_hyperedges(entity_query({x}, 1));
  REQUIRE(scored.has_value());
  CHECK((*scored)[0].score == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("equal scores break ties by edge id") {
  std::vector<FactRecord> r = {fact("Z is unrelated", {"Z"}),
                               fact("X with Y", {"X", "Y"}),
                               fact("X and Y again", {"X", "Y"})};
  KnowledgeHypergraph g = ingest_facts(r);
  SyntheticEmbeddingProvider p(7, 64);
  Retriever retriever(g, p);
  RetrievedFactSet out =
      retriever.retrieve_topk(entity_query({*g.find_entity("X")}, 3));
  REQUIRE(out.facts.size() == 3);
  CHECK(out.facts[0].score == out.facts[1].score);
  CHECK(out.facts[0].edge_id == 1);
  CHECK(out.facts[1].edge_id == 2);
}

TEST_CASE("queries without entities fall back to the baseline") {
  KnowledgeHypergraph g = testing::chain_graph();
  SyntheticEmbeddingProvider p(7, 64);
  Retriever retriever(g, p);
  RetrievalQuery q;
  q.text = "nothing known here";
  q.k = 2;
  RetrievedFactSet out = retriever.retrieve_topk(q);
  CHECK(out.mode == RetrievalMode::kBaseline);
  CHECK(out.fell_back);
  CHECK(out.facts.size() == 2);
  CHECK_FALSE(retriever.score_hyperedges(q).has_value());
  CHECK_THROWS_AS(parse_retrieval_mode("cosine"), ConfigError);
}

TEST_CASE("random instances agree with the brute-force scorer") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    KnowledgeHypergraph g = testing::random_graph(&rng, 20, 12, 4);
    SyntheticEmbeddingProvider p(rng.next(), 16);
    Retriever retriever(g, p);
    std::vector<EntityId> q;
    const int nq = static_cast<int>(rng.below(3));
    for (int i = 0; i < nq; ++i) {
      q.push_back(static_cast<EntityId>(rng.below(g.num_entities())));
    }
    std::sort(q.begin(), q.end());
    q.erase(std::unique(q.begin(), q.end()), q.end());
    RetrievalQuery query = entity_query(q, 1 + static_cast<int>(rng.below(6)));
    query.text = "fact " + g.entity(0).name;
    for (bool info : {false, true}) {
      RetrievedFactSet got =
          retriever.retrieve(query, info ? RetrievalMode::kInformativeness
                                         : RetrievalMode::kBaseline);
      auto want = oracle::rank(g, p, query.text, q, info);
      REQUIRE(got.facts.size() <=
              static_cast<size_t>(query.k));
      for (size_t i = 0; i < got.facts.size(); ++i) {
        REQUIRE(std::abs(got.facts[i].score - want[i].score) < 1e-9);
        if (i > 0) REQUIRE(got.facts[i - 1].score >= got.facts[i].score);
      }
    }
  }
}

}  // namespace
}  // namespace hyperstep
