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


#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.h"
#include "hyperstep/errors.h"
#include "hyperstep/hypergraph.h"

namespace hyperstep {

struct HypergraphTestAccess {
  static std::vector<std::vector<EdgeId>>& incidence(KnowledgeHypergraph& g) {
    return g.incidence_;
  }
};

namespace {

using testing::fact;

TEST_CASE("single record builds a two-entity graph") {
  std::vector<FactRecord> r = {fact("A relates B", {"A", "B"})};
  KnowledgeHypergraph g = ingest_facts(r);
  CHECK(g.num_entities() == 2);
  CHECK(g.num_edges() == 1);
  const EntityId a = *g.find_entity("A");
  REQUIRE(g.incidence(a).size() == 1);
  CHECK(g.incidence(a)[0] == 0);
}

TEST_CASE("entity names fold case and whitespace") {
  std::vector<FactRecord> r = {fact("Alabama votes", {"Alabama"}),
                               fact("alabama again", {"  alabama "})};
  KnowledgeHypergraph g = ingest_facts(r);
  CHECK(g.num_entities() == 1);
  CHECK(g.degree(0) == 2);
  CHECK(normalize_entity_name("  New   York ") == "new york");
}

TEST_CASE("chain degrees and edges_containing") {
  KnowledgeHypergraph g = testing::chain_graph();
  const EntityId a = *g.find_entity("A"), b = *g.find_entity("B"),
                 d = *g.find_entity("D");
  CHECK(g.degree(b) == 2);
  CHECK(g.degree(a) == 1);

  std::vector<EntityId> q = {b};
  CHECK(edges_containing(g, q) == std::vector<EdgeId>{0, 1});
  CHECK(edges_containing(g, std::vector<EntityId>{}).empty());
  std::vector<EntityId> ad = {a, d};
  CHECK(edges_containing(g, ad) == std::vector<EdgeId>{0, 2});
  std::vector<EntityId> bad = {99};
  CHECK_THROWS_AS(edges_containing(g, bad), std::out_of_range);
}

TEST_CASE("validation reports duplicates and corruption") {
  KnowledgeHypergraph g = testing::chain_graph();
  CHECK(validate(g).ok);

  std::vector<FactRecord> twice = {fact("A relates B", {"A", "B"}),
                                   fact("A relates B", {"A", "B"})};
  KnowledgeHypergraph dup = ingest_facts(twice);
  CHECK(dup.num_edges() == 1);
  CHECK(validate(dup).duplicates_collapsed == 1);

  HypergraphTestAccess::incidence(g)[0].push_back(2);
  ValidationReport report = validate(g);
  CHECK_FALSE(report.ok);
  CHECK_FALSE(report.incidence_consistent);
}

TEST_CASE("malformed records are rejected with line numbers") {
  std::istringstream in(
      "{\"text\": \"A relates B\", \"entities\": [\"A\", \"B\"]}\n"
      "not json\n"
      "{\"text\": \"no entities\", \"entities\": []}\n"
      "{\"entities\": [\"A\"]}\n"
      "{\"text\": \"dup member\", \"entities\": [\"A\", \"a\"]}\n");
  KnowledgeHypergraph g = ingest_jsonl(in);
  CHECK(g.num_edges() == 1);
  const auto& rejected = g.build_stats().rejected;
  REQUIRE(rejected.size() == 4);
  CHECK(rejected[0].line == 2);
  CHECK(rejected[1].line == 3);
  CHECK(rejected[2].line == 4);
  CHECK(rejected[3].line == 5);
}

TEST_CASE("no valid record is fatal") {
  std::istringstream empty("");
  CHECK_THROWS_AS(ingest_jsonl(empty), DataError);
  std::istringstream junk("{}\n[1]\n");
  CHECK_THROWS_AS(ingest_jsonl(junk), DataError);
}

TEST_CASE("orphan entities are dropped") {
  HypergraphBuilder b;
  b.add_entity("Lonely");
  b.add_entity("A", {"Alpha"});
  b.add_fact(fact("A relates B", {"A", "B"}));
  KnowledgeHypergraph g = std::move(b).build();
  CHECK(g.num_entities() == 2);
  CHECK_FALSE(g.find_entity("Lonely").has_value());
  CHECK(g.find_entity("alpha") == g.find_entity("A"));
  REQUIRE(g.build_stats().orphans_dropped.size() == 1);
}

TEST_CASE("incidence is the transpose of membership on random graphs") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    KnowledgeHypergraph g = testing::random_graph(&rng, 30, 25, 5);
    for (const Hyperedge& e : g.edges()) {
      for (EntityId v : e.entity_ids) {
        auto inc = g.incidence(v);
        REQUIRE(std::binary_search(inc.begin(), inc.end(), e.id));
      }
    }
    for (const Entity& v : g.entities()) {
      REQUIRE(g.degree(v.id) >= 1);
      for (EdgeId e : g.incidence(v.id)) {
        const auto& members = g.edge(e).entity_ids;
        REQUIRE(std::find(members.begin(), members.end(), v.id) !=
                members.end());
      }
    }
    REQUIRE(validate(g).ok);
  }
}

TEST_CASE("index persistence round-trips and rebuilds a stale cache") {
  auto dir = testing::scratch_dir("index");
  const std::string path = (dir / "chain.jsonl").string();
  KnowledgeHypergraph g = testing::chain_graph();
  save_index(g, path);

  std::string note;
  KnowledgeHypergraph loaded = load_index(path, &note);
  CHECK(note == "incidence cache verified");
  CHECK(loaded.num_entities() == g.num_entities());
  CHECK(loaded.num_edges() == g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    CHECK(loaded.edge(e).text == g.edge(e).text);
    CHECK(loaded.edge(e).entity_ids == g.edge(e).entity_ids);
  }

  std::ofstream(path + ".inc", std::ios::binary | std::ios::trunc) << "junk";
  KnowledgeHypergraph rebuilt = load_index(path, &note);
  CHECK(rebuilt.num_edges() == 3);
  CHECK(note != "incidence cache verified");
}

TEST_CASE("export then ingest preserves the graph") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    KnowledgeHypergraph g = testing::random_graph(&rng, 20, 15, 4);
    std::stringstream buf;
    write_jsonl(g, buf);
    KnowledgeHypergraph back = ingest_jsonl(buf);
    REQUIRE(back.num_edges() == g.num_edges());
    REQUIRE(back.num_entities() == g.num_entities());
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      REQUIRE(back.edge(e).text == g.edge(e).text);
      REQUIRE(back.edge(e).entity_ids == g.edge(e).entity_ids);
    }
  }
}

}  // namespace
}  // namespace hyperstep
