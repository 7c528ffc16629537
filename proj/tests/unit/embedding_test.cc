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
#include <sstream>

#include "doctest.h"
#include "fixtures.h"
#include "hyperstep/embedding.h"
#include "hyperstep/errors.h"

namespace hyperstep {
namespace {

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector(v); }

TEST_CASE("cosine similarity") {
  EmbeddingVector a = vec({0.6, 0.8});
  CHECK(cosine_sim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_sim(vec({1, 0}), vec({0, 1})) == 0.0);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(cosine_sim(vec({r, r}), vec({1, 0})) ==
        doctest::Approx(0.70710678118654752).epsilon(1e-12));
  CHECK_THROWS_AS(cosine_sim(vec({1, 0}), vec({1, 0, 0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(cosine_sim(vec({0, 0}), vec({1, 0})), std::domain_error);
}

TEST_CASE("mean embedding renormalizes") {
  std::vector<EmbeddingVector> one = {vec({3, 4})};
  EmbeddingVector m = mean_embedding(one);
  CHECK(m[0] == doctest::Approx(0.6));
  CHECK(m[1] == doctest::Approx(0.8));

  std::vector<EmbeddingVector> same = {vec({0.6, 0.8}), vec({0.6, 0.8})};
  CHECK(mean_embedding(same)[0] == doctest::Approx(0.6));

  std::vector<EmbeddingVector> basis = {vec({1, 0}), vec({0, 1})};
  EmbeddingVector b = mean_embedding(basis);
  CHECK(b[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(b[1] == doctest::Approx(1.0 / std::sqrt(2.0)));

  CHECK_THROWS_AS(mean_embedding(std::vector<EmbeddingVector>{}),
                  std::invalid_argument);
}

TEST_CASE("synthetic provider is deterministic, unit-norm and injective") {
  SyntheticEmbeddingProvider p(7, 64);
  const std::vector<std::string> corpus = {
      "A relates B", "B relates C",  "C relates D",      "Alabama",
      "Taylor Hicks", "New York City", "december 12 2017", "x"};
  for (size_t i = 0; i < corpus.size(); ++i) {
    EmbeddingVector v = p.embed(corpus[i]);
    CHECK(v == p.embed(corpus[i]));
    CHECK(v.dimension() == 64);
    CHECK(std::abs(v.norm() - 1.0) < 1e-6);
    for (double x : v.values()) CHECK(std::isfinite(x));
    for (size_t j = 0; j < i; ++j) CHECK_FALSE(v == p.embed(corpus[j]));
  }
  SyntheticEmbeddingProvider other(8, 64);
  CHECK_FALSE(p.embed("Alabama") == other.embed("Alabama"));
  CHECK(p.embed("Hello, World!") == p.embed("hello world"));
}

TEST_CASE("aggregate entity embedding") {
  KnowledgeHypergraph g = testing::chain_graph();
  SyntheticEmbeddingProvider p(7, 32);
  std::vector<EntityId> a = {*g.find_entity("A")};
  EmbeddingVector single = aggregate_entity_embedding(g, a, p);
  EmbeddingVector direct = p.embed(entity_embedding_text(g.entity(a[0])));
  for (size_t i = 0; i < 32; ++i) {
    CHECK(single[i] == doctest::Approx(direct[i]).epsilon(1e-12));
  }
}

TEST_CASE("sidecar embeddings load and refuse unknown texts") {
  SyntheticEmbeddingProvider p(3, 8);
  std::vector<std::string> texts = {"A relates B", "Alabama"};
  std::stringstream buf;
  write_sidecar(p, texts, buf);
  SidecarEmbeddingProvider side = SidecarEmbeddingProvider::load(buf);
  CHECK(side.dimension() == 8);
  CHECK(side.size() == 2);
  for (size_t i = 0; i < 8; ++i) {
    CHECK(side.embed("alabama")[i] == doctest::Approx(p.embed("Alabama")[i]));
  }
  CHECK_THROWS_AS(side.embed("never seen"), DataError);

  std::istringstream ragged(
      "{\"text\": \"a\", \"vector\": [1, 0]}\n"
      "{\"text\": \"b\", \"vector\": [1, 0, 0]}\n");
  CHECK_THROWS_AS(SidecarEmbeddingProvider::load(ragged), DataError);
}

}  // namespace
}  // namespace hyperstep
