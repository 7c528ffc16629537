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

#ifndef HYPERSTEP_TESTS_ORACLES_RETRIEVAL_ORACLE_H_
#define HYPERSTEP_TESTS_ORACLES_RETRIEVAL_ORACLE_H_

#include <string>
#include <vector>

#include "hyperstep/embedding.h"
#include "hyperstep/hypergraph.h"

namespace hyperstep::oracle {

struct Hit {
  EdgeId edge = 0;
  double score = 0.0;
};

// Brute-force hyperedge scoring written straight from the formulas, with no
// shared code beyond the embedding provider: flat loops over edge member
// lists, no incidence index, no library cosine or mean.
//
// Entity mode: with C the unit mean of the query-entity embeddings,
//   s(v) = cos(phi(v), C)
//   I(v) = ln(1 + #{query-relevant edges with v} / #{edges with v})
//   score(e) = sum_v share(v, e) I(v), share = clipped-positive s ratio.
// Baseline mode (or no query entities): cos(phi(query), phi(edge text)).
std::vector<Hit> rank(const KnowledgeHypergraph& graph,
                      const EmbeddingProvider& provider,
                      const std::string& query_text,
                      const std::vector<EntityId>& query_entities,
                      bool informativeness);

}  // namespace hyperstep::oracle

#endif  // HYPERSTEP_TESTS_ORACLES_RETRIEVAL_ORACLE_H_
