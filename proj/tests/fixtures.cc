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

#include "fixtures.h"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hyperstep::testing {

FactRecord fact(std::string text, std::vector<std::string> entities) {
  FactRecord r;
  r.text = std::move(text);
  r.entities = std::move(entities);
  return r;
}

KnowledgeHypergraph chain_graph() {
  std::vector<FactRecord> records = {fact("A relates B", {"A", "B"}),
                                     fact("B relates C", {"B", "C"}),
                                     fact("C relates D", {"C", "D"})};
  return ingest_facts(records);
}

KnowledgeHypergraph random_graph(Rng* rng, int max_edges, int entities,
                                 int max_arity) {
  const int edges = 1 + static_cast<int>(rng->below(max_edges));
  std::vector<FactRecord> records;
  for (int e = 0; e < edges; ++e) {
    const int arity = 1 + static_cast<int>(rng->below(max_arity));
    std::vector<std::string> members;
    while (static_cast<int>(members.size()) < std::min(arity, entities)) {
      std::string name = "n" + std::to_string(rng->below(entities));
      if (std::find(members.begin(), members.end(), name) == members.end()) {
        members.push_back(name);
      }
    }
    std::string text = "fact " + std::to_string(e);
    for (const auto& m : members) text += " " + m;
    records.push_back(fact(std::move(text), std::move(members)));
  }
  return ingest_facts(records);
}

SoftmaxPolicy random_policy(const PolicyShape& shape, Rng* rng,
                            double scale) {
  PolicyParams params;
  params.values.resize(shape.num_params());
  for (double& v : params.values) v = scale * (2.0 * rng->uniform() - 1.0);
  return SoftmaxPolicy(shape, std::move(params));
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.corpus.n_entities = 80;
  c.corpus.n_chains = 6;
  c.corpus.distractors_per_chain = 2;
  c.train.group_size = 4;
  c.train.batch_questions = 3;
  c.train.iterations = 3;
  c.train.update_epochs = 1;
  return c;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hyperstep_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace hyperstep::testing
