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

#ifndef HYPERSTEP_ENVIRONMENT_H_
#define HYPERSTEP_ENVIRONMENT_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hyperstep/embedding.h"
#include "hyperstep/episode.h"
#include "hyperstep/hypergraph.h"
#include "hyperstep/policy.h"
#include "hyperstep/retrieval.h"
#include "hyperstep/rng.h"
#include "hyperstep/trajectory.h"

namespace hyperstep {

// Parameters of a synthetic multi-hop corpus.
//
// Every chain entity is named "<Given> <Family>"; hub entities are named
// "<Family> <Institution>" and are shared by distractor facts of all chains
// whose entities carry that family name. Hubs therefore look lexically close
// to the query while being structurally uninformative.
struct CorpusSpec {
  int n_entities = 200;  // capacity of the entity pool
  int n_chains = 40;
  int hops = 2;
  int distractors_per_chain = 3;
  uint64_t seed = 1;
  int families = 10;
  int hubs_per_family = 2;
  // Probability that a distractor reuses the relation of the hop it hangs
  // off, which makes it textually closer to that hop's query than the gold
  // fact.
  double same_relation_rate = 0.5;
  // Retrieval depth under which every task must be solvable.
  int solvable_k = 2;
  // Resample decoys until every task passes the oracle check. When off, the
  // first draw is kept and tasks may be unsolvable.
  bool certify = true;
};

struct SyntheticCorpus {
  std::vector<FactRecord> records;
  KnowledgeHypergraph graph;
  std::vector<SyntheticTask> tasks;
};

// Deterministic in (spec, provider). Distractors of a chain are resampled
// until the scripted oracle solves its task under informativeness retrieval
// at spec.solvable_k with exactly one query per hop (unless spec.certify is
// off). Throws ConfigError
// naming the binding constraint when the spec is infeasible.
SyntheticCorpus generate_corpus(const CorpusSpec& spec,
                                const EmbeddingProvider& provider);

struct CorpusCheck {
  bool ok = true;
  std::vector<std::string> problems;
};

// Structural validation of tasks against a graph: chains connected, rooted
// at the start entity, ending at the answer.
CorpusCheck validate_tasks(const KnowledgeHypergraph& graph,
                           std::span<const SyntheticTask> tasks);

// Task export format used next to an ingestion-format graph file.
void write_tasks_jsonl(const KnowledgeHypergraph& graph,
                       std::span<const SyntheticTask> tasks,
                       std::ostream& out);
std::vector<SyntheticTask> read_tasks_jsonl(const KnowledgeHypergraph& graph,
                                            std::istream& in);

struct StepResult {
  EpisodeState state;
  std::shared_ptr<const RetrievedFactSet> retrieved;  // null unless a query
  std::string query_text;
  bool done = false;
};

// The agent-facing multi-hop QA environment. Immutable apart from an
// internal retrieval cache, which is guarded and deterministic, so one
// environment can serve concurrent episodes.
class Environment {
 public:
  Environment(const Retriever& retriever, EnvConfig config, int relations);

  const EnvConfig& config() const { return config_; }
  const Retriever& retriever() const { return retriever_; }
  const KnowledgeHypergraph& graph() const { return retriever_.graph(); }
  PolicyShape policy_shape() const;

  EpisodeState reset(const SyntheticTask& task) const;

  // Applies one composite action. Malformed actions (empty slot, bad
  // indices) end the episode with well_formed = false.
  StepResult step_episode(const EpisodeState& state,
                          const CompositeAction& action) const;

  DecisionContext context(const EpisodeState& state, Head head,
                          int prev_token) const;

  std::string render_query(const EpisodeState& state, int entity_slot,
                           int relation_slot) const;

  std::shared_ptr<const RetrievedFactSet> retrieve(
      const std::string& query_text) const;

 private:
  const Retriever& retriever_;
  EnvConfig config_;
  int relations_;
  mutable std::shared_mutex cache_mutex_;
  mutable std::unordered_map<std::string,
                             std::shared_ptr<const RetrievedFactSet>>
      cache_;
};

// Plays one turn from `state`. Samples each token from `policy` (argmax when
// greedy). When `record` is non-null the turn's tokens and knowledge are
// stored there.
StepResult play_turn(const Environment& env, const Policy& policy,
                     const EpisodeState& state, Rng* rng, bool greedy,
                     Turn* record);

// Full episode from reset with per-token log-probabilities recorded.
Trajectory run_episode(const Environment& env, const Policy& policy,
                       const SyntheticTask& task, Rng* rng, bool greedy);

// Continues a snapshot to termination without recording.
EpisodeState continue_episode(const Environment& env, const Policy& policy,
                              EpisodeState state, Rng* rng, bool greedy);

struct EvalMetrics {
  double em = 0.0;
  double f1 = 0.0;
  double mean_turns = 0.0;
  size_t n_tasks = 0;
};

// Greedy decoding on every task. Throws std::invalid_argument when `tasks`
// is empty.
EvalMetrics evaluate(const Environment& env, const Policy& policy,
                     std::span<const SyntheticTask> tasks);

// Fraction of (task, hop) pairs whose gold hyperedge appears in the top k
// for the gold query "<hop entity> <hop relation>".
double gold_hit_rate(const Retriever& retriever,
                     std::span<const SyntheticTask> tasks, RetrievalMode mode,
                     int k);

}  // namespace hyperstep

#endif  // HYPERSTEP_ENVIRONMENT_H_
