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

#ifndef HYPERSTEP_TRAINER_H_
#define HYPERSTEP_TRAINER_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hyperstep/config.h"
#include "hyperstep/embedding.h"
#include "hyperstep/environment.h"
#include "hyperstep/policy.h"
#include "hyperstep/retrieval.h"

namespace hyperstep {

// Corpus, index and environment of one experiment. Non-movable: the
// retriever and environment hold references into it.
class Experiment {
 public:
  explicit Experiment(const ExperimentConfig& config);
  Experiment(const Experiment&) = delete;
  Experiment& operator=(const Experiment&) = delete;

  const KnowledgeHypergraph& graph() const { return graph_; }
  const std::vector<SyntheticTask>& tasks() const { return tasks_; }
  const EmbeddingProvider& provider() const { return *provider_; }
  const Retriever& retriever() const { return *retriever_; }
  const Environment& env() const { return *env_; }
  // Hash of the exported graph and tasks.
  const std::string& corpus_hash() const { return corpus_hash_; }

  void write_corpus(std::ostream& graph_out, std::ostream& tasks_out) const;

 private:
  std::unique_ptr<EmbeddingProvider> provider_;
  KnowledgeHypergraph graph_;
  std::vector<SyntheticTask> tasks_;
  std::unique_ptr<Retriever> retriever_;
  std::unique_ptr<Environment> env_;
  std::string corpus_hash_;
};

std::unique_ptr<EmbeddingProvider> make_provider(const ExperimentConfig& config);

struct IterationMetrics {
  int iter = 0;
  double mean_outcome = 0.0;
  double em = 0.0;
  double f1 = 0.0;
  double mean_turns = 0.0;
  double kl = 0.0;
  double clip_frac = 0.0;
  int64_t wall_ms = 0;
};

inline constexpr const char* kMetricsHeader =
    "iter,mean_outcome,em,f1,mean_turns,kl,clip_frac,wall_ms";

std::string format_metrics_row(const IterationMetrics& m);

struct TrainResult {
  std::vector<IterationMetrics> log;
  PolicyParams final_params;
  PolicyParams best_params;
  double best_em = -1.0;
  int best_iter = 0;
  // First iteration whose evaluation EM reached the threshold, 0 if none.
  int iters_to_threshold = 0;
  EvalMetrics initial_eval;
  EvalMetrics final_eval;
  std::vector<std::string> excluded;
};

// Runs sample -> reward -> advantage -> update for the configured number of
// iterations. Writes the CSV header (with a hash comment line) and one row
// per iteration to `csv` if given.
TrainResult train(const Experiment& experiment, const ExperimentConfig& config,
                  std::ostream* csv);

// Checkpoint: kind, params, version, shape, temperature, hashes.
struct Checkpoint {
  std::string kind = "softmax";  // or "scripted_oracle"
  PolicyShape shape;
  double temperature = 1.0;
  PolicyParams params;
  std::string config_hash;
  std::string corpus_hash;
};

void write_checkpoint(const Checkpoint& checkpoint, std::ostream& out);
Checkpoint read_checkpoint(std::istream& in);

// Instantiates the checkpoint's policy.
std::unique_ptr<Policy> make_policy(const Checkpoint& checkpoint);

}  // namespace hyperstep

#endif  // HYPERSTEP_TRAINER_H_
