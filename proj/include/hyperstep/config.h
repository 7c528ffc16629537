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

#ifndef HYPERSTEP_CONFIG_H_
#define HYPERSTEP_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyperstep/environment.h"
#include "hyperstep/grpo.h"
#include "hyperstep/retrieval.h"
#include "hyperstep/step_reward.h"

namespace hyperstep {

struct TrainingOptions {
  int group_size = 8;        // N rollouts per question
  int batch_questions = 8;   // questions per iteration
  int iterations = 40;
  int update_epochs = 2;
  int max_turns = 4;
  int entity_slots = 3;
  double eps_norm = 1e-8;
  double temperature = 1.0;
  StepAdvantageMode advantage_mode = StepAdvantageMode::kAbsorbing;
  ObjectiveConfig objective;
  OptimizerConfig optimizer;
};

struct RunOptions {
  uint64_t seed = 1;
  int threads = 1;
  bool wall_time = false;  // record wall_ms; off keeps outputs byte-stable
  double em_threshold = 0.9;
  std::string out_dir;
};

// Everything a run depends on. Sections: [corpus], [retrieval], [reward],
// [optimizer], [run]. The [run] section does not enter the config hash.
struct ExperimentConfig {
  CorpusSpec corpus;
  // When set, the corpus is read from these files instead of generated.
  std::string corpus_path;  // ingestion JSONL
  std::string tasks_path;   // task JSONL

  RetrievalMode mode = RetrievalMode::kInformativeness;
  int k = 2;
  int embedding_dim = 64;
  uint64_t embedding_seed = 7;
  std::string embeddings_path;  // optional sidecar

  RewardConfig reward;
  TrainingOptions train;
  RunOptions run;

  // Throws ConfigError on the first invalid value.
  void validate() const;
};

// Parses the flat key-value format: `[section]` headers, `key = value`
// lines, `#` or `;` comments. Keys may also be written as `section.key`.
ExperimentConfig parse_config(std::string_view text);

ExperimentConfig load_config(const std::string& path);

// Applies `section.key=value`. Throws ConfigError on unknown keys or
// unparsable values.
void apply_override(ExperimentConfig* config, std::string_view assignment);
void set_config_value(ExperimentConfig* config, std::string_view key,
                      std::string_view value);

// Sorted `section.key=value` lines. The output directory is never included.
std::string canonical_config(const ExperimentConfig& config,
                             bool include_run = true);

// Hex FNV-1a of the canonical form without the [run] section.
std::string config_hash(const ExperimentConfig& config);

}  // namespace hyperstep

#endif  // HYPERSTEP_CONFIG_H_
