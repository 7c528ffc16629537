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

#ifndef HYPERSTEP_STEP_REWARD_H_
#define HYPERSTEP_STEP_REWARD_H_

namespace hyperstep {

// Text whose entities form V(s_{<t}) in the connectivity term.
enum class StateEntities {
  kFullState,  // question, queries and retrieved knowledge
  kQueries,    // question and queries only
};

struct RewardConfig {
  double lambda1 = 0.5;  // weight of the progress term
  double lambda2 = 0.5;  // weight of the structural term
  int rollouts_m = 4;    // continuation rollouts per certainty estimate
  double accuracy_weight = 1.0;
  double format_weight = 0.1;
  // Adds the outcome reward to every step's total; otherwise the outcome
  // only reaches the final-answer tokens.
  bool outcome_in_every_step = true;
  StateEntities state_entities = StateEntities::kFullState;

  // Throws ConfigError on negative weights or rollouts_m < 1.
  void validate() const;
};

// Decomposed reward of one retrieval turn.
struct StepReward {
  int turn_index = 0;
  double r_sp = 0.0;
  double r_con = 0.0;
  double r_ans = 0.0;
  double r_struct = 0.0;         // == r_con + r_ans
  double r_outcome_share = 0.0;
  double total = 0.0;            // share + lambda1 r_sp + lambda2 r_struct
};

}  // namespace hyperstep

#endif  // HYPERSTEP_STEP_REWARD_H_
