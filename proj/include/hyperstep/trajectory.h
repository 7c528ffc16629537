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

#ifndef HYPERSTEP_TRAJECTORY_H_
#define HYPERSTEP_TRAJECTORY_H_

#include <memory>
#include <string>
#include <vector>

#include "hyperstep/episode.h"
#include "hyperstep/policy.h"
#include "hyperstep/retrieval.h"
#include "hyperstep/step_reward.h"

namespace hyperstep {

// One policy-emitted token with its decision context and its log-probability
// under the sampling policy.
struct TokenRecord {
  DecisionContext context;
  int action = 0;
  double logprob_old = 0.0;
};

enum class TurnKind { kQuery, kAnswer, kMalformed };

struct Turn {
  int turn_index = 0;  // 1-based
  TurnKind kind = TurnKind::kQuery;
  std::vector<TokenRecord> tokens;
  std::string query_text;
  // Environment-emitted knowledge; carries no log-probabilities.
  std::shared_ptr<const RetrievedFactSet> retrieved;
  std::string prior_state_text;  // s_{<t}
  std::string prior_query_log;   // question and earlier queries only
  EpisodeState state_after;
  StepReward step_reward;  // filled for query turns after the rollout
};

struct Trajectory {
  int task_id = 0;
  std::string question;
  EpisodeState initial_state;
  std::vector<Turn> turns;
  std::string final_answer_text;
  EntityId answer = kNoEntity;
  TerminatedBy terminated_by = TerminatedBy::kNone;
  bool well_formed = false;
  double outcome = 0.0;

  size_t num_policy_tokens() const;
  int num_query_turns() const;
};

// N rollouts for one question plus per-token advantages.
struct GroupBatch {
  const SyntheticTask* task = nullptr;
  std::vector<Trajectory> trajectories;
  // advantages[i][j]: advantage of the j-th policy token of trajectory i, in
  // turn order.
  std::vector<std::vector<double>> advantages;
};

}  // namespace hyperstep

#endif  // HYPERSTEP_TRAJECTORY_H_
