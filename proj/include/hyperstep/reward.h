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

#ifndef HYPERSTEP_REWARD_H_
#define HYPERSTEP_REWARD_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hyperstep/entity_matcher.h"
#include "hyperstep/environment.h"
#include "hyperstep/episode.h"
#include "hyperstep/policy.h"
#include "hyperstep/qa_metrics.h"
#include "hyperstep/retrieval.h"
#include "hyperstep/step_reward.h"
#include "hyperstep/trajectory.h"

namespace hyperstep {

struct CertaintyEstimate {
  double value = 0.0;
  int samples = 0;
  // Binomial standard error with add-one smoothing, so it stays positive
  // when all samples agree.
  double std_error = 0.0;
};

// Monte-Carlo estimate of the probability that continuing `snapshot` under
// `policy` ends with an exact-match answer. Rollout i draws from
// derive_seed(seed, i). Rollout failures propagate.
CertaintyEstimate estimate_certainty(const Environment& env,
                                     const Policy& policy,
                                     const EpisodeState& snapshot,
                                     std::string_view gold, int m,
                                     uint64_t seed);

// Same probability by exhaustive enumeration of every continuation.
double exact_certainty(const Environment& env, const Policy& policy,
                       const EpisodeState& snapshot, std::string_view gold);

double step_progress_reward(const CertaintyEstimate& after,
                            const CertaintyEstimate& before);

// Entities of a retrieved set: union of its facts' entity sets.
std::vector<EntityId> retrieved_entities(const RetrievedFactSet& retrieved);

// |a ∩ b| / |a| with set semantics; 0 when a is empty.
double overlap_ratio(std::span<const EntityId> a, std::span<const EntityId> b);

double connectivity_reward(const RetrievedFactSet& retrieved,
                           std::string_view prior_state_text,
                           const EntityMatcher& matcher);

double answer_reach_reward(const RetrievedFactSet& retrieved,
                           std::string_view gold_answer_text,
                           const EntityMatcher& matcher);

double outcome_reward(const Trajectory& trajectory, std::string_view gold,
                      const RewardConfig& config);

StepReward total_step_reward(int turn_index, double r_sp, double r_con,
                             double r_ans, double outcome,
                             const RewardConfig& config);

}  // namespace hyperstep

#endif  // HYPERSTEP_REWARD_H_
