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

#include "hyperstep/reward.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include "hyperstep/errors.h"
#include "hyperstep/rng.h"

namespace hyperstep {

std::string normalize_answer(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::ispunct(u)) continue;
    cleaned += static_cast<char>(std::tolower(u));
  }
  std::istringstream in(cleaned);
  std::string token, out;
  while (in >> token) {
    if (token == "a" || token == "an" || token == "the") continue;
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

double exact_match(std::string_view prediction, std::string_view gold) {
  return normalize_answer(prediction) == normalize_answer(gold) ? 1.0 : 0.0;
}

double token_f1(std::string_view prediction, std::string_view gold) {
  auto tokens = [](std::string_view s) {
    std::map<std::string, int> bag;
    std::istringstream in(normalize_answer(s));
    std::string t;
    int n = 0;
    while (in >> t) {
      ++bag[t];
      ++n;
    }
    return std::make_pair(bag, n);
  };
  auto [p, np] = tokens(prediction);
  auto [g, ng] = tokens(gold);
  if (np == 0 || ng == 0) return np == ng ? 1.0 : 0.0;
  int common = 0;
  for (const auto& [t, c] : p) {
    auto it = g.find(t);
    if (it != g.end()) common += std::min(c, it->second);
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / np;
  const double recall = static_cast<double>(common) / ng;
  return 2.0 * precision * recall / (precision + recall);
}

void RewardConfig::validate() const {
  if (!(lambda1 >= 0.0)) throw ConfigError("reward.lambda1 must be >= 0");
  if (!(lambda2 >= 0.0)) throw ConfigError("reward.lambda2 must be >= 0");
  if (rollouts_m < 1) throw ConfigError("reward.rollouts_m must be >= 1");
  if (!(accuracy_weight >= 0.0)) {
    throw ConfigError("reward.accuracy_weight must be >= 0");
  }
  if (!(format_weight >= 0.0)) {
    throw ConfigError("reward.format_weight must be >= 0");
  }
}

namespace {

double answer_accuracy(const Environment& env, const EpisodeState& s,
                       std::string_view gold) {
  if (s.answer == kNoEntity) return 0.0;
  return exact_match(env.graph().entity(s.answer).name, gold);
}

double enumerate(const Environment& env, const Policy& policy,
                 const EpisodeState& state, std::string_view gold) {
  if (state.done) return answer_accuracy(env, state, gold);
  const PolicyShape shape = policy.shape();
  std::vector<double> pt(shape.num_actions(Head::kType));
  policy.distribution(env.context(state, Head::kType, -1), &state, pt);
  double total = 0.0;
  for (size_t type = 0; type < pt.size(); ++type) {
    if (pt[type] == 0.0) continue;
    std::vector<double> pe(shape.num_actions(Head::kEntity));
    policy.distribution(
        env.context(state, Head::kEntity, static_cast<int>(type)), &state, pe);
    for (size_t slot = 0; slot < pe.size(); ++slot) {
      if (pe[slot] == 0.0) continue;
      const double p = pt[type] * pe[slot];
      CompositeAction a{static_cast<ActionType>(type), static_cast<int>(slot),
                        -1};
      if (a.type == ActionType::kAnswer) {
        total += p * enumerate(env, policy, env.step_episode(state, a).state,
                               gold);
        continue;
      }
      std::vector<double> pr(shape.num_actions(Head::kRelation));
      policy.distribution(
          env.context(state, Head::kRelation, static_cast<int>(slot)), &state,
          pr);
      for (size_t rel = 0; rel < pr.size(); ++rel) {
        if (pr[rel] == 0.0) continue;
        a.relation_slot = static_cast<int>(rel);
        total += p * pr[rel] *
                 enumerate(env, policy, env.step_episode(state, a).state, gold);
      }
    }
  }
  return total;
}

}  // namespace

CertaintyEstimate estimate_certainty(const Environment& env,
                                     const Policy& policy,
                                     const EpisodeState& snapshot,
                                     std::string_view gold, int m,
                                     uint64_t seed) {
  if (m < 1) throw ConfigError("rollouts_m must be >= 1");
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    Rng rng(derive_seed(seed, static_cast<uint64_t>(i)));
    EpisodeState end = continue_episode(env, policy, snapshot, &rng, false);
    sum += answer_accuracy(env, end, gold);
  }
  CertaintyEstimate est;
  est.samples = m;
  est.value = sum / m;
  const double smoothed = (sum + 1.0) / (m + 2.0);
  est.std_error = std::sqrt(smoothed * (1.0 - smoothed) / m);
  return est;
}

double exact_certainty(const Environment& env, const Policy& policy,
                       const EpisodeState& snapshot, std::string_view gold) {
  return enumerate(env, policy, snapshot, gold);
}

double step_progress_reward(const CertaintyEstimate& after,
                            const CertaintyEstimate& before) {
  return after.value - before.value;
}

std::vector<EntityId> retrieved_entities(const RetrievedFactSet& retrieved) {
  std::vector<EntityId> out;
  for (const RetrievedFact& f : retrieved.facts) {
    out.insert(out.end(), f.entity_ids.begin(), f.entity_ids.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double overlap_ratio(std::span<const EntityId> a, std::span<const EntityId> b) {
  std::vector<EntityId> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  if (sa.empty()) return 0.0;
  std::sort(sb.begin(), sb.end());
  size_t common = 0;
  for (EntityId v : sa) {
    if (std::binary_search(sb.begin(), sb.end(), v)) ++common;
  }
  return static_cast<double>(common) / sa.size();
}

double connectivity_reward(const RetrievedFactSet& retrieved,
                           std::string_view prior_state_text,
                           const EntityMatcher& matcher) {
  return overlap_ratio(retrieved_entities(retrieved),
                       matcher.extract(prior_state_text));
}

double answer_reach_reward(const RetrievedFactSet& retrieved,
                           std::string_view gold_answer_text,
                           const EntityMatcher& matcher) {
  return overlap_ratio(retrieved_entities(retrieved),
                       matcher.extract(gold_answer_text));
}

double outcome_reward(const Trajectory& trajectory, std::string_view gold,
                      const RewardConfig& config) {
  return config.accuracy_weight *
             exact_match(trajectory.final_answer_text, gold) +
         config.format_weight * (trajectory.well_formed ? 1.0 : 0.0);
}

StepReward total_step_reward(int turn_index, double r_sp, double r_con,
                             double r_ans, double outcome,
                             const RewardConfig& config) {
  StepReward r;
  r.turn_index = turn_index;
  r.r_sp = r_sp;
  r.r_con = r_con;
  r.r_ans = r_ans;
  r.r_struct = r_con + r_ans;
  r.r_outcome_share = config.outcome_in_every_step ? outcome : 0.0;
  r.total = r.r_outcome_share + config.lambda1 * r.r_sp +
            config.lambda2 * r.r_struct;
  return r;
}

}  // namespace hyperstep
