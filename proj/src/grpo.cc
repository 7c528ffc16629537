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

#include "hyperstep/grpo.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "hyperstep/errors.h"
#include "hyperstep/parallel.h"
#include "hyperstep/reward.h"
#include "hyperstep/rng.h"

namespace hyperstep {

GroupBatch sample_group(const Environment& env, const Policy& policy,
                        const SyntheticTask& task, int n, uint64_t seed,
                        int threads, std::vector<std::string>* excluded) {
  if (n < 2) throw std::invalid_argument("sample_group: N must be >= 2");
  std::vector<std::optional<Trajectory>> slots(n);
  std::vector<std::string> errors(n);
  parallel_for(static_cast<size_t>(n), threads, [&](size_t i) {
    try {
      Rng rng(derive_seed(seed, i));
      slots[i] = run_episode(env, policy, task, &rng, false);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  GroupBatch batch;
  batch.task = &task;
  for (int i = 0; i < n; ++i) {
    if (slots[i]) {
      batch.trajectories.push_back(std::move(*slots[i]));
    } else if (excluded != nullptr) {
      excluded->push_back("task " + std::to_string(task.id) + " rollout " +
                          std::to_string(i) + ": " + errors[i]);
    }
  }
  if (batch.trajectories.size() < 2) {
    throw std::runtime_error("sample_group: fewer than 2 rollouts survived "
                             "for task " + std::to_string(task.id));
  }
  return batch;
}

void compute_step_rewards(GroupBatch* batch, const Environment& env,
                          const Policy& policy, const RewardConfig& config,
                          uint64_t seed) {
  const SyntheticTask& task = *batch->task;
  const std::string& gold = task.gold_answer_text;
  const EntityMatcher& matcher = env.retriever().matcher();
  const bool progress = config.lambda1 != 0.0;
  CertaintyEstimate base;
  if (progress && !batch->trajectories.empty()) {
    base = estimate_certainty(env, policy, batch->trajectories[0].initial_state,
                              gold, config.rollouts_m, derive_seed(seed, 0));
  }
  for (size_t i = 0; i < batch->trajectories.size(); ++i) {
    Trajectory& traj = batch->trajectories[i];
    traj.outcome = outcome_reward(traj, gold, config);
    CertaintyEstimate before = base;
    const uint64_t stream = derive_seed(seed, i + 1);
    for (Turn& turn : traj.turns) {
      if (turn.kind != TurnKind::kQuery) continue;
      double r_sp = 0.0;
      if (progress) {
        CertaintyEstimate after = estimate_certainty(
            env, policy, turn.state_after, gold, config.rollouts_m,
            derive_seed(stream, static_cast<uint64_t>(turn.turn_index)));
        r_sp = step_progress_reward(after, before);
        before = after;
      }
      const double r_con =
          connectivity_reward(*turn.retrieved,
                              config.state_entities == StateEntities::kQueries
                                  ? turn.prior_query_log
                                  : turn.prior_state_text,
                              matcher);
      const double r_ans = answer_reach_reward(*turn.retrieved, gold, matcher);
      turn.step_reward = total_step_reward(turn.turn_index, r_sp, r_con, r_ans,
                                           traj.outcome, config);
    }
  }
}

std::vector<double> outcome_group_advantage(std::span<const double> rewards,
                                            double eps_norm) {
  const size_t n = rewards.size();
  if (n < 2) {
    throw std::invalid_argument("advantage normalization needs N >= 2");
  }
  std::vector<double> out(n, 0.0);
  // A constant group has no signal; its rounded mean would leak noise.
  if (std::all_of(rewards.begin(), rewards.end(),
                  [&](double r) { return r == rewards[0]; })) {
    return out;
  }
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(n);
  const double denom = std::max(std::sqrt(var), eps_norm);
  for (size_t i = 0; i < n; ++i) out[i] = (rewards[i] - mean) / denom;
  return out;
}

StepAdvantageMode parse_step_advantage_mode(std::string_view name) {
  if (name == "absorbing") return StepAdvantageMode::kAbsorbing;
  if (name == "decomposed") return StepAdvantageMode::kDecomposed;
  throw ConfigError("unknown step advantage mode '" + std::string(name) +
                    "' (expected absorbing or decomposed)");
}

const char* step_advantage_mode_name(StepAdvantageMode mode) {
  return mode == StepAdvantageMode::kAbsorbing ? "absorbing" : "decomposed";
}

std::vector<std::vector<double>> step_modulated_advantage(
    const GroupBatch& batch, bool outcome_in_every_step, double eps_norm,
    StepAdvantageMode mode) {
  const auto& trajs = batch.trajectories;
  const size_t n = trajs.size();
  std::vector<double> outcomes(n);
  for (size_t i = 0; i < n; ++i) outcomes[i] = trajs[i].outcome;
  const std::vector<double> outcome_adv =
      outcome_group_advantage(outcomes, eps_norm);
  const bool absorbing =
      outcome_in_every_step && mode == StepAdvantageMode::kAbsorbing;
  const bool decomposed =
      outcome_in_every_step && mode == StepAdvantageMode::kDecomposed;

  // turn_adv[i][t] for query turns.
  std::vector<std::vector<double>> turn_adv(n);
  size_t max_turns = 0;
  for (size_t i = 0; i < n; ++i) {
    turn_adv[i].assign(trajs[i].turns.size(), 0.0);
    max_turns = std::max(max_turns, trajs[i].turns.size());
  }
  for (size_t t = 0; t < max_turns; ++t) {
    std::vector<size_t> members;
    std::vector<double> values;
    std::vector<bool> real;
    size_t real_count = 0;
    for (size_t i = 0; i < n; ++i) {
      const bool has = t < trajs[i].turns.size() &&
                       trajs[i].turns[t].kind == TurnKind::kQuery;
      if (has) {
        const StepReward& r = trajs[i].turns[t].step_reward;
        members.push_back(i);
        values.push_back(decomposed ? r.total - r.r_outcome_share : r.total);
        real.push_back(true);
        ++real_count;
      } else if (absorbing) {
        members.push_back(i);
        values.push_back(trajs[i].outcome);
        real.push_back(false);
      }
    }
    if (real_count == 0) continue;
    if (values.size() >= 2) {
      const std::vector<double> adv = outcome_group_advantage(values, eps_norm);
      for (size_t m = 0; m < members.size(); ++m) {
        if (real[m]) turn_adv[members[m]][t] = adv[m];
      }
    }
    if (decomposed) {
      for (size_t i : members) turn_adv[i][t] += outcome_adv[i];
    }
  }

  std::vector<std::vector<double>> out(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t t = 0; t < trajs[i].turns.size(); ++t) {
      const Turn& turn = trajs[i].turns[t];
      const double a =
          turn.kind == TurnKind::kQuery ? turn_adv[i][t] : outcome_adv[i];
      out[i].insert(out[i].end(), turn.tokens.size(), a);
    }
  }
  return out;
}

double clipped_objective(std::span<const GroupBatch> batches,
                         const SoftmaxPolicy& policy,
                         const SoftmaxPolicy& ref,
                         const ObjectiveConfig& config,
                         ObjectiveDiagnostics* diagnostics,
                         std::vector<double>* grad) {
  if (grad != nullptr) grad->assign(policy.shape().num_params(), 0.0);
  double objective = 0.0;
  size_t num_traj = 0, tokens = 0, clipped = 0;
  double ratio_sum = 0.0, kl_sum = 0.0;
  for (const GroupBatch& batch : batches) num_traj += batch.trajectories.size();
  if (num_traj == 0) {
    if (diagnostics != nullptr) *diagnostics = {};
    return 0.0;
  }
  const double traj_weight = 1.0 / static_cast<double>(num_traj);
  for (size_t b = 0; b < batches.size(); ++b) {
    const GroupBatch& batch = batches[b];
    for (size_t i = 0; i < batch.trajectories.size(); ++i) {
      const Trajectory& traj = batch.trajectories[i];
      const size_t len = traj.num_policy_tokens();
      if (len == 0) continue;
      if (batch.advantages.size() <= i || batch.advantages[i].size() != len) {
        throw std::invalid_argument("advantages do not match the batch");
      }
      const double w = traj_weight / static_cast<double>(len);
      size_t j = 0;
      for (const Turn& turn : traj.turns) {
        for (const TokenRecord& tok : turn.tokens) {
          const double adv = batch.advantages[i][j];
          const double logp = policy.log_prob(tok.context, tok.action);
          const double ratio = std::exp(logp - tok.logprob_old);
          if (!std::isfinite(ratio)) {
            std::ostringstream msg;
            msg << "non-finite ratio at batch " << b << " trajectory " << i
                << " token " << j << " (logprob_old=" << tok.logprob_old
                << ", logprob=" << logp << ")";
            throw NumericalError(msg.str());
          }
          const double lo = 1.0 - config.eps_clip, hi = 1.0 + config.eps_clip;
          const double clipped_ratio = std::clamp(ratio, lo, hi);
          const double unclipped_term = ratio * adv;
          const double clipped_term = clipped_ratio * adv;
          const bool clip_active = clipped_term < unclipped_term;
          objective += w * std::min(unclipped_term, clipped_term);
          if (ratio < lo || ratio > hi) ++clipped;
          if (grad != nullptr && !clip_active) {
            policy.accumulate_log_prob_grad(tok.context, tok.action,
                                            w * adv * ratio, *grad);
          }
          const double kl = policy.kl(tok.context, ref);
          objective -= w * config.beta * kl;
          if (grad != nullptr && config.beta != 0.0) {
            policy.accumulate_kl_grad(tok.context, ref, -w * config.beta,
                                      *grad);
          }
          ratio_sum += ratio;
          kl_sum += kl;
          ++tokens;
          ++j;
        }
      }
    }
  }
  if (diagnostics != nullptr) {
    diagnostics->tokens = tokens;
    const double denom = tokens == 0 ? 1.0 : static_cast<double>(tokens);
    diagnostics->clip_fraction = static_cast<double>(clipped) / denom;
    diagnostics->mean_ratio = ratio_sum / denom;
    diagnostics->mean_kl = kl_sum / denom;
  }
  return objective;
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + std::string(name) +
                    "' (expected sgd or adam)");
}

const char* optimizer_kind_name(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

void Optimizer::step(std::span<const double> grad, PolicyParams* params) {
  auto& theta = params->values;
  if (grad.size() != theta.size()) {
    throw std::invalid_argument("gradient size mismatch");
  }
  if (config_.kind == OptimizerKind::kSgd) {
    for (size_t i = 0; i < theta.size(); ++i) {
      theta[i] += config_.learning_rate * grad[i];
    }
  } else {
    if (m_.size() != theta.size()) {
      m_.assign(theta.size(), 0.0);
      v_.assign(theta.size(), 0.0);
      t_ = 0;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < theta.size(); ++i) {
      m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
      v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
      const double mhat = m_[i] / c1, vhat = v_[i] / c2;
      theta[i] += config_.learning_rate * mhat /
                  (std::sqrt(vhat) + config_.epsilon);
    }
  }
  ++params->version;
}

PolicyParams policy_update(const SoftmaxPolicy& policy,
                           std::span<const GroupBatch> batches,
                           const SoftmaxPolicy& ref,
                           const ObjectiveConfig& config, Optimizer* optimizer,
                           ObjectiveDiagnostics* diagnostics) {
  std::vector<double> grad;
  clipped_objective(batches, policy, ref, config, diagnostics, &grad);
  for (size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      std::ostringstream msg;
      msg << "non-finite gradient at parameter " << i << "; first entries:";
      for (size_t k = 0; k < std::min<size_t>(grad.size(), 8); ++k) {
        msg << " " << grad[k];
      }
      throw NumericalError(msg.str());
    }
  }
  PolicyParams next = policy.params();
  optimizer->step(grad, &next);
  next.check_finite();
  return next;
}

}  // namespace hyperstep
