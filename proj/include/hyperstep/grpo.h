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

#ifndef HYPERSTEP_GRPO_H_
#define HYPERSTEP_GRPO_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hyperstep/environment.h"
#include "hyperstep/policy.h"
#include "hyperstep/step_reward.h"
#include "hyperstep/trajectory.h"

namespace hyperstep {

// N rollouts of one question. Rollout i uses stream derive_seed(seed, i) and
// may run on any of `threads` workers. Rollouts that throw are dropped and
// described in `excluded`; fewer than two survivors is an error.
GroupBatch sample_group(const Environment& env, const Policy& policy,
                        const SyntheticTask& task, int n, uint64_t seed,
                        int threads = 1,
                        std::vector<std::string>* excluded = nullptr);

// Fills outcome and per-query-turn step rewards of every trajectory.
// Certainty is estimated under `policy` (the sampling policy) and skipped
// when lambda1 is zero. The question-only baseline is estimated once per
// group and later estimates chain, so per-trajectory progress telescopes.
void compute_step_rewards(GroupBatch* batch, const Environment& env,
                          const Policy& policy, const RewardConfig& config,
                          uint64_t seed);

// (R_i - mean) / max(population std, eps_norm).
std::vector<double> outcome_group_advantage(std::span<const double> rewards,
                                            double eps_norm);

// How query-turn step rewards become advantages when the outcome is part of
// every step's reward. Without the outcome in every step both reduce to
// per-turn standardization over the trajectories that have a query turn t,
// with singleton groups getting 0.
enum class StepAdvantageMode {
  // Trajectories lacking a query turn t join the turn-t statistics with
  // their outcome, the value their absorbed trajectory carries.
  kAbsorbing,
  // Outcome advantage plus the per-turn standardized remainder R_t - outcome.
  kDecomposed,
};

StepAdvantageMode parse_step_advantage_mode(std::string_view name);
const char* step_advantage_mode_name(StepAdvantageMode mode);

// Per-token advantages in the layout of GroupBatch::advantages. Answer and
// malformed turns receive the outcome advantage.
std::vector<std::vector<double>> step_modulated_advantage(
    const GroupBatch& batch, bool outcome_in_every_step, double eps_norm,
    StepAdvantageMode mode = StepAdvantageMode::kAbsorbing);

struct ObjectiveConfig {
  double eps_clip = 0.2;
  double beta = 1e-3;
};

struct ObjectiveDiagnostics {
  double clip_fraction = 0.0;
  double mean_ratio = 0.0;
  double mean_kl = 0.0;
  size_t tokens = 0;
};

// Mean over trajectories of the per-token clipped surrogate averaged over
// that trajectory's policy tokens, minus beta times the per-token exact KL to
// `ref` averaged the same way. Old log-probabilities come from the records.
// When `grad` is non-null it receives the gradient with respect to the
// parameters of `policy` (resized as needed).
double clipped_objective(std::span<const GroupBatch> batches,
                         const SoftmaxPolicy& policy,
                         const SoftmaxPolicy& ref,
                         const ObjectiveConfig& config,
                         ObjectiveDiagnostics* diagnostics,
                         std::vector<double>* grad);

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

OptimizerKind parse_optimizer_kind(std::string_view name);
const char* optimizer_kind_name(OptimizerKind kind);

// Gradient ascent with persistent moment estimates.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config) : config_(config) {}
  void step(std::span<const double> grad, PolicyParams* params);
  const OptimizerConfig& config() const { return config_; }

 private:
  OptimizerConfig config_;
  std::vector<double> m_, v_;
  int64_t t_ = 0;
};

// One ascent step on the clipped objective. Throws NumericalError with a
// dump of the offending entries on a non-finite gradient or result.
PolicyParams policy_update(const SoftmaxPolicy& policy,
                           std::span<const GroupBatch> batches,
                           const SoftmaxPolicy& ref,
                           const ObjectiveConfig& config, Optimizer* optimizer,
                           ObjectiveDiagnostics* diagnostics = nullptr);

}  // namespace hyperstep

#endif  // HYPERSTEP_GRPO_H_
