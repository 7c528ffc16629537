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

#ifndef HYPERSTEP_POLICY_H_
#define HYPERSTEP_POLICY_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hyperstep {

struct EpisodeState;

// Each agent turn is a short token sequence: an action-type token, an entity
// slot token, and (for queries) a relation slot token. Each token is one
// decision of one head.
enum class Head : int { kType = 0, kEntity = 1, kRelation = 2 };
inline constexpr int kNumHeads = 3;

enum class ActionType : int { kQuery = 0, kAnswer = 1 };

// Sizes that fix the toy policy's feature and action spaces.
struct PolicyShape {
  int max_turns = 4;
  int relations = 2;     // relation slots: one per hop named in the question
  int entity_slots = 3;  // slot 0 = question entity, then latest new entities

  int num_actions(Head head) const;
  int num_features(Head head) const;
  size_t block_offset(Head head) const;
  size_t num_params() const;

  bool operator==(const PolicyShape&) const = default;
};

// Observable features of one decision. Plain data so recorded contexts can be
// re-evaluated under other parameters.
struct DecisionContext {
  Head head = Head::kType;
  int turn = 0;              // 0-based
  int last_relation = -1;    // relation slot of the previous query, -1: none
  bool start_unresolved = true;
  int prev_token = -1;       // chosen type (entity head) or slot (relation head)
  // Entity head only: slots [0, entity_choices) are selectable, the rest are
  // masked out. 0 leaves every slot selectable.
  int entity_choices = 0;

  bool operator==(const DecisionContext&) const = default;
};

// Number of selectable actions of `ctx`: a prefix of the head's actions.
int selectable_actions(const PolicyShape& shape, const DecisionContext& ctx);

// Indices of the active indicator features of `ctx` within its head block.
std::vector<int> active_features(const PolicyShape& shape,
                                 const DecisionContext& ctx);

struct PolicyParams {
  std::vector<double> values;
  uint64_t version = 0;

  // Throws NumericalError naming the first non-finite entry.
  void check_finite() const;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyShape shape() const = 0;
  // Writes the action distribution of `ctx` into `out`
  // (size shape().num_actions(ctx.head)). `state` is the live episode state;
  // learned policies ignore it.
  virtual void distribution(const DecisionContext& ctx,
                            const EpisodeState* state,
                            std::span<double> out) const = 0;
};

// Softmax over linear indicator features, one parameter block per head:
// logits[a] = sum_{f active} theta[f, a] / temperature.
class SoftmaxPolicy : public Policy {
 public:
  SoftmaxPolicy(PolicyShape shape, PolicyParams params,
                double temperature = 1.0);
  // All-zero parameters, i.e. the uniform policy.
  explicit SoftmaxPolicy(PolicyShape shape, double temperature = 1.0);

  PolicyShape shape() const override { return shape_; }
  void distribution(const DecisionContext& ctx, const EpisodeState* state,
                    std::span<double> out) const override;

  const PolicyParams& params() const { return params_; }
  double temperature() const { return temperature_; }

  std::vector<double> probabilities(const DecisionContext& ctx) const;
  double log_prob(const DecisionContext& ctx, int action) const;

  // grad += scale * d log pi(action | ctx) / d theta.
  void accumulate_log_prob_grad(const DecisionContext& ctx, int action,
                                double scale, std::span<double> grad) const;

  // KL(this || ref) at ctx over the full action distribution.
  double kl(const DecisionContext& ctx, const SoftmaxPolicy& ref) const;

  // grad += scale * d KL(this || ref) / d theta.
  void accumulate_kl_grad(const DecisionContext& ctx, const SoftmaxPolicy& ref,
                          double scale, std::span<double> grad) const;

 private:
  void logits(const DecisionContext& ctx, std::span<double> out) const;

  PolicyShape shape_;
  PolicyParams params_;
  double temperature_;
};

// Follows the task's gold chain by entity identity: answers as soon as the
// gold answer occupies a slot, otherwise queries the deepest gold chain
// entity visible in the slots. Certifies that tasks are solvable.
class ScriptedOraclePolicy : public Policy {
 public:
  explicit ScriptedOraclePolicy(PolicyShape shape) : shape_(shape) {}

  PolicyShape shape() const override { return shape_; }
  void distribution(const DecisionContext& ctx, const EpisodeState* state,
                    std::span<double> out) const override;

 private:
  PolicyShape shape_;
};

}  // namespace hyperstep

#endif  // HYPERSTEP_POLICY_H_
