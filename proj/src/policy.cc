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

#include "hyperstep/policy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hyperstep/episode.h"
#include "hyperstep/errors.h"

namespace hyperstep {

namespace {

int base_features(const PolicyShape& shape) {
  // bias + turn one-hot + last relation one-hot (incl. none) + unresolved bit.
  return 1 + shape.max_turns + (shape.relations + 1) + 2;
}

}  // namespace

int PolicyShape::num_actions(Head head) const {
  switch (head) {
    case Head::kType: return 2;
    case Head::kEntity: return entity_slots;
    case Head::kRelation: return relations;
  }
  return 0;
}

int PolicyShape::num_features(Head head) const {
  switch (head) {
    case Head::kType: return base_features(*this);
    case Head::kEntity: return base_features(*this) + 2;
    case Head::kRelation: return base_features(*this) + entity_slots;
  }
  return 0;
}

size_t PolicyShape::block_offset(Head head) const {
  size_t offset = 0;
  for (int h = 0; h < static_cast<int>(head); ++h) {
    offset += static_cast<size_t>(num_features(static_cast<Head>(h))) *
              num_actions(static_cast<Head>(h));
  }
  return offset;
}

size_t PolicyShape::num_params() const {
  return block_offset(Head::kRelation) +
         static_cast<size_t>(num_features(Head::kRelation)) *
             num_actions(Head::kRelation);
}

int selectable_actions(const PolicyShape& shape, const DecisionContext& ctx) {
  const int actions = shape.num_actions(ctx.head);
  if (ctx.head != Head::kEntity || ctx.entity_choices <= 0) return actions;
  return std::min(ctx.entity_choices, actions);
}

std::vector<int> active_features(const PolicyShape& shape,
                                 const DecisionContext& ctx) {
  std::vector<int> f;
  f.reserve(5);
  f.push_back(0);
  const int turn = std::clamp(ctx.turn, 0, shape.max_turns - 1);
  f.push_back(1 + turn);
  const int rel = std::clamp(ctx.last_relation, -1, shape.relations - 1);
  f.push_back(1 + shape.max_turns + (rel + 1));
  f.push_back(1 + shape.max_turns + shape.relations + 1 +
              (ctx.start_unresolved ? 1 : 0));
  const int base = base_features(shape);
  if (ctx.head == Head::kEntity) {
    f.push_back(base + std::clamp(ctx.prev_token, 0, 1));
  } else if (ctx.head == Head::kRelation) {
    f.push_back(base + std::clamp(ctx.prev_token, 0, shape.entity_slots - 1));
  }
  return f;
}

void PolicyParams::check_finite() const {
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericalError("policy parameter " + std::to_string(i) +
                           " is not finite (version " +
                           std::to_string(version) + ")");
    }
  }
}

SoftmaxPolicy::SoftmaxPolicy(PolicyShape shape, PolicyParams params,
                             double temperature)
    : shape_(shape), params_(std::move(params)), temperature_(temperature) {
  if (params_.values.size() != shape_.num_params()) {
    throw std::invalid_argument(
        "SoftmaxPolicy: expected " + std::to_string(shape_.num_params()) +
        " parameters, got " + std::to_string(params_.values.size()));
  }
  if (!(temperature_ > 0.0)) {
    throw std::invalid_argument("SoftmaxPolicy: temperature must be > 0");
  }
  params_.check_finite();
}

SoftmaxPolicy::SoftmaxPolicy(PolicyShape shape, double temperature)
    : SoftmaxPolicy(shape,
                    PolicyParams{std::vector<double>(shape.num_params(), 0.0),
                                 0},
                    temperature) {}

void SoftmaxPolicy::logits(const DecisionContext& ctx,
                           std::span<double> out) const {
  const int actions = shape_.num_actions(ctx.head);
  const size_t offset = shape_.block_offset(ctx.head);
  std::fill(out.begin(), out.begin() + actions, 0.0);
  for (int f : active_features(shape_, ctx)) {
    const double* row = &params_.values[offset + static_cast<size_t>(f) * actions];
    for (int a = 0; a < actions; ++a) out[a] += row[a];
  }
  for (int a = 0; a < actions; ++a) out[a] /= temperature_;
}

void SoftmaxPolicy::distribution(const DecisionContext& ctx,
                                 const EpisodeState* /*state*/,
                                 std::span<double> out) const {
  const int actions = shape_.num_actions(ctx.head);
  const int live = selectable_actions(shape_, ctx);
  logits(ctx, out);
  double max_logit = out[0];
  for (int a = 1; a < live; ++a) max_logit = std::max(max_logit, out[a]);
  double total = 0.0;
  for (int a = 0; a < live; ++a) {
    out[a] = std::exp(out[a] - max_logit);
    total += out[a];
  }
  for (int a = 0; a < live; ++a) out[a] /= total;
  for (int a = live; a < actions; ++a) out[a] = 0.0;
}

std::vector<double> SoftmaxPolicy::probabilities(
    const DecisionContext& ctx) const {
  std::vector<double> p(shape_.num_actions(ctx.head));
  distribution(ctx, nullptr, p);
  return p;
}

double SoftmaxPolicy::log_prob(const DecisionContext& ctx, int action) const {
  const int live = selectable_actions(shape_, ctx);
  if (action < 0 || action >= live) {
    return -std::numeric_limits<double>::infinity();
  }
  std::vector<double> z(shape_.num_actions(ctx.head));
  logits(ctx, z);
  const double max_logit = *std::max_element(z.begin(), z.begin() + live);
  double total = 0.0;
  for (int a = 0; a < live; ++a) total += std::exp(z[a] - max_logit);
  return z[action] - max_logit - std::log(total);
}

void SoftmaxPolicy::accumulate_log_prob_grad(const DecisionContext& ctx,
                                             int action, double scale,
                                             std::span<double> grad) const {
  const int actions = shape_.num_actions(ctx.head);
  const size_t offset = shape_.block_offset(ctx.head);
  const std::vector<double> p = probabilities(ctx);
  for (int f : active_features(shape_, ctx)) {
    double* row = &grad[offset + static_cast<size_t>(f) * actions];
    for (int b = 0; b < actions; ++b) {
      row[b] += scale * ((b == action ? 1.0 : 0.0) - p[b]) / temperature_;
    }
  }
}

double SoftmaxPolicy::kl(const DecisionContext& ctx,
                         const SoftmaxPolicy& ref) const {
  const std::vector<double> p = probabilities(ctx);
  const std::vector<double> q = ref.probabilities(ctx);
  double total = 0.0;
  for (size_t a = 0; a < p.size(); ++a) {
    if (p[a] > 0.0) total += p[a] * (std::log(p[a]) - std::log(q[a]));
  }
  return total;
}

void SoftmaxPolicy::accumulate_kl_grad(const DecisionContext& ctx,
                                       const SoftmaxPolicy& ref, double scale,
                                       std::span<double> grad) const {
  const int actions = shape_.num_actions(ctx.head);
  const size_t offset = shape_.block_offset(ctx.head);
  const std::vector<double> p = probabilities(ctx);
  const std::vector<double> q = ref.probabilities(ctx);
  std::vector<double> log_ratio(actions);
  double kl_value = 0.0;
  for (int a = 0; a < actions; ++a) {
    log_ratio[a] = p[a] > 0.0 ? std::log(p[a]) - std::log(q[a]) : 0.0;
    kl_value += p[a] * log_ratio[a];
  }
  // dKL/dz_b = p_b (log(p_b / q_b) - KL).
  for (int f : active_features(shape_, ctx)) {
    double* row = &grad[offset + static_cast<size_t>(f) * actions];
    for (int b = 0; b < actions; ++b) {
      row[b] += scale * p[b] * (log_ratio[b] - kl_value) / temperature_;
    }
  }
}

void ScriptedOraclePolicy::distribution(const DecisionContext& ctx,
                                        const EpisodeState* state,
                                        std::span<double> out) const {
  if (state == nullptr || state->task == nullptr) {
    throw std::invalid_argument("ScriptedOraclePolicy needs the live state");
  }
  const SyntheticTask& task = *state->task;
  const int actions = shape_.num_actions(ctx.head);
  std::fill(out.begin(), out.begin() + actions, 0.0);

  auto slot_of = [&](EntityId id) -> int {
    for (size_t s = 0; s < state->slots.size(); ++s) {
      if (state->slots[s] == id) return static_cast<int>(s);
    }
    return -1;
  };
  // Plan: answer if visible, else query the deepest visible chain entity.
  ActionType type = ActionType::kAnswer;
  int slot = slot_of(task.gold_answer);
  int relation = 0;
  if (slot < 0) {
    slot = 0;
    const int hops = static_cast<int>(task.chain_entities.size()) - 1;
    for (int j = hops - 1; j >= 0; --j) {
      int s = slot_of(task.chain_entities[j]);
      if (s >= 0) {
        type = ActionType::kQuery;
        slot = s;
        relation = std::min(j, shape_.relations - 1);
        break;
      }
    }
  }
  switch (ctx.head) {
    case Head::kType: out[static_cast<int>(type)] = 1.0; break;
    case Head::kEntity: out[slot] = 1.0; break;
    case Head::kRelation: out[relation] = 1.0; break;
  }
}

}  // namespace hyperstep
