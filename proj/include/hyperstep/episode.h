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

#ifndef HYPERSTEP_EPISODE_H_
#define HYPERSTEP_EPISODE_H_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hyperstep/hypergraph.h"
#include "hyperstep/policy.h"
#include "hyperstep/retrieval.h"

namespace hyperstep {

inline constexpr EntityId kNoEntity = std::numeric_limits<EntityId>::max();

// A multi-hop question over a synthetic corpus.
struct SyntheticTask {
  int id = 0;
  std::string question;
  EntityId start_entity = 0;
  EntityId gold_answer = 0;
  std::string gold_answer_text;
  // chain_entities[0] is the start entity, the last one the answer.
  std::vector<EntityId> chain_entities;
  // gold_chain[j] links chain_entities[j] and chain_entities[j + 1].
  std::vector<EdgeId> gold_chain;
  // Relation phrase of each hop, in question order.
  std::vector<std::string> relations;
};

struct EnvConfig {
  RetrievalMode mode = RetrievalMode::kInformativeness;
  int k = 2;
  int max_turns = 4;
  int entity_slots = 3;
};

enum class TerminatedBy { kNone, kAnswer, kMaxTurns, kMalformed };

const char* terminated_by_name(TerminatedBy t);

// Snapshot of a running episode. A plain value: copying it is the snapshot
// and assigning it back is the restore.
struct EpisodeState {
  const SyntheticTask* task = nullptr;
  // Accumulated state text s_{<t}: question, queries, retrieved knowledge.
  std::string text;
  // The question followed by every query issued so far.
  std::string query_log;
  int turn = 0;  // completed turns
  // Entities surfaced so far, in order of appearance.
  std::vector<EntityId> known;
  // Entity slots visible to the policy; kNoEntity marks an empty slot.
  std::vector<EntityId> slots;
  int last_relation = -1;
  bool start_unresolved = true;
  bool done = false;
  TerminatedBy terminated_by = TerminatedBy::kNone;
  EntityId answer = kNoEntity;
  bool well_formed = true;

  bool operator==(const EpisodeState&) const = default;
};

struct CompositeAction {
  ActionType type = ActionType::kAnswer;
  int entity_slot = 0;
  int relation_slot = -1;  // queries only
};

}  // namespace hyperstep

#endif  // HYPERSTEP_EPISODE_H_
