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

#include "hyperstep/environment.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string_view>
#include <utility>

#include "hyperstep/errors.h"
#include "hyperstep/qa_metrics.h"
#include "json.hpp"

namespace hyperstep {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::array<std::string_view, 16> kFamilies = {
    "Ashford", "Blackwood", "Carrow",  "Dunmore", "Everly", "Fairbank",
    "Greystone", "Holloway", "Ingram", "Jessop",  "Kestrel", "Lockhart",
    "Merriwether", "Northcott", "Oakhurst", "Pemberton"};

constexpr std::array<std::string_view, 6> kInstitutions = {
    "Guild", "Archive", "Council", "Institute", "Society", "Academy"};

constexpr std::array<std::string_view, 8> kRelations = {
    "mentor", "birthplace", "employer", "founder",
    "rival",  "spouse",     "publisher", "patron"};

constexpr std::array<std::string_view, 4> kFillers = {
    "", "", " reportedly", " as noted in early records"};

std::string edge_key(const Hyperedge& e) {
  return e.external_id ? *e.external_id : std::to_string(e.id);
}

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::string given_name(uint64_t index) {
  // Two consonant-vowel syllables, capitalized.
  const uint64_t syllables = kConsonants.size() * kVowels.size();
  std::string out;
  for (uint64_t part : {index / syllables, index % syllables}) {
    out += kConsonants[part / kVowels.size()];
    out += kVowels[part % kVowels.size()];
  }
  out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

constexpr uint64_t kGivenNameSpace = 14 * 5 * 14 * 5;

// Streams of the corpus seed.
enum Stream : uint64_t {
  kChainStream = 1,
  kDecoyStream = 2,
};

struct ChainPlan {
  std::vector<std::string> names;    // chain entity names, start first
  std::vector<int> families;         // family index per chain entity
  std::vector<int> relations;        // relation index per hop
  std::vector<FactRecord> gold;      // gold record per hop
  std::vector<FactRecord> decoys;
};

std::string hub_name(int family, int hub) {
  return std::string(kFamilies[family]) + " " +
         std::string(kInstitutions[hub]);
}

std::string render_question(const ChainPlan& plan) {
  std::string q = "What is the";
  for (int j = static_cast<int>(plan.relations.size()) - 1; j >= 0; --j) {
    q += " ";
    q += kRelations[plan.relations[j]];
    q += " of";
    if (j > 0) q += " the";
  }
  q += " " + plan.names[0] + "?";
  return q;
}

void sample_decoys(const CorpusSpec& spec, ChainPlan* plan, Rng* rng) {
  plan->decoys.clear();
  std::set<std::pair<std::string, std::string>> seen;
  const int hops = static_cast<int>(plan->relations.size());
  for (int d = 0; d < spec.distractors_per_chain; ++d) {
    for (int attempt = 0; attempt < 16; ++attempt) {
      const int j = static_cast<int>(rng->below(hops));
      const int family = plan->families[j];
      const int hub = static_cast<int>(rng->below(spec.hubs_per_family));
      int relation = plan->relations[j];
      if (!rng->bernoulli(spec.same_relation_rate)) {
        relation = static_cast<int>(
            (relation + 1 + rng->below(kRelations.size() - 1)) %
            kRelations.size());
      }
      const std::string hub_text = hub_name(family, hub);
      const std::string text = plan->names[j] + " " +
                               std::string(kRelations[relation]) + " " +
                               hub_text +
                               std::string(kFillers[rng->below(kFillers.size())]);
      if (!seen.insert({plan->names[j], text}).second) continue;
      FactRecord r;
      r.text = text;
      r.entities = {plan->names[j], hub_text};
      plan->decoys.push_back(std::move(r));
      break;
    }
  }
}

std::vector<FactRecord> assemble_records(const std::vector<ChainPlan>& plans) {
  // Gold facts first, deepest hop first, so score ties favour deeper hops.
  std::vector<FactRecord> records;
  for (const ChainPlan& plan : plans) {
    for (auto it = plan.gold.rbegin(); it != plan.gold.rend(); ++it) {
      records.push_back(*it);
    }
  }
  for (const ChainPlan& plan : plans) {
    records.insert(records.end(), plan.decoys.begin(), plan.decoys.end());
  }
  for (size_t i = 0; i < records.size(); ++i) {
    records[i].edge_id = "f" + std::to_string(i);
    records[i].line = i + 1;
  }
  return records;
}

std::vector<SyntheticTask> resolve_tasks(const KnowledgeHypergraph& graph,
                                         const std::vector<ChainPlan>& plans) {
  std::vector<SyntheticTask> tasks;
  for (size_t c = 0; c < plans.size(); ++c) {
    const ChainPlan& plan = plans[c];
    SyntheticTask task;
    task.id = static_cast<int>(c);
    task.question = render_question(plan);
    for (const std::string& name : plan.names) {
      auto id = graph.find_entity(name);
      if (!id) throw DataError("generated entity missing: " + name);
      task.chain_entities.push_back(*id);
    }
    for (size_t j = 0; j < plan.gold.size(); ++j) {
      const std::set<EntityId> want = {task.chain_entities[j],
                                       task.chain_entities[j + 1]};
      bool found = false;
      for (EdgeId e : graph.incidence(task.chain_entities[j])) {
        const Hyperedge& edge = graph.edge(e);
        if (edge.text == plan.gold[j].text &&
            std::set<EntityId>(edge.entity_ids.begin(),
                               edge.entity_ids.end()) == want) {
          task.gold_chain.push_back(e);
          found = true;
          break;
        }
      }
      if (!found) throw DataError("generated gold fact missing");
      task.relations.emplace_back(kRelations[plan.relations[j]]);
    }
    task.start_entity = task.chain_entities.front();
    task.gold_answer = task.chain_entities.back();
    task.gold_answer_text = graph.entity(task.gold_answer).name;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

// The scripted oracle must answer correctly after exactly one query per hop,
// so no task can be short-circuited by a hop surfacing the answer early.
bool solvable_in_full_hops(const Environment& env, const SyntheticTask& task) {
  ScriptedOraclePolicy oracle(env.policy_shape());
  EpisodeState end = continue_episode(env, oracle, env.reset(task), nullptr,
                                      true);
  return end.terminated_by == TerminatedBy::kAnswer &&
         end.answer == task.gold_answer &&
         end.turn == static_cast<int>(task.gold_chain.size()) + 1;
}

}  // namespace

SyntheticCorpus generate_corpus(const CorpusSpec& spec,
                                const EmbeddingProvider& provider) {
  if (spec.hops < 1) throw ConfigError("corpus.hops must be >= 1");
  if (spec.n_chains < 1) throw ConfigError("corpus.n_chains must be >= 1");
  if (spec.distractors_per_chain < 0) {
    throw ConfigError("corpus.distractors_per_chain must be >= 0");
  }
  if (spec.hops > static_cast<int>(kRelations.size())) {
    throw ConfigError("corpus.hops exceeds the relation vocabulary (" +
                      std::to_string(kRelations.size()) + ")");
  }
  if (spec.families < 2 || spec.families > static_cast<int>(kFamilies.size())) {
    throw ConfigError("corpus.families must be in [2, " +
                      std::to_string(kFamilies.size()) + "]");
  }
  if (spec.hubs_per_family < 1 ||
      spec.hubs_per_family > static_cast<int>(kInstitutions.size())) {
    throw ConfigError("corpus.hubs_per_family must be in [1, " +
                      std::to_string(kInstitutions.size()) + "]");
  }
  if (spec.same_relation_rate < 0.0 || spec.same_relation_rate > 1.0) {
    throw ConfigError("corpus.same_relation_rate must be in [0, 1]");
  }
  if (spec.solvable_k < 1) throw ConfigError("corpus.solvable_k must be >= 1");
  const int64_t chain_entities =
      static_cast<int64_t>(spec.n_chains) * (spec.hops + 1);
  const int64_t hubs = spec.distractors_per_chain > 0
                           ? static_cast<int64_t>(spec.families) *
                                 spec.hubs_per_family
                           : 0;
  if (chain_entities + hubs > spec.n_entities) {
    throw ConfigError(
        "infeasible corpus: n_chains * (hops + 1) + hub entities = " +
        std::to_string(chain_entities + hubs) + " exceeds n_entities = " +
        std::to_string(spec.n_entities));
  }
  if (chain_entities > static_cast<int64_t>(kGivenNameSpace)) {
    throw ConfigError("infeasible corpus: more chain entities than names (" +
                      std::to_string(kGivenNameSpace) + ")");
  }

  Rng chain_rng(derive_seed(spec.seed, kChainStream));
  std::set<uint64_t> used_given;
  std::vector<ChainPlan> plans(spec.n_chains);
  for (ChainPlan& plan : plans) {
    int prev_family = -1;
    for (int j = 0; j <= spec.hops; ++j) {
      uint64_t g;
      do {
        g = chain_rng.below(kGivenNameSpace);
      } while (!used_given.insert(g).second);
      int family;
      do {
        family = static_cast<int>(chain_rng.below(spec.families));
      } while (family == prev_family);
      prev_family = family;
      plan.names.push_back(given_name(g) + " " +
                           std::string(kFamilies[family]));
      plan.families.push_back(family);
    }
    // Distinct relation per hop keeps hop queries distinguishable.
    std::vector<int> pool(kRelations.size());
    for (size_t r = 0; r < pool.size(); ++r) pool[r] = static_cast<int>(r);
    for (int j = 0; j < spec.hops; ++j) {
      const size_t pick = j + chain_rng.below(pool.size() - j);
      std::swap(pool[j], pool[pick]);
      plan.relations.push_back(pool[j]);
    }
    for (int j = 0; j < spec.hops; ++j) {
      FactRecord r;
      r.text = plan.names[j] + " " + std::string(kRelations[plan.relations[j]]) +
               " " + plan.names[j + 1] +
               std::string(kFillers[chain_rng.below(kFillers.size())]);
      r.entities = {plan.names[j], plan.names[j + 1]};
      plan.gold.push_back(std::move(r));
    }
  }

  std::vector<bool> settled(plans.size(), false);
  constexpr int kMaxRounds = 64;
  for (int round = 0; round <= kMaxRounds; ++round) {
    for (size_t c = 0; c < plans.size(); ++c) {
      if (settled[c]) continue;
      if (round == kMaxRounds) {
        plans[c].decoys.clear();  // last resort: an unambiguous chain
        continue;
      }
      Rng rng(derive_seed(derive_seed(spec.seed, kDecoyStream),
                          static_cast<uint64_t>(round) * plans.size() + c));
      sample_decoys(spec, &plans[c], &rng);
    }
    std::vector<FactRecord> records = assemble_records(plans);
    KnowledgeHypergraph graph = ingest_facts(records);
    std::vector<SyntheticTask> tasks = resolve_tasks(graph, plans);
    if (!spec.certify) {
      return SyntheticCorpus{std::move(records), std::move(graph),
                             std::move(tasks)};
    }
    Retriever retriever(graph, provider);
    Environment env(retriever,
                    {RetrievalMode::kInformativeness, spec.solvable_k,
                     spec.hops + 1, 3},
                    spec.hops);
    bool all = true;
    for (size_t c = 0; c < plans.size(); ++c) {
      settled[c] = solvable_in_full_hops(env, tasks[c]);
      all = all && settled[c];
    }
    if (all) {
      SyntheticCorpus corpus{std::move(records), std::move(graph),
                             std::move(tasks)};
      // Tasks hold ids only, so they stay valid after the graph moves.
      return corpus;
    }
    if (round == kMaxRounds) {
      throw ConfigError(
          "infeasible corpus: some chain cannot be solved in exactly " +
          std::to_string(spec.hops + 1) + " turns at solvable_k = " +
          std::to_string(spec.solvable_k) + " after " +
          std::to_string(kMaxRounds) + " decoy resampling rounds");
    }
  }
  throw ConfigError("unreachable");
}

CorpusCheck validate_tasks(const KnowledgeHypergraph& graph,
                           std::span<const SyntheticTask> tasks) {
  CorpusCheck check;
  auto fail = [&](const SyntheticTask& t, const std::string& what) {
    check.ok = false;
    check.problems.push_back("task " + std::to_string(t.id) + ": " + what);
  };
  auto contains = [&](EdgeId e, EntityId v) {
    const auto& ids = graph.edge(e).entity_ids;
    return std::find(ids.begin(), ids.end(), v) != ids.end();
  };
  for (const SyntheticTask& t : tasks) {
    if (t.gold_chain.empty()) {
      fail(t, "empty gold chain");
      continue;
    }
    bool in_range = true;
    for (EdgeId e : t.gold_chain) in_range = in_range && e < graph.edges().size();
    if (!in_range || t.start_entity >= graph.entities().size() ||
        t.gold_answer >= graph.entities().size()) {
      fail(t, "id out of range");
      continue;
    }
    if (!contains(t.gold_chain.front(), t.start_entity)) {
      fail(t, "first edge lacks the start entity");
    }
    if (!contains(t.gold_chain.back(), t.gold_answer)) {
      fail(t, "last edge lacks the answer");
    }
    for (size_t j = 1; j < t.gold_chain.size(); ++j) {
      const auto& a = graph.edge(t.gold_chain[j - 1]).entity_ids;
      bool shared = false;
      for (EntityId v : a) shared = shared || contains(t.gold_chain[j], v);
      if (!shared) fail(t, "edges " + std::to_string(j - 1) + " and " +
                               std::to_string(j) + " share no entity");
    }
    if (graph.entity(t.gold_answer).name != t.gold_answer_text) {
      fail(t, "answer text differs from the answer entity name");
    }
    if (t.question.find(graph.entity(t.start_entity).name) ==
        std::string::npos) {
      fail(t, "question does not mention the start entity");
    }
  }
  return check;
}

void write_tasks_jsonl(const KnowledgeHypergraph& graph,
                       std::span<const SyntheticTask> tasks,
                       std::ostream& out) {
  for (const SyntheticTask& t : tasks) {
    Json j;
    j["id"] = t.id;
    j["question"] = t.question;
    j["answer"] = t.gold_answer_text;
    Json chain = Json::array();
    for (EntityId v : t.chain_entities) chain.push_back(graph.entity(v).name);
    j["chain_entities"] = chain;
    Json edges = Json::array();
    for (EdgeId e : t.gold_chain) edges.push_back(edge_key(graph.edge(e)));
    j["gold_chain"] = edges;
    j["relations"] = t.relations;
    out << j.dump() << "\n";
  }
}

std::vector<SyntheticTask> read_tasks_jsonl(const KnowledgeHypergraph& graph,
                                            std::istream& in) {
  std::unordered_map<std::string, EdgeId> by_external;
  for (const Hyperedge& e : graph.edges()) by_external[edge_key(e)] = e.id;
  std::vector<SyntheticTask> tasks;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "tasks line " + std::to_string(lineno) + ": ";
    try {
      Json j = Json::parse(line);
      SyntheticTask t;
      t.id = j.at("id").get<int>();
      t.question = j.at("question").get<std::string>();
      t.gold_answer_text = j.at("answer").get<std::string>();
      for (const auto& name : j.at("chain_entities")) {
        auto id = graph.find_entity(name.get<std::string>());
        if (!id) throw DataError(where + "unknown entity " + name.dump());
        t.chain_entities.push_back(*id);
      }
      for (const auto& ext : j.at("gold_chain")) {
        auto it = by_external.find(ext.get<std::string>());
        if (it == by_external.end()) {
          throw DataError(where + "unknown edge " + ext.dump());
        }
        t.gold_chain.push_back(it->second);
      }
      t.relations = j.at("relations").get<std::vector<std::string>>();
      if (t.chain_entities.size() != t.gold_chain.size() + 1 ||
          t.relations.size() != t.gold_chain.size()) {
        throw DataError(where + "inconsistent chain lengths");
      }
      t.start_entity = t.chain_entities.front();
      t.gold_answer = t.chain_entities.back();
      tasks.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + e.what());
    }
  }
  return tasks;
}

const char* terminated_by_name(TerminatedBy t) {
  switch (t) {
    case TerminatedBy::kNone: return "none";
    case TerminatedBy::kAnswer: return "answer";
    case TerminatedBy::kMaxTurns: return "max_turns";
    case TerminatedBy::kMalformed: return "malformed";
  }
  return "none";
}

Environment::Environment(const Retriever& retriever, EnvConfig config,
                         int relations)
    : retriever_(retriever), config_(config), relations_(relations) {
  if (config_.k < 1) throw ConfigError("retrieval.k must be >= 1");
  if (config_.max_turns < 1) throw ConfigError("max_turns must be >= 1");
  if (config_.entity_slots < 2) throw ConfigError("entity_slots must be >= 2");
  if (relations_ < 1) throw ConfigError("relation slots must be >= 1");
}

PolicyShape Environment::policy_shape() const {
  return PolicyShape{config_.max_turns, relations_, config_.entity_slots};
}

EpisodeState Environment::reset(const SyntheticTask& task) const {
  EpisodeState s;
  s.task = &task;
  s.text = "<question>" + task.question + "</question>";
  s.query_log = task.question;
  s.known = {task.start_entity};
  s.slots.assign(config_.entity_slots, kNoEntity);
  s.slots[0] = task.start_entity;
  return s;
}

std::string Environment::render_query(const EpisodeState& state,
                                      int entity_slot,
                                      int relation_slot) const {
  return graph().entity(state.slots.at(entity_slot)).name + " " +
         state.task->relations.at(relation_slot);
}

std::shared_ptr<const RetrievedFactSet> Environment::retrieve(
    const std::string& query_text) const {
  {
    std::shared_lock lock(cache_mutex_);
    auto it = cache_.find(query_text);
    if (it != cache_.end()) return it->second;
  }
  RetrievalQuery q;
  q.text = query_text;
  q.k = config_.k;
  auto result = std::make_shared<const RetrievedFactSet>(
      retriever_.retrieve(q, config_.mode));
  std::unique_lock lock(cache_mutex_);
  return cache_.emplace(query_text, std::move(result)).first->second;
}

StepResult Environment::step_episode(const EpisodeState& state,
                                     const CompositeAction& action) const {
  if (state.done) throw std::logic_error("step on a finished episode");
  StepResult result;
  EpisodeState& s = result.state;
  s = state;
  s.turn += 1;
  const bool slot_ok = action.entity_slot >= 0 &&
                       action.entity_slot < config_.entity_slots &&
                       state.slots[action.entity_slot] != kNoEntity;
  const int relations =
      std::min<int>(relations_, static_cast<int>(state.task->relations.size()));
  if (!slot_ok || (action.type == ActionType::kQuery &&
                   (action.relation_slot < 0 ||
                    action.relation_slot >= relations))) {
    s.done = true;
    s.well_formed = false;
    s.terminated_by = TerminatedBy::kMalformed;
    result.done = true;
    return result;
  }
  const EntityId entity = state.slots[action.entity_slot];
  if (action.type == ActionType::kAnswer) {
    s.text += " <answer>" + graph().entity(entity).name + "</answer>";
    s.answer = entity;
    s.done = true;
    s.terminated_by = TerminatedBy::kAnswer;
    result.done = true;
    return result;
  }
  result.query_text = render_query(state, action.entity_slot,
                                   action.relation_slot);
  result.retrieved = retrieve(result.query_text);
  s.text += " <query>" + result.query_text + "</query> <knowledge>";
  s.query_log += " | " + result.query_text;
  std::vector<EntityId> fresh;
  for (size_t i = 0; i < result.retrieved->facts.size(); ++i) {
    const RetrievedFact& f = result.retrieved->facts[i];
    if (i > 0) s.text += " | ";
    s.text += f.text;
    for (EntityId v : f.entity_ids) {
      if (std::find(s.known.begin(), s.known.end(), v) == s.known.end()) {
        s.known.push_back(v);
        fresh.push_back(v);
      }
    }
  }
  s.text += "</knowledge>";
  std::fill(s.slots.begin() + 1, s.slots.end(), kNoEntity);
  for (size_t i = 0; i < fresh.size() && i + 1 < s.slots.size(); ++i) {
    s.slots[i + 1] = fresh[i];
  }
  s.last_relation = action.relation_slot;
  if (entity == state.task->start_entity) s.start_unresolved = false;
  if (s.turn >= config_.max_turns) {
    s.done = true;
    s.well_formed = false;
    s.terminated_by = TerminatedBy::kMaxTurns;
  }
  result.done = s.done;
  return result;
}

DecisionContext Environment::context(const EpisodeState& state, Head head,
                                     int prev_token) const {
  DecisionContext ctx;
  ctx.head = head;
  ctx.turn = std::min(state.turn, config_.max_turns - 1);
  ctx.last_relation = state.last_relation;
  ctx.start_unresolved = state.start_unresolved;
  ctx.prev_token = prev_token;
  if (head == Head::kEntity) {
    ctx.entity_choices = static_cast<int>(
        std::find(state.slots.begin(), state.slots.end(), kNoEntity) -
        state.slots.begin());
  }
  return ctx;
}

namespace {

int choose(const Policy& policy, const DecisionContext& ctx,
           const EpisodeState& state, Rng* rng, bool greedy,
           double* logprob) {
  const int n = policy.shape().num_actions(ctx.head);
  std::vector<double> p(n);
  policy.distribution(ctx, &state, p);
  size_t a;
  if (greedy) {
    a = static_cast<size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  } else {
    if (rng == nullptr) throw std::invalid_argument("sampling needs an rng");
    a = rng->categorical(p);
  }
  *logprob = std::log(p[a]);
  return static_cast<int>(a);
}

}  // namespace

StepResult play_turn(const Environment& env, const Policy& policy,
                     const EpisodeState& state, Rng* rng, bool greedy,
                     Turn* record) {
  CompositeAction action;
  std::vector<TokenRecord> tokens;
  auto decide = [&](Head head, int prev) {
    DecisionContext ctx = env.context(state, head, prev);
    double lp = 0.0;
    int a = choose(policy, ctx, state, rng, greedy, &lp);
    tokens.push_back({ctx, a, lp});
    return a;
  };
  action.type = static_cast<ActionType>(decide(Head::kType, -1));
  action.entity_slot = decide(Head::kEntity, static_cast<int>(action.type));
  if (action.type == ActionType::kQuery) {
    action.relation_slot = decide(Head::kRelation, action.entity_slot);
  }
  StepResult result = env.step_episode(state, action);
  if (record != nullptr) {
    record->turn_index = state.turn + 1;
    record->tokens = std::move(tokens);
    record->query_text = result.query_text;
    record->retrieved = result.retrieved;
    record->prior_state_text = state.text;
    record->prior_query_log = state.query_log;
    record->state_after = result.state;
    if (result.state.terminated_by == TerminatedBy::kMalformed) {
      record->kind = TurnKind::kMalformed;
    } else if (action.type == ActionType::kAnswer) {
      record->kind = TurnKind::kAnswer;
    } else {
      record->kind = TurnKind::kQuery;
    }
  }
  return result;
}

Trajectory run_episode(const Environment& env, const Policy& policy,
                       const SyntheticTask& task, Rng* rng, bool greedy) {
  Trajectory traj;
  traj.task_id = task.id;
  traj.question = task.question;
  traj.initial_state = env.reset(task);
  EpisodeState state = traj.initial_state;
  while (!state.done) {
    Turn turn;
    state = play_turn(env, policy, state, rng, greedy, &turn).state;
    traj.turns.push_back(std::move(turn));
  }
  traj.answer = state.answer;
  traj.terminated_by = state.terminated_by;
  traj.well_formed = state.well_formed &&
                     state.terminated_by == TerminatedBy::kAnswer;
  if (state.answer != kNoEntity) {
    traj.final_answer_text = env.graph().entity(state.answer).name;
  }
  return traj;
}

EpisodeState continue_episode(const Environment& env, const Policy& policy,
                              EpisodeState state, Rng* rng, bool greedy) {
  while (!state.done) {
    state = play_turn(env, policy, state, rng, greedy, nullptr).state;
  }
  return state;
}

EvalMetrics evaluate(const Environment& env, const Policy& policy,
                     std::span<const SyntheticTask> tasks) {
  if (tasks.empty()) throw std::invalid_argument("evaluate: no tasks");
  EvalMetrics m;
  for (const SyntheticTask& task : tasks) {
    Trajectory t = run_episode(env, policy, task, nullptr, true);
    m.em += exact_match(t.final_answer_text, task.gold_answer_text);
    m.f1 += token_f1(t.final_answer_text, task.gold_answer_text);
    m.mean_turns += static_cast<double>(t.turns.size());
  }
  m.n_tasks = tasks.size();
  const double n = static_cast<double>(tasks.size());
  m.em /= n;
  m.f1 /= n;
  m.mean_turns /= n;
  return m;
}

double gold_hit_rate(const Retriever& retriever,
                     std::span<const SyntheticTask> tasks, RetrievalMode mode,
                     int k) {
  size_t hits = 0, total = 0;
  const KnowledgeHypergraph& graph = retriever.graph();
  for (const SyntheticTask& t : tasks) {
    for (size_t j = 0; j < t.gold_chain.size(); ++j) {
      RetrievalQuery q;
      q.text = graph.entity(t.chain_entities[j]).name + " " + t.relations[j];
      q.k = k;
      RetrievedFactSet r = retriever.retrieve(q, mode);
      for (const RetrievedFact& f : r.facts) {
        if (f.edge_id == t.gold_chain[j]) {
          ++hits;
          break;
        }
      }
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / total;
}

size_t Trajectory::num_policy_tokens() const {
  size_t n = 0;
  for (const Turn& t : turns) n += t.tokens.size();
  return n;
}

int Trajectory::num_query_turns() const {
  int n = 0;
  for (const Turn& t : turns) n += t.kind == TurnKind::kQuery ? 1 : 0;
  return n;
}

}  // namespace hyperstep
