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

#ifndef HYPERSTEP_HYPERGRAPH_H_
#define HYPERSTEP_HYPERGRAPH_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hyperstep {

using EntityId = uint32_t;
using EdgeId = uint32_t;

struct Entity {
  EntityId id = 0;
  std::string name;
  std::vector<std::string> aliases;
};

// An n-ary fact. Entity order is the order of first mention in the record.
struct Hyperedge {
  EdgeId id = 0;
  std::string text;
  std::vector<EntityId> entity_ids;
  std::optional<std::string> source_doc;
  // The record's own `edge_id`, if it supplied one.
  std::optional<std::string> external_id;
};

// One line of the ingestion stream before validation.
struct FactRecord {
  std::optional<std::string> edge_id;
  std::string text;
  std::vector<std::string> entities;
  std::optional<std::string> source_doc;
  // 1-based line number in the source stream, 0 if not from a stream.
  size_t line = 0;
};

struct RecordRejection {
  size_t line = 0;
  std::string reason;
};

// Bookkeeping produced while building a graph.
struct BuildStats {
  size_t records_seen = 0;
  size_t duplicates_collapsed = 0;
  std::vector<std::string> orphans_dropped;
  std::vector<RecordRejection> rejected;
};

struct ValidationReport {
  bool ok = true;
  bool incidence_consistent = true;
  size_t duplicates_collapsed = 0;
  std::vector<std::string> orphans_dropped;
  std::vector<std::string> problems;
};

// Case-folds ASCII letters, trims, and collapses whitespace runs to a single
// space. Two surface strings name the same entity iff their normalized forms
// are equal.
std::string normalize_entity_name(std::string_view name);

// Immutable knowledge hypergraph with entity -> hyperedge incidence. Ids are
// dense: entities 0..|V|-1, hyperedges 0..|E|-1. Safe for concurrent readers.
class KnowledgeHypergraph {
 public:
  KnowledgeHypergraph() = default;

  size_t num_entities() const { return entities_.size(); }
  size_t num_edges() const { return edges_.size(); }

  const Entity& entity(EntityId id) const;
  const Hyperedge& edge(EdgeId id) const;
  std::span<const Entity> entities() const { return entities_; }
  std::span<const Hyperedge> edges() const { return edges_; }

  // Sorted ids of the hyperedges containing `id`.
  std::span<const EdgeId> incidence(EntityId id) const;
  size_t degree(EntityId id) const { return incidence(id).size(); }

  // Lookup by canonical name or alias, after normalization.
  std::optional<EntityId> find_entity(std::string_view name) const;

  const BuildStats& build_stats() const { return stats_; }

 private:
  friend class HypergraphBuilder;
  friend struct HypergraphTestAccess;

  std::vector<Entity> entities_;
  std::vector<Hyperedge> edges_;
  std::vector<std::vector<EdgeId>> incidence_;
  std::unordered_map<std::string, EntityId> name_index_;
  BuildStats stats_;
};

// Accumulates entities and facts, then produces a validated graph.
class HypergraphBuilder {
 public:
  // Registers an entity (or extends an existing one with aliases). Entities
  // that end up in no hyperedge are dropped at build time.
  void add_entity(std::string_view name,
                  const std::vector<std::string>& aliases = {});

  // Adds one fact. Returns the rejection reason if the record is malformed;
  // the builder is unchanged in that case.
  std::optional<std::string> add_fact(const FactRecord& record);

  // Records a line that never became a FactRecord (e.g. unparsable JSON).
  void reject_line(size_t line, std::string reason);

  // Throws DataError if no valid fact was added.
  KnowledgeHypergraph build() &&;

 private:
  struct PendingEntity {
    std::string name;
    std::vector<std::string> aliases;
  };
  struct PendingEdge {
    FactRecord record;
    std::vector<size_t> members;  // indices into entities_
  };

  size_t intern(std::string_view surface);

  std::vector<PendingEntity> entities_;
  std::unordered_map<std::string, size_t> by_name_;
  std::vector<PendingEdge> edges_;
  std::unordered_map<std::string, size_t> fact_keys_;
  BuildStats stats_;
};

KnowledgeHypergraph ingest_facts(std::span<const FactRecord> records);

// Parses line-delimited JSON fact records. Lines that fail to parse or lack
// required fields are rejected with their line number; ingestion continues.
// Throws DataError when no line yields a valid fact.
KnowledgeHypergraph ingest_jsonl(std::istream& in);

// Parses one ingestion line. Returns the rejection reason on failure.
std::optional<std::string> parse_fact_line(std::string_view line,
                                           FactRecord* out);

// Union of the incidence lists of `entity_ids`, sorted ascending. Throws
// std::out_of_range naming the first unknown id.
std::vector<EdgeId> edges_containing(const KnowledgeHypergraph& graph,
                                     std::span<const EntityId> entity_ids);

ValidationReport validate(const KnowledgeHypergraph& graph);

// Writes the graph in the ingestion format, one hyperedge per line.
void write_jsonl(const KnowledgeHypergraph& graph, std::ostream& out);

// Index persistence: the canonical JSONL at `path` plus a versioned binary
// incidence cache at `path + ".inc"`.
void save_index(const KnowledgeHypergraph& graph, const std::string& path);

// Loads an index saved by save_index. A missing, stale, or mismatched cache
// triggers a rebuild from the JSONL; `note` (if given) describes what happened.
KnowledgeHypergraph load_index(const std::string& path,
                               std::string* note = nullptr);

}  // namespace hyperstep

#endif  // HYPERSTEP_HYPERGRAPH_H_
