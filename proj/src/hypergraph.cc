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

#include "hyperstep/hypergraph.h"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hyperstep/errors.h"
#include "hyperstep/rng.h"
#include "json.hpp"

namespace hyperstep {

std::string normalize_entity_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (unsigned char c : name) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

const Entity& KnowledgeHypergraph::entity(EntityId id) const {
  if (id >= entities_.size()) {
    throw std::out_of_range("unknown entity id " + std::to_string(id));
  }
  return entities_[id];
}

const Hyperedge& KnowledgeHypergraph::edge(EdgeId id) const {
  if (id >= edges_.size()) {
    throw std::out_of_range("unknown hyperedge id " + std::to_string(id));
  }
  return edges_[id];
}

std::span<const EdgeId> KnowledgeHypergraph::incidence(EntityId id) const {
  if (id >= incidence_.size()) {
    throw std::out_of_range("unknown entity id " + std::to_string(id));
  }
  return incidence_[id];
}

std::optional<EntityId> KnowledgeHypergraph::find_entity(
    std::string_view name) const {
  auto it = name_index_.find(normalize_entity_name(name));
  if (it == name_index_.end()) return std::nullopt;
  return it->second;
}

size_t HypergraphBuilder::intern(std::string_view surface) {
  std::string key = normalize_entity_name(surface);
  auto it = by_name_.find(key);
  if (it != by_name_.end()) return it->second;
  // Canonical name keeps the first surface form, whitespace-trimmed.
  std::string canonical;
  bool pending_space = false;
  for (unsigned char c : surface) {
    if (std::isspace(c)) {
      pending_space = !canonical.empty();
      continue;
    }
    if (pending_space) canonical.push_back(' ');
    pending_space = false;
    canonical.push_back(static_cast<char>(c));
  }
  size_t index = entities_.size();
  entities_.push_back({std::move(canonical), {}});
  by_name_.emplace(std::move(key), index);
  return index;
}

void HypergraphBuilder::reject_line(size_t line, std::string reason) {
  ++stats_.records_seen;
  stats_.rejected.push_back({line, std::move(reason)});
}

void HypergraphBuilder::add_entity(std::string_view name,
                                   const std::vector<std::string>& aliases) {
  if (normalize_entity_name(name).empty()) return;
  size_t index = intern(name);
  for (const std::string& alias : aliases) {
    std::string key = normalize_entity_name(alias);
    if (key.empty()) continue;
    auto& known = entities_[index].aliases;
    if (std::find(known.begin(), known.end(), alias) == known.end()) {
      known.push_back(alias);
    }
    by_name_.emplace(std::move(key), index);
  }
}

std::optional<std::string> HypergraphBuilder::add_fact(
    const FactRecord& record) {
  ++stats_.records_seen;
  auto reject = [&](std::string reason) -> std::optional<std::string> {
    stats_.rejected.push_back({record.line, reason});
    return reason;
  };
  if (normalize_entity_name(record.text).empty()) {
    return reject("missing fact text");
  }
  if (record.entities.empty()) return reject("empty entity list");

  std::vector<std::string> keys;
  keys.reserve(record.entities.size());
  for (const std::string& name : record.entities) {
    std::string key = normalize_entity_name(name);
    if (key.empty()) return reject("empty entity name");
    if (std::find(keys.begin(), keys.end(), key) != keys.end()) {
      return reject("duplicate entity within fact: " + name);
    }
    keys.push_back(std::move(key));
  }

  // Duplicate facts are identical text over the same entity set.
  std::vector<std::string> sorted_keys = keys;
  std::sort(sorted_keys.begin(), sorted_keys.end());
  std::string fact_key = record.text;
  for (const std::string& key : sorted_keys) {
    fact_key.push_back('\x1f');
    fact_key += key;
  }
  if (fact_keys_.count(fact_key) != 0) {
    ++stats_.duplicates_collapsed;
    return std::nullopt;
  }
  fact_keys_.emplace(std::move(fact_key), edges_.size());

  PendingEdge pending{record, {}};
  for (const std::string& name : record.entities) {
    pending.members.push_back(intern(name));
  }
  edges_.push_back(std::move(pending));
  return std::nullopt;
}

KnowledgeHypergraph HypergraphBuilder::build() && {
  if (edges_.empty()) {
    throw DataError("no valid fact records (" +
                    std::to_string(stats_.rejected.size()) + " rejected)");
  }
  std::vector<bool> used(entities_.size(), false);
  for (const PendingEdge& edge : edges_) {
    for (size_t m : edge.members) used[m] = true;
  }

  KnowledgeHypergraph graph;
  std::vector<EntityId> dense(entities_.size(), 0);
  for (size_t i = 0; i < entities_.size(); ++i) {
    if (!used[i]) {
      stats_.orphans_dropped.push_back(entities_[i].name);
      continue;
    }
    EntityId id = static_cast<EntityId>(graph.entities_.size());
    dense[i] = id;
    graph.entities_.push_back(
        {id, std::move(entities_[i].name), std::move(entities_[i].aliases)});
  }
  for (const auto& [key, index] : by_name_) {
    if (used[index]) graph.name_index_.emplace(key, dense[index]);
  }

  graph.incidence_.assign(graph.entities_.size(), {});
  for (PendingEdge& pending : edges_) {
    Hyperedge edge;
    edge.id = static_cast<EdgeId>(graph.edges_.size());
    edge.text = std::move(pending.record.text);
    edge.source_doc = std::move(pending.record.source_doc);
    edge.external_id = std::move(pending.record.edge_id);
    for (size_t m : pending.members) {
      edge.entity_ids.push_back(dense[m]);
      graph.incidence_[dense[m]].push_back(edge.id);
    }
    graph.edges_.push_back(std::move(edge));
  }
  graph.stats_ = std::move(stats_);
  return graph;
}

KnowledgeHypergraph ingest_facts(std::span<const FactRecord> records) {
  HypergraphBuilder builder;
  for (const FactRecord& record : records) builder.add_fact(record);
  return std::move(builder).build();
}

std::optional<std::string> parse_fact_line(std::string_view line,
                                           FactRecord* out) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) return "malformed JSON";
  if (!j.is_object()) return "record is not a JSON object";
  FactRecord record;
  auto text = j.find("text");
  if (text == j.end() || !text->is_string()) return "missing fact text";
  record.text = text->get<std::string>();
  auto entities = j.find("entities");
  if (entities == j.end() || !entities->is_array()) {
    return "missing entity list";
  }
  for (const auto& e : *entities) {
    if (!e.is_string()) return "entity names must be strings";
    record.entities.push_back(e.get<std::string>());
  }
  if (auto id = j.find("edge_id"); id != j.end() && !id->is_null()) {
    if (id->is_string()) {
      record.edge_id = id->get<std::string>();
    } else if (id->is_number_integer()) {
      record.edge_id = std::to_string(id->get<long long>());
    } else {
      return "edge_id must be a string or integer";
    }
  }
  if (auto doc = j.find("source_doc"); doc != j.end() && !doc->is_null()) {
    if (!doc->is_string()) return "source_doc must be a string";
    record.source_doc = doc->get<std::string>();
  }
  *out = std::move(record);
  return std::nullopt;
}

KnowledgeHypergraph ingest_jsonl(std::istream& in) {
  HypergraphBuilder builder;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_entity_name(line).empty()) continue;
    FactRecord record;
    if (auto err = parse_fact_line(line, &record)) {
      builder.reject_line(line_no, *err);
      continue;
    }
    record.line = line_no;
    builder.add_fact(record);
  }
  try {
    return std::move(builder).build();
  } catch (const DataError&) {
    throw DataError("no valid fact records in stream (" +
                    std::to_string(line_no) + " lines read)");
  }
}

std::vector<EdgeId> edges_containing(const KnowledgeHypergraph& graph,
                                     std::span<const EntityId> entity_ids) {
  std::vector<EdgeId> out;
  for (EntityId id : entity_ids) {
    auto inc = graph.incidence(id);
    out.insert(out.end(), inc.begin(), inc.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ValidationReport validate(const KnowledgeHypergraph& graph) {
  ValidationReport report;
  report.duplicates_collapsed = graph.build_stats().duplicates_collapsed;
  report.orphans_dropped = graph.build_stats().orphans_dropped;

  const size_t n = graph.num_entities();
  std::vector<std::vector<EdgeId>> transpose(n);
  for (const Hyperedge& edge : graph.edges()) {
    if (edge.entity_ids.empty()) {
      report.problems.push_back("hyperedge " + std::to_string(edge.id) +
                                " has no entities");
    }
    std::vector<EntityId> members = edge.entity_ids;
    std::sort(members.begin(), members.end());
    if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
      report.problems.push_back("hyperedge " + std::to_string(edge.id) +
                                " repeats an entity");
    }
    for (EntityId v : edge.entity_ids) {
      if (v >= n) {
        report.problems.push_back("hyperedge " + std::to_string(edge.id) +
                                  " references unknown entity " +
                                  std::to_string(v));
        continue;
      }
      transpose[v].push_back(edge.id);
    }
  }
  for (EntityId v = 0; v < n; ++v) {
    std::sort(transpose[v].begin(), transpose[v].end());
    auto stored = graph.incidence(v);
    if (!std::equal(stored.begin(), stored.end(), transpose[v].begin(),
                    transpose[v].end())) {
      report.incidence_consistent = false;
      report.problems.push_back("incidence of entity " + std::to_string(v) +
                                " disagrees with hyperedge membership");
    }
    if (stored.empty()) {
      report.problems.push_back("entity " + std::to_string(v) +
                                " has degree 0");
    }
  }
  report.ok = report.problems.empty();
  return report;
}

void write_jsonl(const KnowledgeHypergraph& graph, std::ostream& out) {
  for (const Hyperedge& edge : graph.edges()) {
    nlohmann::ordered_json j;
    if (edge.external_id) {
      j["edge_id"] = *edge.external_id;
    } else {
      j["edge_id"] = edge.id;
    }
    j["text"] = edge.text;
    nlohmann::ordered_json names = nlohmann::ordered_json::array();
    for (EntityId v : edge.entity_ids) names.push_back(graph.entity(v).name);
    j["entities"] = std::move(names);
    if (edge.source_doc) j["source_doc"] = *edge.source_doc;
    out << j.dump() << '\n';
  }
}

namespace {

constexpr char kCacheMagic[8] = {'H', 'S', 'I', 'N', 'C', 'v', '0', '1'};
constexpr uint32_t kCacheVersion = 1;

void put_u64(std::string* out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>(v >> (8 * i)));
}

bool get_u64(std::string_view* in, uint64_t* v) {
  if (in->size() < 8) return false;
  *v = 0;
  for (int i = 0; i < 8; ++i) {
    *v |= static_cast<uint64_t>(static_cast<unsigned char>((*in)[i]))
          << (8 * i);
  }
  in->remove_prefix(8);
  return true;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void save_index(const KnowledgeHypergraph& graph, const std::string& path) {
  std::ostringstream jsonl;
  write_jsonl(graph, jsonl);
  const std::string body = jsonl.str();
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << body;
  }
  std::string cache(kCacheMagic, sizeof(kCacheMagic));
  put_u64(&cache, kCacheVersion);
  put_u64(&cache, fnv1a64(body));
  put_u64(&cache, graph.num_entities());
  put_u64(&cache, graph.num_edges());
  for (EntityId v = 0; v < graph.num_entities(); ++v) {
    auto inc = graph.incidence(v);
    put_u64(&cache, inc.size());
    for (EdgeId e : inc) put_u64(&cache, e);
  }
  std::ofstream out(path + ".inc", std::ios::binary);
  if (!out) throw DataError("cannot write " + path + ".inc");
  out << cache;
}

KnowledgeHypergraph load_index(const std::string& path, std::string* note) {
  const std::string body = read_file(path);
  std::istringstream in(body);
  KnowledgeHypergraph graph = ingest_jsonl(in);

  auto set_note = [&](const std::string& s) {
    if (note) *note = s;
  };
  std::ifstream cache_in(path + ".inc", std::ios::binary);
  if (!cache_in) {
    set_note("no incidence cache; rebuilt from JSONL");
    return graph;
  }
  std::ostringstream ss;
  ss << cache_in.rdbuf();
  const std::string cache = ss.str();
  std::string_view view(cache);
  if (view.size() < sizeof(kCacheMagic) ||
      std::memcmp(view.data(), kCacheMagic, sizeof(kCacheMagic)) != 0) {
    set_note("incidence cache has wrong magic; rebuilt from JSONL");
    return graph;
  }
  view.remove_prefix(sizeof(kCacheMagic));
  uint64_t version, hash, nv, ne;
  if (!get_u64(&view, &version) || version != kCacheVersion ||
      !get_u64(&view, &hash) || hash != fnv1a64(body) ||
      !get_u64(&view, &nv) || nv != graph.num_entities() ||
      !get_u64(&view, &ne) || ne != graph.num_edges()) {
    set_note("incidence cache is stale; rebuilt from JSONL");
    return graph;
  }
  for (EntityId v = 0; v < nv; ++v) {
    uint64_t count;
    auto inc = graph.incidence(v);
    if (!get_u64(&view, &count) || count != inc.size()) {
      set_note("incidence cache disagrees with JSONL; rebuilt");
      return graph;
    }
    for (EdgeId e : inc) {
      uint64_t cached;
      if (!get_u64(&view, &cached) || cached != e) {
        set_note("incidence cache disagrees with JSONL; rebuilt");
        return graph;
      }
    }
  }
  set_note("incidence cache verified");
  return graph;
}

}  // namespace hyperstep
