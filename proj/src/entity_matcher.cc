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

#include "hyperstep/entity_matcher.h"

#include <algorithm>
#include <cctype>
#include <deque>

namespace hyperstep {

namespace {

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

// Normalized copy of `text` (lowercase, single spaces) with a map from each
// normalized byte back to its source offset.
struct FoldedText {
  std::string text;
  std::vector<size_t> origin;
};

FoldedText fold(std::string_view text) {
  FoldedText out;
  out.text.reserve(text.size());
  bool in_space = false;
  for (size_t i = 0; i < text.size(); ++i) {
    unsigned char c = text[i];
    if (std::isspace(c)) {
      if (!in_space) {
        out.text.push_back(' ');
        out.origin.push_back(i);
      }
      in_space = true;
      continue;
    }
    in_space = false;
    out.text.push_back(static_cast<char>(std::tolower(c)));
    out.origin.push_back(i);
  }
  return out;
}

}  // namespace

EntityMatcher::EntityMatcher(const KnowledgeHypergraph& graph) {
  nodes_.emplace_back();
  for (const Entity& entity : graph.entities()) {
    add_pattern(normalize_entity_name(entity.name), entity.id);
    for (const std::string& alias : entity.aliases) {
      add_pattern(normalize_entity_name(alias), entity.id);
    }
  }
  compile();
}

void EntityMatcher::add_pattern(const std::string& pattern, EntityId id) {
  if (pattern.empty()) return;
  auto it = pattern_ids_.find(pattern);
  if (it != pattern_ids_.end()) {
    // The same surface form for two entities resolves to the lower id.
    EntityId& owner = pattern_entity_[it->second];
    owner = std::min(owner, id);
    return;
  }
  int32_t state = 0;
  for (unsigned char c : pattern) {
    auto next = nodes_[state].next.find(c);
    if (next == nodes_[state].next.end()) {
      int32_t created = static_cast<int32_t>(nodes_.size());
      nodes_[state].next.emplace(c, created);
      nodes_.emplace_back();
      state = created;
    } else {
      state = next->second;
    }
  }
  int32_t pid = static_cast<int32_t>(pattern_entity_.size());
  pattern_entity_.push_back(id);
  pattern_length_.push_back(pattern.size());
  pattern_ids_.emplace(pattern, pid);
  nodes_[state].patterns.push_back(pid);
}

void EntityMatcher::compile() {
  // Breadth-first fail-link construction.
  std::deque<int32_t> queue;
  for (auto& [c, child] : nodes_[0].next) {
    nodes_[child].fail = 0;
    queue.push_back(child);
  }
  while (!queue.empty()) {
    int32_t u = queue.front();
    queue.pop_front();
    for (auto& [c, child] : nodes_[u].next) {
      int32_t f = nodes_[u].fail;
      while (f != 0 && nodes_[f].next.count(c) == 0) f = nodes_[f].fail;
      auto hit = nodes_[f].next.find(c);
      nodes_[child].fail =
          (hit != nodes_[f].next.end() && hit->second != child) ? hit->second
                                                                : 0;
      queue.push_back(child);
    }
  }
  // Output links in BFS order so parents' fail targets are resolved first.
  std::vector<int32_t> order;
  order.push_back(0);
  for (size_t i = 0; i < order.size(); ++i) {
    for (auto& [c, child] : nodes_[order[i]].next) order.push_back(child);
  }
  for (int32_t u : order) {
    if (!nodes_[u].patterns.empty()) {
      nodes_[u].output = u;
    } else if (u != 0) {
      nodes_[u].output = nodes_[nodes_[u].fail].output;
    }
  }
}

int32_t EntityMatcher::step(int32_t state, unsigned char c) const {
  while (true) {
    auto it = nodes_[state].next.find(c);
    if (it != nodes_[state].next.end()) return it->second;
    if (state == 0) return 0;
    state = nodes_[state].fail;
  }
}

std::vector<EntityMention> EntityMatcher::find_mentions(
    std::string_view text) const {
  const FoldedText folded = fold(text);
  const std::string& s = folded.text;

  struct Candidate {
    size_t start, end;  // in folded coordinates
    EntityId id;
  };
  std::vector<Candidate> candidates;
  int32_t state = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    state = step(state, static_cast<unsigned char>(s[i]));
    for (int32_t out = nodes_[state].output; out >= 0;
         out = nodes_[nodes_[out].fail].output) {
      for (int32_t pid : nodes_[out].patterns) {
        const size_t end = i + 1;
        const size_t start = end - pattern_length_[pid];
        const bool left_ok =
            start == 0 || !is_word_byte(static_cast<unsigned char>(s[start - 1]));
        const bool right_ok =
            end == s.size() || !is_word_byte(static_cast<unsigned char>(s[end]));
        if (left_ok && right_ok) {
          candidates.push_back({start, end, pattern_entity_[pid]});
        }
      }
      if (out == 0) break;
    }
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              const size_t la = a.end - a.start, lb = b.end - b.start;
              if (la != lb) return la > lb;
              if (a.start != b.start) return a.start < b.start;
              return a.id < b.id;
            });
  std::vector<char> taken(s.size(), 0);
  std::vector<Candidate> chosen;
  for (const Candidate& c : candidates) {
    bool free = true;
    for (size_t i = c.start; i < c.end && free; ++i) free = !taken[i];
    if (!free) continue;
    std::fill(taken.begin() + c.start, taken.begin() + c.end, 1);
    chosen.push_back(c);
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const Candidate& a, const Candidate& b) {
              return a.start < b.start;
            });

  std::vector<EntityMention> mentions;
  mentions.reserve(chosen.size());
  for (const Candidate& c : chosen) {
    mentions.push_back({c.id, folded.origin[c.start],
                        folded.origin[c.end - 1] + 1});
  }
  return mentions;
}

std::vector<EntityId> EntityMatcher::extract(std::string_view text) const {
  std::vector<EntityId> ids;
  for (const EntityMention& m : find_mentions(text)) {
    if (std::find(ids.begin(), ids.end(), m.entity_id) == ids.end()) {
      ids.push_back(m.entity_id);
    }
  }
  return ids;
}

std::vector<EntityId> extract_entities(std::string_view text,
                                       const KnowledgeHypergraph& graph) {
  return EntityMatcher(graph).extract(text);
}

}  // namespace hyperstep
