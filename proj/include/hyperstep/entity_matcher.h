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

#ifndef HYPERSTEP_ENTITY_MATCHER_H_
#define HYPERSTEP_ENTITY_MATCHER_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hyperstep/hypergraph.h"

namespace hyperstep {

struct EntityMention {
  EntityId entity_id = 0;
  // Byte offsets [start, end) into the source text.
  size_t start = 0;
  size_t end = 0;
};

// Lexical mention detector over the names and aliases of a graph's entities.
// Matching is case-insensitive (ASCII), tolerant to whitespace runs, and only
// accepts matches not flanked by letters or digits. Overlaps are resolved
// longest first; equal lengths prefer the earlier start, then the lower id.
//
// The compiled automaton is immutable and safe to share across threads.
class EntityMatcher {
 public:
  explicit EntityMatcher(const KnowledgeHypergraph& graph);

  // Non-overlapping mentions sorted by start offset.
  std::vector<EntityMention> find_mentions(std::string_view text) const;

  // Distinct entity ids in order of first mention.
  std::vector<EntityId> extract(std::string_view text) const;

  size_t num_patterns() const { return pattern_entity_.size(); }

 private:
  struct Node {
    std::map<unsigned char, int32_t> next;
    int32_t fail = 0;
    // Nearest node on the fail chain (including itself) that ends a pattern.
    int32_t output = -1;
    std::vector<int32_t> patterns;
  };

  void add_pattern(const std::string& pattern, EntityId id);
  void compile();
  int32_t step(int32_t state, unsigned char c) const;

  std::vector<Node> nodes_;
  std::vector<EntityId> pattern_entity_;
  std::vector<size_t> pattern_length_;
  std::map<std::string, int32_t> pattern_ids_;
};

// extract_entities(text, graph) convenience wrapper compiling a matcher.
std::vector<EntityId> extract_entities(std::string_view text,
                                       const KnowledgeHypergraph& graph);

}  // namespace hyperstep

#endif  // HYPERSTEP_ENTITY_MATCHER_H_
