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

#ifndef HYPERSTEP_TESTS_FIXTURES_H_
#define HYPERSTEP_TESTS_FIXTURES_H_

#include <filesystem>
#include <string>
#include <vector>

#include "hyperstep/config.h"
#include "hyperstep/hypergraph.h"
#include "hyperstep/policy.h"
#include "hyperstep/rng.h"

namespace hyperstep::testing {

FactRecord fact(std::string text, std::vector<std::string> entities);

// {A,B}, {B,C}, {C,D} with texts "A relates B" and so on.
KnowledgeHypergraph chain_graph();

// Random graph over entities "n0".."n{entities-1}" with 1..max_edges edges of
// 1..max_arity distinct members each. Entities left unused are dropped by the
// builder, so ids are dense but not aligned with the names.
KnowledgeHypergraph random_graph(Rng* rng, int max_edges, int entities,
                                 int max_arity);

// Softmax policy with parameters drawn uniformly from [-scale, scale].
SoftmaxPolicy random_policy(const PolicyShape& shape, Rng* rng, double scale);

// A small corpus that trains in well under a second.
ExperimentConfig small_config();

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);

}  // namespace hyperstep::testing

#endif  // HYPERSTEP_TESTS_FIXTURES_H_
