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

#ifndef HYPERSTEP_QA_METRICS_H_
#define HYPERSTEP_QA_METRICS_H_

#include <string>
#include <string_view>

namespace hyperstep {

// SQuAD-style answer normalization: lowercase, drop ASCII punctuation, drop
// the articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view text);

// 1 if the normalized strings are equal, else 0.
double exact_match(std::string_view prediction, std::string_view gold);

// Token-level F1 over normalized token multisets.
double token_f1(std::string_view prediction, std::string_view gold);

}  // namespace hyperstep

#endif  // HYPERSTEP_QA_METRICS_H_
