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

#ifndef HYPERSTEP_COMMANDS_H_
#define HYPERSTEP_COMMANDS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hyperstep {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitRuntime = 3;

struct EmbeddingOptions {
  int dim = 64;
  uint64_t seed = 7;
  std::string sidecar;
};

struct QueryOptions {
  std::string index;
  std::string text;
  int k = 2;
  std::string mode = "informativeness";
  bool explain = false;
  std::vector<std::string> entities;  // overrides extraction when non-empty
  EmbeddingOptions embedding;
};

struct ServeOptions {
  std::string index;
  int k = 2;
  std::string mode = "informativeness";
  EmbeddingOptions embedding;
  bool stdio = true;
  int port = 0;
};

// Each command reports to `out`, diagnostics to `err`, and returns an exit
// code instead of throwing.
int cmd_ingest(const std::string& input, const std::string& output,
               std::ostream& out, std::ostream& err);
int cmd_query(const QueryOptions& options, std::ostream& out,
              std::ostream& err);
int cmd_serve(const ServeOptions& options, std::istream& in, std::ostream& out,
              std::ostream& err);
int cmd_train(const std::string& config_path,
              const std::vector<std::string>& overrides,
              const std::string& out_dir, std::ostream& out,
              std::ostream& err);
int cmd_eval(const std::string& config_path,
             const std::vector<std::string>& overrides,
             const std::string& checkpoint_path, std::ostream& out,
             std::ostream& err);
int cmd_report(const std::vector<std::string>& run_dirs,
               const std::string& csv_path, std::ostream& out,
               std::ostream& err);

}  // namespace hyperstep

#endif  // HYPERSTEP_COMMANDS_H_
