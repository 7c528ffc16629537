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

// Command-line entry point: ingest, query, serve, train, eval, report.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hyperstep/commands.h"

namespace {

void add_embedding_flags(CLI::App* cmd, hyperstep::EmbeddingOptions* o) {
  cmd->add_option("--dim", o->dim, "Synthetic embedding dimension");
  cmd->add_option("--embedding-seed", o->seed, "Synthetic embedding seed");
  cmd->add_option("--embeddings", o->sidecar, "Precomputed embedding sidecar");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypergraph retrieval and step-wise GRPO toolkit"};
  app.require_subcommand(1);

  std::string ingest_in, ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Build and persist an index");
  ingest->add_option("input", ingest_in, "Fact JSONL")->required();
  ingest->add_option("output", ingest_out, "Index path")->required();

  hyperstep::QueryOptions query_opts;
  auto* query = app.add_subcommand("query", "Retrieve facts for a query");
  query->add_option("index", query_opts.index)->required();
  query->add_option("text", query_opts.text)->required();
  query->add_option("-k", query_opts.k, "Facts to return");
  query->add_option("--mode", query_opts.mode,
                    "baseline or informativeness");
  query->add_option("--entity", query_opts.entities,
                    "Query entity (repeatable); overrides extraction");
  query->add_flag("--explain", query_opts.explain,
                  "Include per-entity score breakdown");
  add_embedding_flags(query, &query_opts.embedding);

  hyperstep::ServeOptions serve_opts;
  bool serve_tcp = false;
  auto* serve = app.add_subcommand("serve", "Line-delimited JSON service");
  serve->add_option("index", serve_opts.index)->required();
  serve->add_option("-k", serve_opts.k, "Default facts per request");
  serve->add_option("--mode", serve_opts.mode, "Default retrieval mode");
  serve->add_flag("--stdio", "Serve on stdin/stdout (default)");
  serve->add_option("--port", serve_opts.port,
                    "Serve on 127.0.0.1:PORT instead (0 = ephemeral)")
      ->each([&](const std::string&) { serve_tcp = true; });
  add_embedding_flags(serve, &serve_opts.embedding);

  std::string config_path, out_dir, checkpoint, report_csv;
  std::vector<std::string> overrides, run_dirs;
  auto* train = app.add_subcommand("train", "Train a policy");
  train->add_option("config", config_path, "Experiment config file");
  train->add_option("--set", overrides, "Override section.key=value");
  train->add_option("--out", out_dir, "Output directory");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("config", config_path)->required();
  eval->add_option("checkpoint", checkpoint)->required();
  eval->add_option("--set", overrides, "Override section.key=value");

  auto* report = app.add_subcommand("report", "Ablation table over runs");
  report->add_option("runs", run_dirs)->required();
  report->add_option("--csv", report_csv, "Also write the table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? hyperstep::kExitOk : hyperstep::kExitUsage;
  }

  if (*ingest) {
    return hyperstep::cmd_ingest(ingest_in, ingest_out, std::cout, std::cerr);
  }
  if (*query) return hyperstep::cmd_query(query_opts, std::cout, std::cerr);
  if (*serve) {
    serve_opts.stdio = !serve_tcp;
    return hyperstep::cmd_serve(serve_opts, std::cin, std::cout, std::cerr);
  }
  if (*train) {
    return hyperstep::cmd_train(config_path, overrides, out_dir, std::cout,
                                std::cerr);
  }
  if (*eval) {
    return hyperstep::cmd_eval(config_path, overrides, checkpoint, std::cout,
                               std::cerr);
  }
  if (*report) {
    return hyperstep::cmd_report(run_dirs, report_csv, std::cout, std::cerr);
  }
  return hyperstep::kExitUsage;
}
