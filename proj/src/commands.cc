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

#include "hyperstep/commands.h"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "hyperstep/config.h"
#include "hyperstep/errors.h"
#include "hyperstep/hypergraph.h"
#include "hyperstep/report.h"
#include "hyperstep/retrieval.h"
#include "hyperstep/server.h"
#include "hyperstep/trainer.h"
#include "json.hpp"

namespace hyperstep {
namespace fs = std::filesystem;
namespace {

using Json = nlohmann::ordered_json;

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

std::unique_ptr<EmbeddingProvider> provider_for(const EmbeddingOptions& o) {
  if (!o.sidecar.empty()) {
    return std::make_unique<SidecarEmbeddingProvider>(
        SidecarEmbeddingProvider::load_file(o.sidecar));
  }
  if (o.dim < 2) throw ConfigError("embedding dimension must be >= 2");
  return std::make_unique<SyntheticEmbeddingProvider>(o.seed, o.dim);
}

KnowledgeHypergraph open_index(const std::string& path, std::ostream& err) {
  if (!fs::exists(path)) throw DataError("index not found: " + path);
  std::string note;
  KnowledgeHypergraph graph = load_index(path, &note);
  if (!note.empty()) err << note << "\n";
  return graph;
}

ExperimentConfig resolve_config(const std::string& path,
                                const std::vector<std::string>& overrides) {
  ExperimentConfig config = path.empty() ? ExperimentConfig{} : load_config(path);
  for (const std::string& o : overrides) apply_override(&config, o);
  config.validate();
  return config;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

int cmd_ingest(const std::string& input, const std::string& output,
               std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream in(input);
    if (!in) throw DataError("cannot read " + input);
    KnowledgeHypergraph graph = ingest_jsonl(in);
    ValidationReport report = validate(graph);
    if (!report.ok) {
      throw DataError("index failed validation: " + report.problems.front());
    }
    save_index(graph, output);
    const BuildStats& stats = graph.build_stats();
    out << "|V|=" << graph.entities().size() << " |E|=" << graph.edges().size()
        << "\n";
    out << "records_seen=" << stats.records_seen
        << " duplicates_collapsed=" << stats.duplicates_collapsed
        << " rejected=" << stats.rejected.size()
        << " orphans_dropped=" << stats.orphans_dropped.size() << "\n";
    for (const RecordRejection& r : stats.rejected) {
      err << "rejected line " << r.line << ": " << r.reason << "\n";
    }
    std::map<size_t, size_t> histogram;
    for (const Entity& v : graph.entities()) ++histogram[graph.degree(v.id)];
    out << "degree_histogram";
    for (const auto& [degree, count] : histogram) {
      out << " " << degree << ":" << count;
    }
    out << "\n";
    return kExitOk;
  });
}

int cmd_query(const QueryOptions& options, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const RetrievalMode mode = parse_retrieval_mode(options.mode);
    if (options.k < 1) throw ConfigError("k must be >= 1");
    auto provider = provider_for(options.embedding);
    KnowledgeHypergraph graph = open_index(options.index, err);
    Retriever retriever(graph, *provider);
    RetrievalQuery q;
    q.text = options.text;
    q.k = options.k;
    if (!options.entities.empty()) {
      std::vector<EntityId> ids;
      for (const std::string& name : options.entities) {
        auto id = graph.find_entity(name);
        if (!id) throw DataError("unknown entity '" + name + "'");
        ids.push_back(*id);
      }
      q.explicit_entities = std::move(ids);
    }
    RetrievedFactSet result = retriever.retrieve(q, mode);
    for (const RetrievedFact& f : result.facts) {
      Json j = fact_to_json(f, graph, options.explain);
      j["mode"] = retrieval_mode_name(result.mode);
      j["truncated"] = result.truncated;
      out << j.dump() << "\n";
    }
    return kExitOk;
  });
}

int cmd_serve(const ServeOptions& options, std::istream& in, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const RetrievalMode mode = parse_retrieval_mode(options.mode);
    if (options.k < 1) throw ConfigError("k must be >= 1");
    auto provider = provider_for(options.embedding);
    KnowledgeHypergraph graph = open_index(options.index, err);
    Retriever retriever(graph, *provider);
    QueryService service(retriever, options.k, mode);
    if (options.stdio) {
      serve_stream(service, in, out);
      return kExitOk;
    }
    TcpServer server(service, options.port);
    err << "listening on 127.0.0.1:" << server.port() << "\n" << std::flush;
    server.run();
    return kExitOk;
  });
}

int cmd_train(const std::string& config_path,
              const std::vector<std::string>& overrides,
              const std::string& out_dir, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    ExperimentConfig config = resolve_config(config_path, overrides);
    if (!out_dir.empty()) config.run.out_dir = out_dir;
    if (config.run.out_dir.empty()) {
      throw ConfigError("no output directory (use --out or run.out_dir)");
    }
    const fs::path dir(config.run.out_dir);
    fs::create_directories(dir);
    Experiment experiment(config);
    write_file(dir / "config.txt", canonical_config(config));
    {
      std::ofstream g(dir / "corpus.jsonl", std::ios::binary);
      std::ofstream t(dir / "tasks.jsonl", std::ios::binary);
      experiment.write_corpus(g, t);
    }
    TrainResult result;
    {
      std::ofstream csv(dir / "metrics.csv", std::ios::binary);
      result = train(experiment, config, &csv);
    }
    for (const std::string& e : result.excluded) err << "excluded " << e << "\n";
    const std::string hash = config_hash(config);
    Checkpoint ckpt;
    ckpt.shape = experiment.env().policy_shape();
    ckpt.temperature = config.train.temperature;
    ckpt.config_hash = hash;
    ckpt.corpus_hash = experiment.corpus_hash();
    ckpt.params = result.best_params;
    {
      std::ofstream c(dir / "checkpoint_best.json", std::ios::binary);
      write_checkpoint(ckpt, c);
    }
    ckpt.params = result.final_params;
    {
      std::ofstream c(dir / "checkpoint_final.json", std::ios::binary);
      write_checkpoint(ckpt, c);
    }
    Json s;
    s["config_hash"] = hash;
    s["corpus_hash"] = experiment.corpus_hash();
    s["mode"] = retrieval_mode_name(config.mode);
    s["lambda1"] = config.reward.lambda1;
    s["lambda2"] = config.reward.lambda2;
    s["outcome_in_every_step"] = config.reward.outcome_in_every_step;
    s["seed"] = config.run.seed;
    s["iterations"] = config.train.iterations;
    s["final"] = {{"em", result.final_eval.em},
                  {"f1", result.final_eval.f1},
                  {"mean_turns", result.final_eval.mean_turns},
                  {"n_tasks", result.final_eval.n_tasks}};
    s["best_em"] = result.best_em;
    s["best_iter"] = result.best_iter;
    s["iters_to_threshold"] = result.iters_to_threshold;
    s["excluded_rollouts"] = result.excluded.size();
    write_file(dir / "summary.json", s.dump(1) + "\n");
    out << s.dump() << "\n";
    return kExitOk;
  });
}

int cmd_eval(const std::string& config_path,
             const std::vector<std::string>& overrides,
             const std::string& checkpoint_path, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    ExperimentConfig config = resolve_config(config_path, overrides);
    std::ifstream in(checkpoint_path);
    if (!in) throw DataError("cannot read checkpoint " + checkpoint_path);
    Checkpoint ckpt = read_checkpoint(in);
    const std::string hash = config_hash(config);
    if (ckpt.config_hash != hash) {
      throw ConfigError("checkpoint config hash " + ckpt.config_hash +
                        " does not match config hash " + hash);
    }
    Experiment experiment(config);
    if (!ckpt.corpus_hash.empty() &&
        ckpt.corpus_hash != experiment.corpus_hash()) {
      throw ConfigError("checkpoint corpus hash " + ckpt.corpus_hash +
                        " does not match corpus hash " +
                        experiment.corpus_hash());
    }
    if (!(ckpt.shape == experiment.env().policy_shape())) {
      throw DataError("checkpoint policy shape does not match the environment");
    }
    if (experiment.tasks().empty()) throw DataError("empty task list");
    auto policy = make_policy(ckpt);
    EvalMetrics m = evaluate(experiment.env(), *policy, experiment.tasks());
    Json j;
    j["em"] = m.em;
    j["f1"] = m.f1;
    j["mean_turns"] = m.mean_turns;
    j["n_tasks"] = m.n_tasks;
    out << j.dump() << "\n";
    return kExitOk;
  });
}

int cmd_report(const std::vector<std::string>& run_dirs,
               const std::string& csv_path, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    if (run_dirs.empty()) throw ConfigError("report needs at least one run dir");
    std::vector<RunSummary> runs;
    for (const std::string& d : run_dirs) runs.push_back(read_run_summary(d));
    Report report = build_report(runs);
    for (const std::string& w : report.warnings) err << w << "\n";
    write_report_text(report, out);
    if (!csv_path.empty()) {
      std::ofstream csv(csv_path, std::ios::binary);
      if (!csv) throw std::runtime_error("cannot write " + csv_path);
      write_report_csv(report, csv);
    }
    return kExitOk;
  });
}

}  // namespace hyperstep
