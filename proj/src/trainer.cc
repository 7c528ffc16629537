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

#include "hyperstep/trainer.h"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hyperstep/errors.h"
#include "hyperstep/grpo.h"
#include "hyperstep/parallel.h"
#include "hyperstep/reward.h"
#include "hyperstep/rng.h"
#include "json.hpp"

namespace hyperstep {

std::unique_ptr<EmbeddingProvider> make_provider(
    const ExperimentConfig& config) {
  if (!config.embeddings_path.empty()) {
    return std::make_unique<SidecarEmbeddingProvider>(
        SidecarEmbeddingProvider::load_file(config.embeddings_path));
  }
  return std::make_unique<SyntheticEmbeddingProvider>(config.embedding_seed,
                                                      config.embedding_dim);
}

Experiment::Experiment(const ExperimentConfig& config)
    : provider_(make_provider(config)) {
  if (config.corpus_path.empty()) {
    SyntheticCorpus corpus = generate_corpus(config.corpus, *provider_);
    graph_ = std::move(corpus.graph);
    tasks_ = std::move(corpus.tasks);
  } else {
    std::ifstream graph_in(config.corpus_path);
    if (!graph_in) throw DataError("cannot read " + config.corpus_path);
    graph_ = ingest_jsonl(graph_in);
    std::ifstream tasks_in(config.tasks_path);
    if (!tasks_in) throw DataError("cannot read " + config.tasks_path);
    tasks_ = read_tasks_jsonl(graph_, tasks_in);
  }
  CorpusCheck check = validate_tasks(graph_, tasks_);
  if (!check.ok) throw DataError("invalid tasks: " + check.problems.front());
  int relations = 1;
  for (const SyntheticTask& t : tasks_) {
    relations = std::max(relations, static_cast<int>(t.relations.size()));
  }
  retriever_ = std::make_unique<Retriever>(graph_, *provider_);
  env_ = std::make_unique<Environment>(
      *retriever_,
      EnvConfig{config.mode, config.k, config.train.max_turns,
                config.train.entity_slots},
      relations);
  std::ostringstream g, t;
  write_corpus(g, t);
  corpus_hash_ = hex64(fnv1a64(t.str(), fnv1a64(g.str())));
}

void Experiment::write_corpus(std::ostream& graph_out,
                              std::ostream& tasks_out) const {
  write_jsonl(graph_, graph_out);
  write_tasks_jsonl(graph_, tasks_, tasks_out);
}

std::string format_metrics_row(const IterationMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f,%.6f,%.8f,%.6f,%lld",
                m.iter, m.mean_outcome, m.em, m.f1, m.mean_turns, m.kl,
                m.clip_frac, static_cast<long long>(m.wall_ms));
  return buf;
}

TrainResult train(const Experiment& experiment, const ExperimentConfig& config,
                  std::ostream* csv) {
  config.validate();
  const Environment& env = experiment.env();
  const auto& tasks = experiment.tasks();
  const TrainingOptions& opt = config.train;
  const PolicyShape shape = env.policy_shape();
  if (tasks.empty()) throw DataError("no tasks to train on");

  TrainResult result;
  result.final_params.values.assign(shape.num_params(), 0.0);
  const SoftmaxPolicy ref(shape, result.final_params, opt.temperature);
  Optimizer optimizer(opt.optimizer);
  result.initial_eval = evaluate(env, ref, tasks);
  result.best_params = result.final_params;
  result.best_em = result.initial_eval.em;
  result.final_eval = result.initial_eval;

  if (csv != nullptr) {
    *csv << "# config_hash=" << config_hash(config)
         << " corpus_hash=" << experiment.corpus_hash() << "\n"
         << kMetricsHeader << "\n";
  }
  const size_t batch = std::min<size_t>(opt.batch_questions, tasks.size());
  std::vector<size_t> order(tasks.size());

  for (int iter = 1; iter <= opt.iterations; ++iter) {
    const auto start = std::chrono::steady_clock::now();
    const uint64_t iter_seed = derive_seed(config.run.seed, iter);
    Rng pick(derive_seed(iter_seed, 0));
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = 0; i < batch; ++i) {
      std::swap(order[i], order[i + pick.below(order.size() - i)]);
    }

    const SoftmaxPolicy old(shape, result.final_params, opt.temperature);
    std::vector<GroupBatch> groups(batch);
    std::vector<std::vector<std::string>> excluded(batch);
    std::vector<std::string> failures(batch);
    parallel_for(batch, config.run.threads, [&](size_t b) {
      try {
        const uint64_t seed = derive_seed(iter_seed, b + 1);
        groups[b] = sample_group(env, old, tasks[order[b]], opt.group_size,
                                 derive_seed(seed, 0), 1, &excluded[b]);
        compute_step_rewards(&groups[b], env, old, config.reward,
                             derive_seed(seed, 1));
        groups[b].advantages = step_modulated_advantage(
            groups[b], config.reward.outcome_in_every_step, opt.eps_norm,
            opt.advantage_mode);
      } catch (const std::exception& e) {
        failures[b] = e.what();
      }
    });
    for (size_t b = 0; b < batch; ++b) {
      if (!failures[b].empty()) throw std::runtime_error(failures[b]);
      for (auto& e : excluded[b]) result.excluded.push_back(std::move(e));
    }

    IterationMetrics m;
    m.iter = iter;
    size_t n_traj = 0;
    for (const GroupBatch& g : groups) {
      for (const Trajectory& t : g.trajectories) {
        m.mean_outcome += t.outcome;
        ++n_traj;
      }
    }
    m.mean_outcome /= static_cast<double>(n_traj);

    ObjectiveDiagnostics diag;
    for (int epoch = 0; epoch < opt.update_epochs; ++epoch) {
      const SoftmaxPolicy current(shape, result.final_params, opt.temperature);
      result.final_params = policy_update(current, groups, ref, opt.objective,
                                          &optimizer, &diag);
    }
    m.kl = diag.mean_kl;
    m.clip_frac = diag.clip_fraction;

    const SoftmaxPolicy now(shape, result.final_params, opt.temperature);
    result.final_eval = evaluate(env, now, tasks);
    m.em = result.final_eval.em;
    m.f1 = result.final_eval.f1;
    m.mean_turns = result.final_eval.mean_turns;
    if (m.em > result.best_em) {
      result.best_em = m.em;
      result.best_iter = iter;
      result.best_params = result.final_params;
    }
    if (result.iters_to_threshold == 0 && m.em >= config.run.em_threshold) {
      result.iters_to_threshold = iter;
    }
    if (config.run.wall_time) {
      m.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    }
    result.log.push_back(m);
    if (csv != nullptr) *csv << format_metrics_row(m) << "\n" << std::flush;
  }
  return result;
}

void write_checkpoint(const Checkpoint& c, std::ostream& out) {
  nlohmann::ordered_json j;
  j["kind"] = c.kind;
  j["config_hash"] = c.config_hash;
  j["corpus_hash"] = c.corpus_hash;
  j["shape"] = {{"max_turns", c.shape.max_turns},
                {"relations", c.shape.relations},
                {"entity_slots", c.shape.entity_slots}};
  j["temperature"] = c.temperature;
  j["version"] = c.params.version;
  j["params"] = c.params.values;
  out << j.dump(1) << "\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    Checkpoint c;
    c.kind = j.at("kind").get<std::string>();
    if (c.kind != "softmax" && c.kind != "scripted_oracle") {
      throw DataError("unknown checkpoint kind '" + c.kind + "'");
    }
    c.config_hash = j.at("config_hash").get<std::string>();
    c.corpus_hash = j.value("corpus_hash", std::string());
    const auto& s = j.at("shape");
    c.shape.max_turns = s.at("max_turns").get<int>();
    c.shape.relations = s.at("relations").get<int>();
    c.shape.entity_slots = s.at("entity_slots").get<int>();
    c.temperature = j.value("temperature", 1.0);
    c.params.version = j.value("version", uint64_t{0});
    c.params.values = j.value("params", std::vector<double>{});
    if (c.kind == "softmax" && c.params.values.size() != c.shape.num_params()) {
      throw DataError("checkpoint has " +
                      std::to_string(c.params.values.size()) +
                      " parameters, shape needs " +
                      std::to_string(c.shape.num_params()));
    }
    c.params.check_finite();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

std::unique_ptr<Policy> make_policy(const Checkpoint& c) {
  if (c.kind == "scripted_oracle") {
    return std::make_unique<ScriptedOraclePolicy>(c.shape);
  }
  return std::make_unique<SoftmaxPolicy>(c.shape, c.params, c.temperature);
}

}  // namespace hyperstep
