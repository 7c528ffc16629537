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

#include "hyperstep/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "hyperstep/errors.h"
#include "hyperstep/rng.h"

namespace hyperstep {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("invalid integer for " + std::string(key) + ": '" +
                      std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(out)) {
    throw ConfigError("invalid number for " + std::string(key) + ": '" + s +
                      "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  std::string s(v);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("invalid boolean for " + std::string(key) + ": '" + s +
                    "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Field {
  std::function<void(ExperimentConfig*, std::string_view key,
                     std::string_view value)>
      set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field int_field(T ExperimentConfig::*outer, int T::*inner) {
  return {[=](ExperimentConfig* c, std::string_view k, std::string_view v) {
            (c->*outer).*inner = parse_int<int>(k, v);
          },
          [=](const ExperimentConfig& c) {
            return std::to_string(c.*outer.*inner);
          }};
}

template <typename T>
Field double_field(T ExperimentConfig::*outer, double T::*inner) {
  return {[=](ExperimentConfig* c, std::string_view k, std::string_view v) {
            (c->*outer).*inner = parse_double(k, v);
          },
          [=](const ExperimentConfig& c) {
            return format_double(c.*outer.*inner);
          }};
}

const std::map<std::string, Field>& fields() {
  using C = ExperimentConfig;
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> f;
    f["corpus.n_entities"] = int_field(&C::corpus, &CorpusSpec::n_entities);
    f["corpus.n_chains"] = int_field(&C::corpus, &CorpusSpec::n_chains);
    f["corpus.hops"] = int_field(&C::corpus, &CorpusSpec::hops);
    f["corpus.distractors_per_chain"] =
        int_field(&C::corpus, &CorpusSpec::distractors_per_chain);
    f["corpus.families"] = int_field(&C::corpus, &CorpusSpec::families);
    f["corpus.hubs_per_family"] =
        int_field(&C::corpus, &CorpusSpec::hubs_per_family);
    f["corpus.solvable_k"] = int_field(&C::corpus, &CorpusSpec::solvable_k);
    f["corpus.same_relation_rate"] =
        double_field(&C::corpus, &CorpusSpec::same_relation_rate);
    f["corpus.certify"] = {
        [](C* c, std::string_view k, std::string_view v) {
          c->corpus.certify = parse_bool(k, v);
        },
        [](const C& c) {
          return std::string(c.corpus.certify ? "true" : "false");
        }};
    f["corpus.corpus_seed"] = {
        [](C* c, std::string_view k, std::string_view v) {
          c->corpus.seed = parse_int<uint64_t>(k, v);
        },
        [](const C& c) { return std::to_string(c.corpus.seed); }};
    f["corpus.path"] = {
        [](C* c, std::string_view, std::string_view v) {
          c->corpus_path = std::string(v);
        },
        [](const C& c) { return c.corpus_path; }};

    f["corpus.tasks_path"] = {
        [](C* c, std::string_view, std::string_view v) {
          c->tasks_path = std::string(v);
        },
        [](const C& c) { return c.tasks_path; }};

    f["retrieval.mode"] = {
        [](C* c, std::string_view, std::string_view v) {
          c->mode = parse_retrieval_mode(v);
        },
        [](const C& c) { return std::string(retrieval_mode_name(c.mode)); }};
    f["retrieval.k"] = {
        [](C* c, std::string_view k, std::string_view v) {
          c->k = parse_int<int>(k, v);
        },
        [](const C& c) { return std::to_string(c.k); }};
    f["retrieval.embedding_dim"] = {
        [](C* c, std::string_view k, std::string_view v) {
          c->embedding_dim = parse_int<int>(k, v);
        },
        [](const C& c) { return std::to_string(c.embedding_dim); }};
    f["retrieval.embedding_seed"] = {
        [](C* c, std::string_view k, std::string_view v) {
          c->embedding_seed = parse_int<uint64_t>(k, v);
        },
        [](const C& c) { return std::to_string(c.embedding_seed); }};
    f["retrieval.embeddings"] = {
        [](C* c, std::string_view, std::string_view v) {
          c->embeddings_path = std::string(v);
        },
        [](const C& c) { return c.embeddings_path; }};

    f["reward.lambda1"] = double_field(&C::reward, &RewardConfig::lambda1);
    f["reward.lambda2"] = double_field(&C::reward, &RewardConfig::lambda2);
    f["reward.rollouts_m"] = int_field(&C::reward, &RewardConfig::rollouts_m);
    f["reward.accuracy_weight"] =
        double_field(&C::reward, &RewardConfig::accuracy_weight);
    f["reward.format_weight"] =
        double_field(&C::reward, &RewardConfig::format_weight);
    f["reward.outcome_in_every_step"] = {
        [](C* c, std::string_view k, std::string_view v) {
          c->reward.outcome_in_every_step = parse_bool(k, v);
        },
        [](const C& c) {
          return std::string(c.reward.outcome_in_every_step ? "true" : "false");
        }};

    f["reward.state_entities"] = {
        [](C* c, std::string_view, std::string_view v) {
          if (v == "full") {
            c->reward.state_entities = StateEntities::kFullState;
          } else if (v == "queries") {
            c->reward.state_entities = StateEntities::kQueries;
          } else {
            throw ConfigError("reward.state_entities must be full or queries");
          }
        },
        [](const C& c) {
          return std::string(c.reward.state_entities == StateEntities::kQueries
                                 ? "queries"
                                 : "full");
        }};

    using T = TrainingOptions;
    f["optimizer.n"] = int_field(&C::train, &T::group_size);
    f["optimizer.batch_questions"] = int_field(&C::train, &T::batch_questions);
    f["optimizer.iterations"] = int_field(&C::train, &T::iterations);
    f["optimizer.update_epochs"] = int_field(&C::train, &T::update_epochs);
    f["optimizer.max_turns"] = int_field(&C::train, &T::max_turns);
    f["optimizer.entity_slots"] = int_field(&C::train, &T::entity_slots);
    f["optimizer.eps_norm"] = double_field(&C::train, &T::eps_norm);
    f["optimizer.temperature"] = double_field(&C::train, &T::temperature);
    f["optimizer.eps_clip"] = {
        [](C* c, std::string_view k, std::string_view v) {
          c->train.objective.eps_clip = parse_double(k, v);
        },
        [](const C& c) { return format_double(c.train.objective.eps_clip); }};
    f["optimizer.beta"] = {
        [](C* c, std::string_view k, std::string_view v) {
          c->train.objective.beta = parse_double(k, v);
        },
        [](const C& c) { return format_double(c.train.objective.beta); }};
    f["optimizer.learning_rate"] = {
        [](C* c, std::string_view k, std::string_view v) {
          c->train.optimizer.learning_rate = parse_double(k, v);
        },
        [](const C& c) {
          return format_double(c.train.optimizer.learning_rate);
        }};
    f["optimizer.kind"] = {
        [](C* c, std::string_view, std::string_view v) {
          c->train.optimizer.kind = parse_optimizer_kind(v);
        },
        [](const C& c) {
          return std::string(optimizer_kind_name(c.train.optimizer.kind));
        }};

    f["optimizer.step_advantage"] = {
        [](C* c, std::string_view, std::string_view v) {
          c->train.advantage_mode = parse_step_advantage_mode(v);
        },
        [](const C& c) {
          return std::string(step_advantage_mode_name(c.train.advantage_mode));
        }};

    f["run.seed"] = {
        [](C* c, std::string_view k, std::string_view v) {
          c->run.seed = parse_int<uint64_t>(k, v);
        },
        [](const C& c) { return std::to_string(c.run.seed); }};
    f["run.threads"] = {
        [](C* c, std::string_view k, std::string_view v) {
          c->run.threads = parse_int<int>(k, v);
        },
        [](const C& c) { return std::to_string(c.run.threads); }};
    f["run.wall_time"] = {
        [](C* c, std::string_view k, std::string_view v) {
          c->run.wall_time = parse_bool(k, v);
        },
        [](const C& c) {
          return std::string(c.run.wall_time ? "true" : "false");
        }};
    f["run.em_threshold"] = {
        [](C* c, std::string_view k, std::string_view v) {
          c->run.em_threshold = parse_double(k, v);
        },
        [](const C& c) { return format_double(c.run.em_threshold); }};
    f["run.out_dir"] = {
        [](C* c, std::string_view, std::string_view v) {
          c->run.out_dir = std::string(v);
        },
        [](const C& c) { return c.run.out_dir; }};
    return f;
  }();
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  reward.validate();
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(corpus.n_entities >= 1, "corpus.n_entities must be >= 1");
  require(corpus_path.empty() == tasks_path.empty(),
          "corpus.path and corpus.tasks_path must be set together");
  require(k >= 1, "retrieval.k must be >= 1");
  require(embedding_dim >= 2, "retrieval.embedding_dim must be >= 2");
  require(train.group_size >= 2, "optimizer.n must be >= 2");
  require(train.batch_questions >= 1, "optimizer.batch_questions must be >= 1");
  require(train.iterations >= 0, "optimizer.iterations must be >= 0");
  require(train.update_epochs >= 1, "optimizer.update_epochs must be >= 1");
  require(train.max_turns >= 1, "optimizer.max_turns must be >= 1");
  require(train.entity_slots >= 2, "optimizer.entity_slots must be >= 2");
  require(train.eps_norm > 0.0, "optimizer.eps_norm must be > 0");
  require(train.temperature > 0.0, "optimizer.temperature must be > 0");
  require(train.objective.eps_clip > 0.0 && train.objective.eps_clip < 1.0,
          "optimizer.eps_clip must be in (0, 1)");
  require(train.objective.beta >= 0.0, "optimizer.beta must be >= 0");
  require(train.optimizer.learning_rate > 0.0,
          "optimizer.learning_rate must be > 0");
  require(run.threads >= 1, "run.threads must be >= 1");
}

void set_config_value(ExperimentConfig* config, std::string_view key,
                      std::string_view value) {
  std::string k(trim(key));
  std::transform(k.begin(), k.end(), k.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  auto it = fields().find(k);
  if (it == fields().end()) throw ConfigError("unknown config key '" + k + "'");
  it->second.set(config, k, trim(value));
}

void apply_override(ExperimentConfig* config, std::string_view assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override must look like section.key=value, got '" +
                      std::string(assignment) + "'");
  }
  set_config_value(config, assignment.substr(0, eq),
                   assignment.substr(eq + 1));
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::string section;
  std::set<std::string> seen;
  size_t lineno = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++lineno;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const std::string where = "config line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where + "expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    if (key.find('.') == std::string::npos) {
      if (section.empty()) {
        throw ConfigError(where + "key '" + key + "' outside a section");
      }
      key = section + "." + key;
    }
    if (!seen.insert(key).second) {
      throw ConfigError(where + "duplicate key '" + key + "'");
    }
    try {
      set_config_value(&config, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_config(const ExperimentConfig& config,
                             bool include_run) {
  std::string out;
  for (const auto& [key, field] : fields()) {
    if (!include_run && key.rfind("run.", 0) == 0) continue;
    if (key == "run.out_dir") continue;  // where a run lands is not its input
    out += key + "=" + field.get(config) + "\n";
  }
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  return hex64(fnv1a64(canonical_config(config, false)));
}

}  // namespace hyperstep
