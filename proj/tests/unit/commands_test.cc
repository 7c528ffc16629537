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


#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.h"
#include "hyperstep/commands.h"
#include "hyperstep/config.h"
#include "hyperstep/trainer.h"
#include "json.hpp"

namespace hyperstep {
namespace {

namespace fs = std::filesystem;
using testing::read_file;
using testing::scratch_dir;

const std::string kData = HYPERSTEP_TEST_DATA;

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::string chain_index(const fs::path& dir) {
  const std::string index = (dir / "chain.idx").string();
  std::ostringstream out, err;
  REQUIRE(cmd_ingest(kData + "/chain.jsonl", index, out, err) == kExitOk);
  return index;
}

fs::path write_config(const fs::path& dir, const ExperimentConfig& config) {
  const fs::path path = dir / "run.cfg";
  std::ofstream(path) << canonical_config(config);
  return path;
}

TEST_CASE("ingest reports statistics") {
  const fs::path dir = scratch_dir("cmd_ingest");
  std::ostringstream out, err;
  REQUIRE(cmd_ingest(kData + "/chain.jsonl", (dir / "a.idx").string(), out,
                     err) == kExitOk);
  CHECK(out.str().find("|V|=4 |E|=3") != std::string::npos);
  CHECK(out.str().find("duplicates_collapsed=0") != std::string::npos);
  CHECK(out.str().find("degree_histogram 1:2 2:2") != std::string::npos);
  CHECK(fs::exists(dir / "a.idx"));

  const fs::path dup = dir / "dup.jsonl";
  {
    std::ofstream f(dup);
    f << read_file(kData + "/chain.jsonl");
    f << R"({"text": "Ada Lark mentored Bo Crane", "entities": ["Bo Crane", "Ada Lark"]})"
      << "\n";
    f << R"({"text": "no entities", "entities": []})" << "\n";
  }
  std::ostringstream out2, err2;
  REQUIRE(cmd_ingest(dup.string(), (dir / "b.idx").string(), out2, err2) ==
          kExitOk);
  CHECK(out2.str().find("|E|=3") != std::string::npos);
  CHECK(out2.str().find("duplicates_collapsed=1") != std::string::npos);
  CHECK(out2.str().find("rejected=1") != std::string::npos);
  CHECK(err2.str().find("rejected line 5") != std::string::npos);
}

TEST_CASE("ingest failures exit nonzero with a message") {
  const fs::path dir = scratch_dir("cmd_ingest_bad");
  std::ostringstream out, err;
  CHECK(cmd_ingest(kData + "/empty.jsonl", (dir / "x.idx").string(), out,
                   err) == kExitData);
  CHECK(!err.str().empty());
  CHECK(!fs::exists(dir / "x.idx"));
  std::ostringstream out2, err2;
  CHECK(cmd_ingest((dir / "missing.jsonl").string(),
                   (dir / "y.idx").string(), out2, err2) == kExitData);
}

TEST_CASE("query prints one json line per fact") {
  const fs::path dir = scratch_dir("cmd_query");
  QueryOptions q;
  q.index = chain_index(dir);
  q.text = "Who did Ada Lark mentor?";
  q.k = 1;
  q.explain = true;
  std::ostringstream out, err;
  REQUIRE(cmd_query(q, out, err) == kExitOk);
  auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 1);
  auto j = nlohmann::json::parse(lines[0]);
  CHECK(j["text"] == "Ada Lark mentored Bo Crane");
  CHECK(j["mode"] == "informativeness");
  CHECK(j["truncated"] == false);
  CHECK(j.contains("breakdown"));

  q.k = 10;
  q.explain = false;
  std::ostringstream all, err2;
  REQUIRE(cmd_query(q, all, err2) == kExitOk);
  auto all_lines = lines_of(all.str());
  REQUIRE(all_lines.size() == 3);
  CHECK(nlohmann::json::parse(all_lines[0])["truncated"] == true);
  CHECK(!nlohmann::json::parse(all_lines[0]).contains("breakdown"));

  q.text = "nothing known here";
  q.k = 2;
  std::ostringstream fb, err3;
  REQUIRE(cmd_query(q, fb, err3) == kExitOk);
  CHECK(nlohmann::json::parse(lines_of(fb.str())[0])["mode"] == "baseline");

  q.entities = {"Dunmore"};
  q.k = 1;
  std::ostringstream ex, err4;
  REQUIRE(cmd_query(q, ex, err4) == kExitOk);
  CHECK(nlohmann::json::parse(ex.str())["text"] ==
        "Cyd Marsh Works is based in Dunmore");
}

TEST_CASE("query errors map to exit codes") {
  const fs::path dir = scratch_dir("cmd_query_bad");
  QueryOptions q;
  q.index = chain_index(dir);
  q.text = "Ada Lark";
  std::ostringstream out, err;
  q.k = 0;
  CHECK(cmd_query(q, out, err) == kExitUsage);
  q.k = 2;
  q.mode = "dense";
  CHECK(cmd_query(q, out, err) == kExitUsage);
  q.mode = "baseline";
  q.entities = {"Nobody"};
  CHECK(cmd_query(q, out, err) == kExitData);
  q.entities.clear();
  q.index = (dir / "missing.idx").string();
  CHECK(cmd_query(q, out, err) == kExitData);
  CHECK(out.str().empty());
}

TEST_CASE("serve over stdio") {
  const fs::path dir = scratch_dir("cmd_serve");
  ServeOptions s;
  s.index = chain_index(dir);
  std::istringstream in(
      "{\"id\": 1, \"query\": \"Ada Lark\"}\n{\"id\": 2, \"query\": 3}\n");
  std::ostringstream out, err;
  REQUIRE(cmd_serve(s, in, out, err) == kExitOk);
  auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 2);
  CHECK(nlohmann::json::parse(lines[0])["facts"].size() == 2);
  CHECK(nlohmann::json::parse(lines[1]).contains("error"));
}

TEST_CASE("train writes a complete, reproducible run directory") {
  const fs::path dir = scratch_dir("cmd_train");
  ExperimentConfig config = testing::small_config();
  const fs::path cfg = write_config(dir, config);
  const char* files[] = {"config.txt",          "corpus.jsonl",
                         "tasks.jsonl",         "metrics.csv",
                         "checkpoint_best.json", "checkpoint_final.json",
                         "summary.json"};
  std::ostringstream out1, err1, out4, err4;
  REQUIRE(cmd_train(cfg.string(), {"run.threads=1"}, (dir / "t1").string(),
                    out1, err1) == kExitOk);
  REQUIRE(cmd_train(cfg.string(), {"run.threads=4"}, (dir / "t4").string(),
                    out4, err4) == kExitOk);
  for (const char* f : files) {
    INFO(f);
    REQUIRE(fs::exists(dir / "t1" / f));
    if (std::string(f) == "config.txt") continue;  // records run.threads
    CHECK(read_file(dir / "t1" / f) == read_file(dir / "t4" / f));
  }
  auto metrics = lines_of(read_file(dir / "t1" / "metrics.csv"));
  int rows = 0;
  for (const std::string& l : metrics) {
    if (!l.empty() && l[0] != '#' && l.rfind("iter,", 0) != 0) ++rows;
  }
  CHECK(rows == config.train.iterations);
  auto summary = nlohmann::json::parse(read_file(dir / "t1" / "summary.json"));
  CHECK(summary["config_hash"] == config_hash(config));
  CHECK(out1.str() == out4.str());
}

TEST_CASE("train with zero iterations writes only the header") {
  const fs::path dir = scratch_dir("cmd_train_zero");
  const fs::path cfg = write_config(dir, testing::small_config());
  std::ostringstream out, err;
  REQUIRE(cmd_train(cfg.string(), {"optimizer.iterations=0"},
                    (dir / "run").string(), out, err) == kExitOk);
  for (const std::string& l :
       lines_of(read_file(dir / "run" / "metrics.csv"))) {
    CHECK((l.empty() || l[0] == '#' || l.rfind("iter,", 0) == 0));
  }
  CHECK(read_file(dir / "run" / "metrics.csv").find(kMetricsHeader) !=
        std::string::npos);
}

TEST_CASE("invalid training config fails before any output") {
  const fs::path dir = scratch_dir("cmd_train_bad");
  const fs::path cfg = write_config(dir, testing::small_config());
  std::ostringstream out, err;
  CHECK(cmd_train(cfg.string(), {"reward.lambda1=-0.5"},
                  (dir / "run").string(), out, err) == kExitUsage);
  CHECK(err.str().find("lambda1") != std::string::npos);
  CHECK(!fs::exists(dir / "run"));
  CHECK(cmd_train(cfg.string(), {"reward.no_such_key=1"},
                  (dir / "run").string(), out, err) == kExitUsage);
  CHECK(cmd_train((dir / "missing.cfg").string(), {}, (dir / "run").string(),
                  out, err) != kExitOk);
}

TEST_CASE("eval scores checkpoints and checks hashes") {
  const fs::path dir = scratch_dir("cmd_eval");
  ExperimentConfig config = testing::small_config();
  const fs::path cfg = write_config(dir, config);
  Checkpoint ckpt;
  ckpt.kind = "scripted_oracle";
  {
    Experiment experiment(config);
    ckpt.shape = experiment.env().policy_shape();
    ckpt.corpus_hash = experiment.corpus_hash();
  }
  ckpt.config_hash = config_hash(config);
  const fs::path oracle = dir / "oracle.json";
  {
    std::ofstream f(oracle);
    write_checkpoint(ckpt, f);
  }
  std::ostringstream out, err;
  REQUIRE(cmd_eval(cfg.string(), {}, oracle.string(), out, err) == kExitOk);
  auto j = nlohmann::json::parse(out.str());
  CHECK(j["em"] == doctest::Approx(1.0));
  CHECK(j["f1"].get<double>() >= j["em"].get<double>());
  CHECK(j["n_tasks"].get<int>() > 0);

  std::ostringstream out2, err2;
  CHECK(cmd_eval(cfg.string(), {"reward.lambda1=0.25"}, oracle.string(), out2,
                 err2) == kExitUsage);
  CHECK(err2.str().find("hash") != std::string::npos);

  std::ostringstream tout, terr;
  REQUIRE(cmd_train(cfg.string(), {}, (dir / "run").string(), tout, terr) ==
          kExitOk);
  std::ostringstream out3, err3;
  REQUIRE(cmd_eval(cfg.string(), {"run.threads=3"},
                   (dir / "run" / "checkpoint_final.json").string(), out3,
                   err3) == kExitOk);
  auto e = nlohmann::json::parse(out3.str());
  auto s = nlohmann::json::parse(read_file(dir / "run" / "summary.json"));
  CHECK(e["em"] == s["final"]["em"]);
  CHECK(e["f1"].get<double>() >= e["em"].get<double>());
}

TEST_CASE("report aggregates runs by configuration") {
  const fs::path dir = scratch_dir("cmd_report");
  ExperimentConfig base = testing::small_config();
  base.train.iterations = 1;
  const fs::path cfg = write_config(dir, base);
  struct Variant {
    std::string name;
    std::vector<std::string> overrides;
  };
  const std::vector<Variant> variants = {
      {"dense", {}},
      {"outcome", {"reward.lambda1=0", "reward.lambda2=0"}},
      {"baseline", {"retrieval.mode=baseline"}},
      {"sparse", {"reward.outcome_in_every_step=false"}},
  };
  std::vector<std::string> dirs;
  for (const Variant& v : variants) {
    for (int seed : {1, 2}) {
      auto o = v.overrides;
      o.push_back("run.seed=" + std::to_string(seed));
      const std::string d = (dir / (v.name + std::to_string(seed))).string();
      std::ostringstream out, err;
      REQUIRE(cmd_train(cfg.string(), o, d, out, err) == kExitOk);
      dirs.push_back(d);
    }
  }
  const std::string csv = (dir / "report.csv").string();
  std::ostringstream out, err;
  REQUIRE(cmd_report(dirs, csv, out, err) == kExitOk);
  auto rows = lines_of(read_file(csv));
  REQUIRE(rows.size() == 5);
  for (size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].find(",2,") != std::string::npos);
    CHECK(rows[i].find(",ok") != std::string::npos);
  }
  CHECK(err.str().empty());

  std::ostringstream single, err2;
  REQUIRE(cmd_report({dirs[0]}, csv, single, err2) == kExitOk);
  rows = lines_of(read_file(csv));
  REQUIRE(rows.size() == 2);
  CHECK(single.str().find("±") == std::string::npos);
  CHECK(rows[1].find(",,") != std::string::npos);

  const std::string other = (dir / "other_corpus").string();
  std::ostringstream tout, terr;
  REQUIRE(cmd_train(cfg.string(), {"corpus.corpus_seed=99"}, other, tout,
                    terr) == kExitOk);
  const std::string broken = (dir / "broken").string();
  fs::create_directories(broken);
  std::ostringstream mixed, err3;
  REQUIRE(cmd_report({dirs[0], other, broken}, "", mixed, err3) == kExitOk);
  CHECK(err3.str().find("WARNING") != std::string::npos);
  CHECK(mixed.str().find("INCOMPLETE") != std::string::npos);

  std::ostringstream none, err4;
  CHECK(cmd_report({}, "", none, err4) == kExitUsage);
}

}  // namespace
}  // namespace hyperstep
