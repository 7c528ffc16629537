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

#include "hyperstep/report.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "json.hpp"

namespace hyperstep {
namespace fs = std::filesystem;

RunSummary read_run_summary(const std::string& dir) {
  RunSummary s;
  s.dir = dir;
  const fs::path root(dir);
  if (!fs::exists(root / "metrics.csv")) {
    s.problem = "missing metrics.csv";
    return s;
  }
  std::ifstream in(root / "summary.json");
  if (!in) {
    s.problem = "missing summary.json";
    return s;
  }
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    s.mode = j.at("mode").get<std::string>();
    s.lambda1 = j.at("lambda1").get<double>();
    s.lambda2 = j.at("lambda2").get<double>();
    s.outcome_in_every_step = j.at("outcome_in_every_step").get<bool>();
    s.corpus_hash = j.at("corpus_hash").get<std::string>();
    const auto& f = j.at("final");
    s.em = f.at("em").get<double>();
    s.f1 = f.at("f1").get<double>();
    s.mean_turns = f.at("mean_turns").get<double>();
    s.complete = true;
  } catch (const std::exception& e) {
    s.problem = std::string("unreadable summary.json: ") + e.what();
  }
  return s;
}

namespace {

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string fmt(const MeanStd& m) {
  return m.std ? fmt(m.mean) + " ± " + fmt(*m.std) : fmt(m.mean);
}

}  // namespace

Report build_report(std::span<const RunSummary> runs) {
  Report report;
  using Key = std::tuple<std::string, double, double, bool, std::string>;
  std::map<Key, std::vector<const RunSummary*>> groups;
  std::set<std::string> hashes;
  for (const RunSummary& r : runs) {
    if (!r.complete) continue;
    groups[{r.mode, r.lambda1, r.lambda2, r.outcome_in_every_step,
            r.corpus_hash}]
        .push_back(&r);
    hashes.insert(r.corpus_hash);
  }
  if (hashes.size() > 1) {
    report.warnings.push_back(
        "WARNING: runs cover " + std::to_string(hashes.size()) +
        " different corpora; rows are kept separate per corpus hash");
  }
  for (const auto& [key, members] : groups) {
    ReportRow row;
    std::tie(row.mode, row.lambda1, row.lambda2, row.outcome_in_every_step,
             row.corpus_hash) = key;
    row.runs = members.size();
    std::vector<double> em, f1, turns;
    for (const RunSummary* r : members) {
      em.push_back(r->em);
      f1.push_back(r->f1);
      turns.push_back(r->mean_turns);
    }
    row.em = mean_std(em);
    row.f1 = mean_std(f1);
    row.mean_turns = mean_std(turns);
    report.rows.push_back(std::move(row));
  }
  for (const RunSummary& r : runs) {
    if (r.complete) continue;
    ReportRow row;
    row.incomplete = true;
    row.note = r.dir + ": " + r.problem;
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_report_csv(const Report& report, std::ostream& out) {
  out << "mode,lambda1,lambda2,outcome_in_every_step,corpus_hash,runs,"
         "em_mean,em_std,f1_mean,f1_std,mean_turns_mean,mean_turns_std,"
         "status\n";
  auto cell = [](const MeanStd& m) {
    return fmt(m.mean) + "," + (m.std ? fmt(*m.std) : "");
  };
  for (const ReportRow& r : report.rows) {
    if (r.incomplete) {
      out << ",,,,,0,,,,,,,\"incomplete: " << r.note << "\"\n";
      continue;
    }
    out << r.mode << "," << fmt(r.lambda1) << "," << fmt(r.lambda2) << ","
        << (r.outcome_in_every_step ? "true" : "false") << "," << r.corpus_hash
        << "," << r.runs << "," << cell(r.em) << "," << cell(r.f1) << ","
        << cell(r.mean_turns) << ",ok\n";
  }
}

void write_report_text(const Report& report, std::ostream& out) {
  for (const std::string& w : report.warnings) out << w << "\n";
  char line[512];
  std::snprintf(line, sizeof(line), "%-16s %-8s %-8s %-6s %-16s %4s  %-18s %-18s %-18s\n",
                "mode", "lambda1", "lambda2", "every", "corpus", "runs", "EM",
                "F1", "mean_turns");
  out << line;
  for (const ReportRow& r : report.rows) {
    if (r.incomplete) {
      out << "INCOMPLETE  " << r.note << "\n";
      continue;
    }
    std::snprintf(line, sizeof(line),
                  "%-16s %-8s %-8s %-6s %-16s %4zu  %-18s %-18s %-18s\n",
                  r.mode.c_str(), fmt(r.lambda1).c_str(),
                  fmt(r.lambda2).c_str(),
                  r.outcome_in_every_step ? "yes" : "no",
                  r.corpus_hash.c_str(), r.runs, fmt(r.em).c_str(),
                  fmt(r.f1).c_str(), fmt(r.mean_turns).c_str());
    out << line;
  }
}

}  // namespace hyperstep
