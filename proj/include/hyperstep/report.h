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

#ifndef HYPERSTEP_REPORT_H_
#define HYPERSTEP_REPORT_H_

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hyperstep {

// What a finished run directory records about itself.
struct RunSummary {
  std::string dir;
  bool complete = false;
  std::string problem;  // why the run is incomplete
  std::string mode;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool outcome_in_every_step = true;
  std::string corpus_hash;
  double em = 0.0;
  double f1 = 0.0;
  double mean_turns = 0.0;
};

// Reads <dir>/summary.json and checks <dir>/metrics.csv exists.
RunSummary read_run_summary(const std::string& dir);

struct MeanStd {
  double mean = 0.0;
  std::optional<double> std;  // sample std; absent for a single run
};

struct ReportRow {
  std::string mode;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool outcome_in_every_step = true;
  std::string corpus_hash;
  size_t runs = 0;
  bool incomplete = false;
  std::string note;
  MeanStd em, f1, mean_turns;
};

struct Report {
  std::vector<ReportRow> rows;
  std::vector<std::string> warnings;
};

// Groups complete runs by (mode, lambda1, lambda2, outcome_in_every_step,
// corpus hash); each incomplete run becomes its own flagged row. Runs over
// different corpora are never pooled and trigger a warning.
Report build_report(std::span<const RunSummary> runs);

void write_report_csv(const Report& report, std::ostream& out);
void write_report_text(const Report& report, std::ostream& out);

}  // namespace hyperstep

#endif  // HYPERSTEP_REPORT_H_
