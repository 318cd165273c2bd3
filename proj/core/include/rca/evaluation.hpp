// Copyright 2026 rcakit contributors
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

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rca/agents.hpp"
#include "rca/backend.hpp"
#include "rca/model.hpp"

namespace rca::eval {

// One labeled case joined with its predicted ranking.
struct CaseOutcome {
  std::string case_id;
  FaultType fault = FaultType::kCpu;
  ServiceId truth;
  // 1-based position of the true service in the prediction, absent when the
  // prediction does not mention it at all.
  std::optional<int> rank;
};

struct Metrics {
  int cases = 0;
  std::vector<double> acc_at;  // acc_at[j-1] = AC@(j), j in 1..k
  std::vector<double> avg_at;  // avg_at[j-1] = Avg@(j) = mean of AC@1..AC@j
};

double acc_at_k(const std::vector<CaseOutcome>& outcomes, int k);
Metrics compute_metrics(const std::vector<CaseOutcome>& outcomes, int k_max);

struct SuiteEvaluation {
  std::vector<CaseOutcome> outcomes;  // sorted by case_id
  Metrics overall;
  std::map<FaultType, Metrics> by_fault;
  int k_max = 0;
};

struct CasePrediction {
  std::string case_id;
  Ranking ranking;
};

// Predictions file: JSON array of {case_id, ranking: [{candidate, score}]}.
std::vector<CasePrediction> load_predictions(const std::string& path);

// cases_dir holds one subdirectory per labeled case (each with a
// manifest.json). Every case needs exactly one prediction and every
// prediction must name a known case.
SuiteEvaluation evaluate_suite(const std::string& cases_dir,
                               const std::string& predictions_path, int k_max = 5);

// Column label used in summaries: CPU, Delay, Disk, Loss, Mem, Socket.
std::string fault_column_name(FaultType fault);

nlohmann::json summary_to_json(const SuiteEvaluation& suite);
std::string summary_to_csv(const SuiteEvaluation& suite);
std::string render_summary_text(const SuiteEvaluation& suite);

// SURE scoring: a grader model answers yes/no checklist questions about a
// report; each dimension maps to 1 + 4 * yes / total, the overall score is
// the unweighted mean over dimensions.
struct SureQuestion {
  std::string dimension;
  std::string text;
};

const std::vector<SureQuestion>& default_checklist();

struct SureAnswer {
  std::size_t question = 0;  // index into the checklist
  bool yes = false;
  bool flagged = false;           // reply unusable after one repair attempt
  bool transport_failed = false;  // both delivery attempts failed
};

struct SureResult {
  std::map<std::string, double> dimension_scores;
  double overall = 0.0;
  int questions_asked = 0;
  int transport_failures = 0;
  int flagged = 0;
  std::vector<SureAnswer> answers;
};

// Throws BackendError when more than half the questions fail at the
// transport layer; individual failures score as "no".
SureResult sure_score(const agents::IncidentReport& report, agents::LlmBackend& backend,
                      const std::vector<SureQuestion>& checklist = default_checklist());

nlohmann::json sure_to_json(const SureResult& result,
                            const std::vector<SureQuestion>& checklist = default_checklist());

}  // namespace rca::eval
