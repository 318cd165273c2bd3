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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rca/backend.hpp"
#include "rca/config.hpp"
#include "rca/diagnostics.hpp"
#include "rca/errors.hpp"
#include "rca/model.hpp"

// Iterative analysis loop: a re-ranking agent reorders candidates and picks
// the next one to inspect, a deep-dive agent reads that candidate's
// diagnostic bundle, and a remediation agent writes the final report. Every
// backend call lands in the transcript, malformed replies get one repair
// attempt before a deterministic fallback, and transport failures are
// retried once.
namespace rca::agents {

// Verbatim analysis text returned by one deep dive.
struct PodSummary {
  ServiceId service;
  int iteration = 0;  // 1-based dive index
  std::string text;
};

struct AgentDecision {
  enum class Kind { kFinish, kAnalyzeNext };
  Kind kind = Kind::kFinish;
  std::optional<ServiceId> target;  // set for kAnalyzeNext; appears in the ranking
  Ranking updated_ranking;
  std::string reasoning;
  bool fallback = false;  // deterministic path after a repair also failed
};

struct TranscriptEntry {
  std::size_t index = 0;  // backend call index, 0-based, includes retries
  std::string agent;      // "rerank" | "deep_dive" | "remediation"
  nlohmann::json request;
  std::optional<std::string> response;
  std::optional<std::string> error;
};

struct WorkflowState {
  Ranking r_metrics;
  Ranking r_trace;
  Ranking current;
  std::vector<ServiceId> visited;  // first-visit order
  std::map<ServiceId, int> visit_counts;
  std::vector<PodSummary> summaries;
  int iteration = 0;  // completed deep dives
  std::vector<TranscriptEntry> transcript;
};

struct Action {
  std::string step;
  std::string impact;
};

struct IncidentReport {
  std::string case_id;
  Ranking final_ranking;
  std::string summary;
  std::vector<Action> actions;
  bool degraded = false;  // remediation fell back to the template
  int iterations = 0;
};

// Raised when a rerank or deep-dive call fails transport twice. Carries the
// workflow state so callers can persist the transcript before exiting.
class WorkflowAborted : public BackendError {
 public:
  WorkflowAborted(const std::string& message, WorkflowState state)
      : BackendError(message),
        state_(std::make_shared<WorkflowState>(std::move(state))) {}
  const WorkflowState& state() const { return *state_; }

 private:
  std::shared_ptr<WorkflowState> state_;
};

// First parseable JSON object or array embedded in free text, found by
// balanced-brace scanning (string literals and escapes respected). Code
// fences need no special casing; they are just text around the braces.
std::optional<nlohmann::json> extract_first_json(const std::string& text);

// One re-ranking turn. Malformed replies get one repair prompt; if that
// also fails, the fallback keeps the current ranking and targets the first
// unvisited candidate (Finish when every candidate was visited).
AgentDecision rerank_step(WorkflowState& state, const IncidentCase& incident,
                          LlmBackend& backend);

// One deep dive: sends the bundle (chart attached only for vision-capable
// backends), appends the reply verbatim to state.summaries, increments
// state.iteration, records the visit.
void deep_dive_step(WorkflowState& state, const ServiceId& target,
                    const diag::DiagnosticBundle& bundle, LlmBackend& backend);

// Final report synthesis. A transport failure here degrades to a templated
// report built from recorded analysis instead of aborting the workflow.
IncidentReport remediation_step(WorkflowState& state, const IncidentCase& incident,
                                LlmBackend& backend);

struct WorkflowResult {
  IncidentReport report;
  WorkflowState state;
};

// Full loop, bounded by config.agents.max_iterations completed deep dives.
// The working ranking starts from r_metrics (r_trace when metrics produced
// nothing); both empty raises DataError. A pod may be re-analyzed at most
// once; further requests are redirected to the first unvisited candidate.
WorkflowResult run_workflow(const IncidentCase& incident, const Ranking& r_metrics,
                            const Ranking& r_trace, LlmBackend& backend,
                            const Config& config);

// One JSON line per transcript entry.
void write_transcript(const WorkflowState& state, const std::string& path);

nlohmann::json report_to_json(const IncidentReport& report);
IncidentReport report_from_json(const nlohmann::json& doc);
std::string render_report_text(const IncidentReport& report);

}  // namespace rca::agents
