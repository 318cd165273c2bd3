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

#include "rca/prompts.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

namespace rca::agents::prompts {

namespace {

std::string ranking_json(const Ranking& ranking) {
  nlohmann::json list = nlohmann::json::array();
  for (const Ranking::Entry& e : ranking.entries) {
    nlohmann::json item{{"candidate", e.candidate.name}, {"score", e.score}};
    if (e.rationale) item["rationale"] = *e.rationale;
    list.push_back(std::move(item));
  }
  return list.dump();
}

constexpr const char* kRerankSystem =
    "You are the re-ranking agent of a root-cause localization workflow for "
    "microservice incidents. You maintain a ranked list of candidate services "
    "ordered by how likely each one hosts the root cause. Each turn you revise "
    "the ranking in light of the newest analysis and either request a deep dive "
    "into one candidate or declare the investigation finished.\n\n";

constexpr const char* kDeepDiveSystem =
    "You are the deep-dive analysis agent of a root-cause localization workflow "
    "for microservice incidents. You receive the diagnostic evidence collected "
    "for one candidate service: its dependency subgraph, a windowed performance "
    "profile, and a refined excerpt of its logs (a chart image accompanies the "
    "profile when the transport supports it). Write a focused technical "
    "analysis: what the evidence shows, whether it is consistent with a fault "
    "in this service or points elsewhere, and which fault class fits best. End "
    "with a one-sentence verdict.\n\n";

constexpr const char* kRemediationSystem =
    "You are the remediation agent of a root-cause localization workflow for "
    "microservice incidents. Given the final candidate ranking and the recorded "
    "deep-dive analyses, write the closing incident report: a concise summary "
    "of the most plausible root cause and concrete remediation actions.\n\n";

}  // namespace

std::string fault_type_glossary() {
  return "Fault classes:\n"
         "- CPU: a process saturates processor time; compute-bound metrics climb.\n"
         "- DELAY: injected or emergent latency; downstream callers slow in step.\n"
         "- DISK: storage I/O pressure; disk throughput or wait metrics climb.\n"
         "- LOSS: packets dropped on a network path; retries and deadline errors.\n"
         "- MEM: a memory leak; resident memory ramps until pressure or OOM.\n"
         "- SOCKET: connection-level failures; resets, refused or timed-out sockets.\n";
}

std::string rerank_schema() {
  return "{\n"
         "  \"action\": \"finish\" | \"analyze_next\",\n"
         "  \"target\": \"<service>\"            (required when action is analyze_next;\n"
         "                                      must appear in ranking),\n"
         "  \"ranking\": [{\"candidate\": \"<service>\", \"score\": <0..1>,\n"
         "               \"rationale\": \"<why>\"}, ...],\n"
         "  \"reasoning\": \"<one paragraph>\"\n"
         "}";
}

std::string remediation_schema() {
  return "{\n"
         "  \"summary\": \"<root-cause summary>\",\n"
         "  \"actions\": [{\"step\": \"<what to do>\", \"impact\": \"<expected effect>\"}, ...],\n"
         "  \"confidence\": [{\"candidate\": \"<service>\", \"note\": \"<assessment>\"}, ...]\n"
         "}";
}

std::vector<ChatTurn> build_rerank_prompt(const WorkflowState& state,
                                          const diag::DependencySubgraph& context) {
  std::ostringstream user;
  user << "Current ranking:\n" << ranking_json(state.current) << "\n\n";
  user << "Initial metrics-based ranking:\n" << ranking_json(state.r_metrics) << "\n\n";
  user << "Initial trace-based ranking:\n" << ranking_json(state.r_trace) << "\n\n";

  user << "Visited so far:";
  if (state.visited.empty()) {
    user << " (none)";
  } else {
    for (const ServiceId& s : state.visited) user << " " << s.name;
  }
  user << "\n\n";

  if (!state.summaries.empty()) {
    const PodSummary& latest = state.summaries.back();
    user << "Latest deep-dive analysis (iteration " << latest.iteration << ", service "
         << latest.service.name << "):\n"
         << latest.text << "\n\n";
  } else {
    user << "No deep dive has been performed yet.\n\n";
  }

  user << "Dependency context:\n" << render_subgraph_text(context) << "\n";
  user << "Revise the ranking and choose the next step. Reply with ONLY a JSON "
          "object matching this schema:\n"
       << rerank_schema() << "\n";

  std::string system = std::string(kRerankSystem) + fault_type_glossary();
  return {{Role::kSystem, std::move(system), {}}, {Role::kUser, user.str(), {}}};
}

std::vector<ChatTurn> build_deep_dive_prompt(const ServiceId& target,
                                             const std::string& bundle_text,
                                             const std::optional<ImagePart>& chart) {
  std::ostringstream user;
  user << "Candidate service: " << target.name << "\n\n";
  user << bundle_text << "\n";
  user << "Analyze this evidence for candidate '" << target.name << "'.";

  ChatTurn user_turn{Role::kUser, user.str(), {}};
  if (chart) user_turn.images.push_back(*chart);

  std::string system = std::string(kDeepDiveSystem) + fault_type_glossary();
  return {{Role::kSystem, std::move(system), {}}, std::move(user_turn)};
}

std::vector<ChatTurn> build_remediation_prompt(const WorkflowState& state,
                                               const std::string& case_id) {
  std::ostringstream user;
  user << "Incident: " << case_id << "\n\n";
  user << "Final candidate ranking:\n" << ranking_json(state.current) << "\n\n";
  if (state.summaries.empty()) {
    user << "No deep-dive analyses were recorded.\n\n";
  } else {
    user << "Recorded deep-dive analyses, in order:\n\n";
    for (const PodSummary& s : state.summaries) {
      user << "--- iteration " << s.iteration << ": " << s.service.name << " ---\n"
           << s.text << "\n\n";
    }
  }
  user << "Write the incident report. Reply with ONLY a JSON object matching "
          "this schema:\n"
       << remediation_schema() << "\n";

  std::string system = std::string(kRemediationSystem) + fault_type_glossary();
  return {{Role::kSystem, std::move(system), {}}, {Role::kUser, user.str(), {}}};
}

std::vector<ChatTurn> build_repair_prompt(const std::vector<ChatTurn>& original,
                                          const std::string& bad_reply,
                                          const std::string& schema) {
  std::vector<ChatTurn> turns = original;
  turns.push_back({Role::kAssistant, bad_reply, {}});
  turns.push_back({Role::kUser,
                   "Your previous reply could not be parsed against the expected "
                   "schema. Reply again with ONLY a JSON object matching this "
                   "schema, with no surrounding prose or code fences:\n" +
                       schema + "\n",
                   {}});
  return turns;
}

}  // namespace rca::agents::prompts
