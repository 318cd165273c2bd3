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

#include "rca/agents.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <zlib.h>

#include "rca/prompts.hpp"

using nlohmann::json;

namespace rca::agents {

std::optional<json> extract_first_json(const std::string& text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    char open = text[i];
    if (open != '{' && open != '[') continue;

    std::vector<char> stack;
    bool in_string = false, escaped = false;
    for (std::size_t j = i; j < text.size(); ++j) {
      char c = text[j];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{' || c == '[') {
        stack.push_back(c);
      } else if (c == '}' || c == ']') {
        if (stack.empty()) break;
        char top = stack.back();
        if ((c == '}' && top != '{') || (c == ']' && top != '[')) break;
        stack.pop_back();
        if (stack.empty()) {
          try {
            return json::parse(text.substr(i, j - i + 1));
          } catch (const json::parse_error&) {
            break;  // resume scanning after this start position
          }
        }
      }
    }
  }
  return std::nullopt;
}

namespace {

json turns_to_json(const std::vector<ChatTurn>& turns) {
  json out = json::array();
  for (const ChatTurn& turn : turns) {
    json t{{"role", to_string(turn.role)}, {"text", turn.text}};
    if (!turn.images.empty()) {
      // Transcripts describe images instead of embedding them.
      json images = json::array();
      for (const ImagePart& image : turn.images) {
        images.push_back({{"mime", image.mime},
                          {"base64_chars", image.base64.size()},
                          {"crc32", ::crc32(0L,
                                            reinterpret_cast<const Bytef*>(image.base64.data()),
                                            static_cast<uInt>(image.base64.size()))}});
      }
      t["images"] = std::move(images);
    }
    out.push_back(std::move(t));
  }
  return out;
}

void record(WorkflowState& state, const char* agent, const std::vector<ChatTurn>& turns,
            std::optional<std::string> response, std::optional<std::string> error) {
  TranscriptEntry entry;
  entry.index = state.transcript.size();
  entry.agent = agent;
  entry.request = turns_to_json(turns);
  entry.response = std::move(response);
  entry.error = std::move(error);
  state.transcript.push_back(std::move(entry));
}

// One backend call with a single transport retry; every attempt becomes a
// transcript entry. Rethrows the second TransportError.
std::string call_logged(WorkflowState& state, LlmBackend& backend, const char* agent,
                       const std::vector<ChatTurn>& turns) {
  for (int attempt = 0;; ++attempt) {
    try {
      std::string reply = backend.complete(turns);
      record(state, agent, turns, reply, std::nullopt);
      return reply;
    } catch (const TransportError& e) {
      record(state, agent, turns, std::nullopt, std::string(e.what()));
      if (attempt == 1) throw;
    }
  }
}

int visits(const WorkflowState& state, const ServiceId& service) {
  auto it = state.visit_counts.find(service);
  return it == state.visit_counts.end() ? 0 : it->second;
}

std::optional<AgentDecision> parse_rerank(const std::string& reply,
                                          const std::set<ServiceId>& allowed) {
  auto doc = extract_first_json(reply);
  if (!doc || !doc->is_object()) return std::nullopt;

  std::string action = doc->value("action", "");
  if (action != "finish" && action != "analyze_next") return std::nullopt;

  auto ranking_it = doc->find("ranking");
  if (ranking_it == doc->end() || !ranking_it->is_array() || ranking_it->empty())
    return std::nullopt;

  Ranking ranking;
  for (const json& item : *ranking_it) {
    if (!item.is_object()) return std::nullopt;
    auto cand_it = item.find("candidate");
    auto score_it = item.find("score");
    if (cand_it == item.end() || !cand_it->is_string()) return std::nullopt;
    if (score_it == item.end() || !score_it->is_number()) return std::nullopt;
    Ranking::Entry entry;
    entry.candidate = ServiceId{cand_it->get<std::string>()};
    if (!allowed.count(entry.candidate)) return std::nullopt;
    entry.score = score_it->get<double>();
    auto rat_it = item.find("rationale");
    if (rat_it != item.end() && rat_it->is_string())
      entry.rationale = rat_it->get<std::string>();
    ranking.entries.push_back(std::move(entry));
  }
  // The model's order is advisory; scores are the contract.
  std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                   [](const Ranking::Entry& a, const Ranking::Entry& b) {
                     return a.score > b.score;
                   });
  if (!ranking.violations().empty()) return std::nullopt;

  AgentDecision decision;
  decision.updated_ranking = std::move(ranking);
  decision.reasoning = doc->value("reasoning", "");
  if (action == "finish") {
    decision.kind = AgentDecision::Kind::kFinish;
    return decision;
  }
  decision.kind = AgentDecision::Kind::kAnalyzeNext;
  auto target_it = doc->find("target");
  if (target_it == doc->end() || !target_it->is_string()) return std::nullopt;
  decision.target = ServiceId{target_it->get<std::string>()};
  if (!decision.updated_ranking.position_of(*decision.target)) return std::nullopt;
  return decision;
}

}  // namespace

AgentDecision rerank_step(WorkflowState& state, const IncidentCase& incident,
                          LlmBackend& backend) {
  ServiceId context_service = state.visited.empty()
                                  ? state.current.entries.front().candidate
                                  : state.visited.back();
  diag::DependencySubgraph context = diag::extract_subgraph(incident, context_service);
  std::vector<ChatTurn> turns = prompts::build_rerank_prompt(state, context);

  std::set<ServiceId> allowed;
  for (const ServiceId& s : incident.services()) allowed.insert(s);
  for (const auto& e : state.r_metrics.entries) allowed.insert(e.candidate);
  for (const auto& e : state.r_trace.entries) allowed.insert(e.candidate);
  for (const auto& e : state.current.entries) allowed.insert(e.candidate);

  std::string reply = call_logged(state, backend, "rerank", turns);
  auto decision = parse_rerank(reply, allowed);
  if (!decision) {
    std::vector<ChatTurn> repair =
        prompts::build_repair_prompt(turns, reply, prompts::rerank_schema());
    std::string second = call_logged(state, backend, "rerank", repair);
    decision = parse_rerank(second, allowed);
  }
  if (decision) return *decision;

  // Deterministic fallback: keep the ranking, walk to the first unvisited
  // candidate, or finish when there is none.
  AgentDecision fallback;
  fallback.updated_ranking = state.current;
  fallback.reasoning = "fallback: re-ranking reply unparseable after one repair attempt";
  fallback.fallback = true;
  for (const auto& entry : state.current.entries) {
    if (visits(state, entry.candidate) == 0) {
      fallback.kind = AgentDecision::Kind::kAnalyzeNext;
      fallback.target = entry.candidate;
      break;
    }
  }
  return fallback;
}

void deep_dive_step(WorkflowState& state, const ServiceId& target,
                    const diag::DiagnosticBundle& bundle, LlmBackend& backend) {
  std::optional<ImagePart> chart;
  if (backend.capabilities().vision && bundle.chart_png) {
    chart = ImagePart{"image/png",
                      base64_encode(bundle.chart_png->data(), bundle.chart_png->size())};
  }
  std::vector<ChatTurn> turns =
      prompts::build_deep_dive_prompt(target, bundle.text, chart);
  std::string reply = call_logged(state, backend, "deep_dive", turns);

  state.summaries.push_back({target, state.iteration + 1, reply});
  ++state.iteration;
  int& count = state.visit_counts[target];
  if (count == 0) state.visited.push_back(target);
  ++count;
}

namespace {

struct ParsedRemediation {
  std::string summary;
  std::vector<Action> actions;
  std::map<ServiceId, std::string> confidence_notes;
};

std::optional<ParsedRemediation> parse_remediation(const std::string& reply) {
  auto doc = extract_first_json(reply);
  if (!doc || !doc->is_object()) return std::nullopt;

  ParsedRemediation out;
  auto summary_it = doc->find("summary");
  if (summary_it == doc->end() || !summary_it->is_string()) return std::nullopt;
  out.summary = summary_it->get<std::string>();
  if (out.summary.empty()) return std::nullopt;

  auto actions_it = doc->find("actions");
  if (actions_it == doc->end() || !actions_it->is_array() || actions_it->empty())
    return std::nullopt;
  for (const json& item : *actions_it) {
    if (!item.is_object()) return std::nullopt;
    auto step_it = item.find("step");
    if (step_it == item.end() || !step_it->is_string() ||
        step_it->get<std::string>().empty())
      return std::nullopt;
    Action action;
    action.step = step_it->get<std::string>();
    auto impact_it = item.find("impact");
    if (impact_it != item.end() && impact_it->is_string())
      action.impact = impact_it->get<std::string>();
    out.actions.push_back(std::move(action));
  }

  auto conf_it = doc->find("confidence");
  if (conf_it != doc->end() && conf_it->is_array()) {
    for (const json& item : *conf_it) {
      if (!item.is_object()) continue;
      auto cand_it = item.find("candidate");
      auto note_it = item.find("note");
      if (cand_it == item.end() || !cand_it->is_string()) continue;
      if (note_it == item.end() || !note_it->is_string()) continue;
      out.confidence_notes[ServiceId{cand_it->get<std::string>()}] =
          note_it->get<std::string>();
    }
  }
  return out;
}

IncidentReport degraded_report(const WorkflowState& state, const std::string& case_id) {
  IncidentReport report;
  report.case_id = case_id;
  report.final_ranking = state.current;
  report.degraded = true;
  report.iterations = state.iteration;

  std::ostringstream summary;
  summary << "Automated report synthesis was unavailable; this report was "
             "assembled from recorded analysis. ";
  if (!state.current.entries.empty()) {
    const Ranking::Entry& top = state.current.entries.front();
    summary << "Leading candidate: " << top.candidate.name << " (score "
            << top.score << "). ";
  }
  if (state.summaries.empty()) {
    summary << "No deep dives were completed. ";
    auto name_tops = [](const Ranking& r) {
      std::string names;
      for (std::size_t i = 0; i < r.entries.size() && i < 3; ++i) {
        if (i > 0) names += ", ";
        names += r.entries[i].candidate.name;
      }
      return names.empty() ? std::string("(none)") : names;
    };
    summary << "Initial metrics ranking: " << name_tops(state.r_metrics)
            << ". Initial trace ranking: " << name_tops(state.r_trace) << ".";
  } else {
    summary << "Deep dives performed:";
    for (const PodSummary& s : state.summaries)
      summary << " " << s.service.name << " (iteration " << s.iteration << ")";
    summary << ".";
  }
  report.summary = summary.str();

  std::string top_name = state.current.entries.empty()
                             ? std::string("the leading candidate")
                             : state.current.entries.front().candidate.name;
  report.actions.push_back(
      {"Inspect service '" + top_name +
           "': recent deploys, resource limits, and error logs around the "
           "incident window.",
       "Confirms or rules out the top-ranked root cause."});
  return report;
}

}  // namespace

IncidentReport remediation_step(WorkflowState& state, const IncidentCase& incident,
                                LlmBackend& backend) {
  std::vector<ChatTurn> turns =
      prompts::build_remediation_prompt(state, incident.case_id);

  std::optional<ParsedRemediation> parsed;
  try {
    std::string reply = call_logged(state, backend, "remediation", turns);
    parsed = parse_remediation(reply);
    if (!parsed) {
      std::vector<ChatTurn> repair =
          prompts::build_repair_prompt(turns, reply, prompts::remediation_schema());
      std::string second = call_logged(state, backend, "remediation", repair);
      parsed = parse_remediation(second);
    }
  } catch (const TransportError&) {
    // A dead backend at the synthesis stage must not lose the analysis.
    return degraded_report(state, incident.case_id);
  }
  if (!parsed) return degraded_report(state, incident.case_id);

  IncidentReport report;
  report.case_id = incident.case_id;
  report.final_ranking = state.current;
  report.summary = parsed->summary;
  report.actions = parsed->actions;
  report.iterations = state.iteration;
  for (auto& entry : report.final_ranking.entries) {
    auto it = parsed->confidence_notes.find(entry.candidate);
    if (it != parsed->confidence_notes.end()) entry.rationale = it->second;
  }
  return report;
}

WorkflowResult run_workflow(const IncidentCase& incident, const Ranking& r_metrics,
                            const Ranking& r_trace, LlmBackend& backend,
                            const Config& config) {
  if (r_metrics.empty() && r_trace.empty())
    throw DataError("case '" + incident.case_id +
                    "': both initial rankings are empty; nothing to analyze");

  WorkflowState state;
  state.r_metrics = r_metrics;
  state.r_trace = r_trace;
  state.current = r_metrics.empty() ? r_trace : r_metrics;

  std::vector<ServiceId> services = incident.services();
  std::set<ServiceId> case_services(services.begin(), services.end());

  try {
    while (state.iteration < config.agents.max_iterations) {
      AgentDecision decision = rerank_step(state, incident, backend);
      state.current = decision.updated_ranking;
      if (decision.kind == AgentDecision::Kind::kFinish) break;

      // A target must be a service the case can actually produce evidence
      // for, and a pod is re-analyzed at most once.
      ServiceId target = *decision.target;
      bool eligible = case_services.count(target) > 0 && visits(state, target) < 2;
      if (!eligible) {
        bool found = false;
        for (const auto& entry : state.current.entries) {
          if (case_services.count(entry.candidate) > 0 &&
              visits(state, entry.candidate) == 0) {
            target = entry.candidate;
            found = true;
            break;
          }
        }
        if (!found) break;  // nothing left worth analyzing
      }

      diag::DiagnosticBundle bundle =
          diag::build_service_bundle(incident, target, config.diag);
      deep_dive_step(state, target, bundle, backend);
    }

    IncidentReport report = remediation_step(state, incident, backend);
    return {std::move(report), std::move(state)};
  } catch (const TransportError& e) {
    throw WorkflowAborted("workflow aborted: " + std::string(e.what()), std::move(state));
  }
}

void write_transcript(const WorkflowState& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write transcript to '" + path + "'");
  for (const TranscriptEntry& entry : state.transcript) {
    json line{{"index", entry.index}, {"agent", entry.agent}, {"request", entry.request}};
    if (entry.response) line["response"] = *entry.response;
    if (entry.error) line["error"] = *entry.error;
    out << line.dump() << "\n";
  }
}

nlohmann::json report_to_json(const IncidentReport& report) {
  json ranking = json::array();
  for (const Ranking::Entry& e : report.final_ranking.entries) {
    json item{{"candidate", e.candidate.name}, {"score", e.score}};
    if (e.rationale) item["rationale"] = *e.rationale;
    ranking.push_back(std::move(item));
  }
  json actions = json::array();
  for (const Action& a : report.actions)
    actions.push_back({{"step", a.step}, {"impact", a.impact}});
  return json{{"case_id", report.case_id},
              {"summary", report.summary},
              {"ranking", std::move(ranking)},
              {"actions", std::move(actions)},
              {"degraded", report.degraded},
              {"iterations", report.iterations},
              {"prompt_version", prompts::kPromptVersion}};
}

IncidentReport report_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw DataError("report: expected a JSON object");
  IncidentReport report;
  if (!doc.contains("case_id") || !doc["case_id"].is_string())
    throw DataError("report: missing string key 'case_id'");
  report.case_id = doc["case_id"].get<std::string>();
  if (!doc.contains("summary") || !doc["summary"].is_string())
    throw DataError("report: missing string key 'summary'");
  report.summary = doc["summary"].get<std::string>();
  report.degraded = doc.value("degraded", false);
  report.iterations = doc.value("iterations", 0);

  if (doc.contains("ranking")) {
    if (!doc["ranking"].is_array()) throw DataError("report: 'ranking' must be an array");
    for (const json& item : doc["ranking"]) {
      if (!item.is_object() || !item.contains("candidate") ||
          !item["candidate"].is_string() || !item.contains("score") ||
          !item["score"].is_number())
        throw DataError("report: malformed ranking entry");
      Ranking::Entry entry;
      entry.candidate = ServiceId{item["candidate"].get<std::string>()};
      entry.score = item["score"].get<double>();
      if (item.contains("rationale") && item["rationale"].is_string())
        entry.rationale = item["rationale"].get<std::string>();
      report.final_ranking.entries.push_back(std::move(entry));
    }
  }
  if (doc.contains("actions")) {
    if (!doc["actions"].is_array()) throw DataError("report: 'actions' must be an array");
    for (const json& item : doc["actions"]) {
      if (!item.is_object() || !item.contains("step") || !item["step"].is_string())
        throw DataError("report: malformed action entry");
      report.actions.push_back({item["step"].get<std::string>(), item.value("impact", "")});
    }
  }
  return report;
}

namespace {

std::string fixed4(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

}  // namespace

std::string render_report_text(const IncidentReport& report) {
  std::ostringstream os;
  os << "incident report: " << report.case_id << "\n";
  os << "analysis iterations: " << report.iterations << "\n";
  if (report.degraded)
    os << "note: report synthesis degraded to the built-in template\n";
  os << "\nsummary\n-------\n" << report.summary << "\n";

  os << "\nranked candidates\n-----------------\n";
  if (report.final_ranking.entries.empty()) {
    os << "(none)\n";
  } else {
    for (std::size_t i = 0; i < report.final_ranking.entries.size(); ++i) {
      const Ranking::Entry& e = report.final_ranking.entries[i];
      os << " " << (i + 1) << ". " << e.candidate.name << "  score "
         << fixed4(e.score) << "\n";
      if (e.rationale && !e.rationale->empty()) os << "    " << *e.rationale << "\n";
    }
  }

  os << "\nrecommended actions\n-------------------\n";
  if (report.actions.empty()) {
    os << "(none)\n";
  } else {
    for (std::size_t i = 0; i < report.actions.size(); ++i) {
      os << " " << (i + 1) << ". " << report.actions[i].step << "\n";
      if (!report.actions[i].impact.empty())
        os << "    impact: " << report.actions[i].impact << "\n";
    }
  }
  return os.str();
}

}  // namespace rca::agents
