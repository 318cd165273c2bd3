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

#include "rca/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "json_util.hpp"
#include "rca/ingest.hpp"
#include "rca/prompts.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rca::eval {

double acc_at_k(const std::vector<CaseOutcome>& outcomes, int k) {
  if (outcomes.empty()) return 0.0;
  int hits = 0;
  for (const CaseOutcome& o : outcomes)
    if (o.rank && *o.rank <= k) ++hits;
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

Metrics compute_metrics(const std::vector<CaseOutcome>& outcomes, int k_max) {
  if (k_max < 1) throw UsageError("evaluation requires k >= 1");
  Metrics m;
  m.cases = static_cast<int>(outcomes.size());
  double running = 0.0;
  for (int j = 1; j <= k_max; ++j) {
    double acc = acc_at_k(outcomes, j);
    running += acc;
    m.acc_at.push_back(acc);
    m.avg_at.push_back(running / j);
  }
  return m;
}

std::vector<CasePrediction> load_predictions(const std::string& path) {
  json doc = jsonutil::read_json_file(path);
  if (!doc.is_array())
    throw DataError(path + ": predictions must be a JSON array");

  std::vector<CasePrediction> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    std::string ctx = path + ": prediction " + std::to_string(i);
    if (!item.is_object()) throw DataError(ctx + ": expected an object");
    for (const auto& [key, value] : item.items()) {
      (void)value;
      if (key != "case_id" && key != "ranking")
        throw DataError(ctx + ": unknown key '" + key + "'");
    }
    CasePrediction pred;
    pred.case_id = jsonutil::require_string(item, ctx, "case_id");
    if (pred.case_id.empty()) throw DataError(ctx + ": empty case_id");
    if (!seen.insert(pred.case_id).second)
      throw DataError(path + ": duplicate prediction for case '" + pred.case_id + "'");

    auto ranking_it = item.find("ranking");
    if (ranking_it == item.end() || !ranking_it->is_array())
      throw DataError(ctx + ": missing 'ranking' array");
    double max_score = 0.0;
    for (std::size_t j = 0; j < ranking_it->size(); ++j) {
      const json& entry = (*ranking_it)[j];
      std::string ectx = ctx + " entry " + std::to_string(j);
      if (!entry.is_object()) throw DataError(ectx + ": expected an object");
      for (const auto& [key, value] : entry.items()) {
        (void)value;
        if (key != "candidate" && key != "score" && key != "rationale")
          throw DataError(ectx + ": unknown key '" + key + "'");
      }
      Ranking::Entry e;
      e.candidate = ServiceId{jsonutil::require_string(entry, ectx, "candidate")};
      e.score = jsonutil::require_number(entry, ectx, "score");
      if (entry.contains("rationale"))
        e.rationale = jsonutil::require_string(entry, ectx, "rationale");
      max_score = std::max(max_score, e.score);
      pred.ranking.entries.push_back(std::move(e));
    }
    // Tools that emit unnormalized scores still produce a usable order.
    if (max_score > 1.0)
      for (auto& e : pred.ranking.entries) e.score /= max_score;
    sort_ranking(pred.ranking);
    std::vector<std::string> problems = pred.ranking.violations();
    if (!problems.empty()) {
      std::string joined;
      for (const std::string& p : problems) joined += "\n  " + p;
      throw DataError(ctx + ": invalid ranking" + joined);
    }
    out.push_back(std::move(pred));
  }
  return out;
}

SuiteEvaluation evaluate_suite(const std::string& cases_dir,
                               const std::string& predictions_path, int k_max) {
  if (!fs::is_directory(cases_dir))
    throw DataError("case directory '" + cases_dir + "' does not exist");

  std::vector<ingest::CaseManifest> manifests;
  std::vector<std::string> subdirs;
  for (const auto& entry : fs::directory_iterator(cases_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
      subdirs.push_back(entry.path().string());
  std::sort(subdirs.begin(), subdirs.end());
  for (const std::string& dir : subdirs) manifests.push_back(ingest::load_manifest(dir));
  if (manifests.empty())
    throw DataError("case directory '" + cases_dir + "' contains no cases");

  std::map<std::string, const ingest::CaseManifest*> by_id;
  for (const ingest::CaseManifest& m : manifests) {
    if (!m.ground_truth_service)
      throw DataError("case '" + m.case_id + "' has no ground truth; evaluation requires labeled cases");
    if (!by_id.emplace(m.case_id, &m).second)
      throw DataError("duplicate case id '" + m.case_id + "' in '" + cases_dir + "'");
  }

  std::vector<CasePrediction> predictions = load_predictions(predictions_path);
  std::map<std::string, const CasePrediction*> pred_by_id;
  for (const CasePrediction& p : predictions) {
    if (!by_id.count(p.case_id))
      throw DataError(predictions_path + ": prediction for unknown case '" + p.case_id + "'");
    pred_by_id.emplace(p.case_id, &p);
  }
  for (const auto& [case_id, manifest] : by_id) {
    (void)manifest;
    if (!pred_by_id.count(case_id))
      throw DataError(predictions_path + ": no prediction for case '" + case_id + "'");
  }

  SuiteEvaluation suite;
  suite.k_max = k_max;
  for (const auto& [case_id, manifest] : by_id) {
    const CasePrediction& pred = *pred_by_id.at(case_id);
    CaseOutcome outcome;
    outcome.case_id = case_id;
    auto fault = parse_fault_type(*manifest->ground_truth_fault);
    if (!fault)
      throw DataError("case '" + case_id + "': unknown fault type '" +
                      *manifest->ground_truth_fault + "'");
    outcome.fault = *fault;
    outcome.truth = ServiceId{*manifest->ground_truth_service};
    if (auto pos = pred.ranking.position_of(outcome.truth))
      outcome.rank = static_cast<int>(*pos) + 1;
    suite.outcomes.push_back(std::move(outcome));
  }

  suite.overall = compute_metrics(suite.outcomes, k_max);
  for (FaultType fault : all_fault_types()) {
    std::vector<CaseOutcome> slice;
    for (const CaseOutcome& o : suite.outcomes)
      if (o.fault == fault) slice.push_back(o);
    if (!slice.empty()) suite.by_fault.emplace(fault, compute_metrics(slice, k_max));
  }
  return suite;
}

std::string fault_column_name(FaultType fault) {
  switch (fault) {
    case FaultType::kCpu: return "CPU";
    case FaultType::kDelay: return "Delay";
    case FaultType::kDisk: return "Disk";
    case FaultType::kLoss: return "Loss";
    case FaultType::kMem: return "Mem";
    case FaultType::kSocket: return "Socket";
  }
  return "?";
}

namespace {

json metrics_to_json(const Metrics& m) {
  return json{{"cases", m.cases}, {"acc", m.acc_at}, {"avg", m.avg_at}};
}

}  // namespace

json summary_to_json(const SuiteEvaluation& suite) {
  json by_fault = json::object();
  for (const auto& [fault, metrics] : suite.by_fault)
    by_fault[fault_column_name(fault)] = metrics_to_json(metrics);

  json per_case = json::array();
  for (const CaseOutcome& o : suite.outcomes) {
    json item{{"case_id", o.case_id},
              {"fault", fault_column_name(o.fault)},
              {"truth", o.truth.name}};
    if (o.rank) item["rank"] = *o.rank;
    else item["rank"] = nullptr;
    per_case.push_back(std::move(item));
  }

  return json{{"k", suite.k_max},
              {"overall", metrics_to_json(suite.overall)},
              {"by_fault", std::move(by_fault)},
              {"per_case", std::move(per_case)}};
}

std::string summary_to_csv(const SuiteEvaluation& suite) {
  std::vector<FaultType> faults = all_fault_types();
  std::ostringstream os;

  std::vector<std::string> header{"metric"};
  for (FaultType f : faults) header.push_back(fault_column_name(f));
  header.push_back("Overall");
  os << csv::join_record(header) << "\n";

  auto metrics_for = [&](FaultType f) -> const Metrics* {
    auto it = suite.by_fault.find(f);
    return it == suite.by_fault.end() ? nullptr : &it->second;
  };

  std::vector<std::string> row{"cases"};
  for (FaultType f : faults) {
    const Metrics* m = metrics_for(f);
    row.push_back(std::to_string(m ? m->cases : 0));
  }
  row.push_back(std::to_string(suite.overall.cases));
  os << csv::join_record(row) << "\n";

  auto metric_row = [&](const std::string& name, int j, bool avg) {
    std::vector<std::string> cells{name};
    for (FaultType f : faults) {
      const Metrics* m = metrics_for(f);
      if (!m) {
        cells.push_back("");
        continue;
      }
      cells.push_back(ingest::format_double(avg ? m->avg_at[j] : m->acc_at[j]));
    }
    cells.push_back(ingest::format_double(avg ? suite.overall.avg_at[j] : suite.overall.acc_at[j]));
    os << csv::join_record(cells) << "\n";
  };

  for (int j = 0; j < suite.k_max; ++j)
    metric_row("acc@" + std::to_string(j + 1), j, false);
  for (int j = 0; j < suite.k_max; ++j)
    metric_row("avg@" + std::to_string(j + 1), j, true);
  return os.str();
}

namespace {

std::string fixed3(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  return buf;
}

void append_metrics_line(std::ostringstream& os, const Metrics& m, int k_max) {
  os << "cases " << m.cases;
  for (int j = 0; j < k_max; ++j) os << "  AC@" << (j + 1) << " " << fixed3(m.acc_at[j]);
  os << "  Avg@" << k_max << " " << fixed3(m.avg_at[k_max - 1]);
}

}  // namespace

std::string render_summary_text(const SuiteEvaluation& suite) {
  std::ostringstream os;
  os << "overall: ";
  append_metrics_line(os, suite.overall, suite.k_max);
  os << "\n";
  for (const auto& [fault, metrics] : suite.by_fault) {
    os << "  " << fault_column_name(fault);
    for (std::size_t pad = fault_column_name(fault).size(); pad < 7; ++pad) os << ' ';
    append_metrics_line(os, metrics, suite.k_max);
    os << "\n";
  }
  return os.str();
}

const std::vector<SureQuestion>& default_checklist() {
  static const std::vector<SureQuestion> kChecklist{
      {"CausalSoundness",
       "Does the report commit to a single primary root-cause service rather "
       "than listing several equally weighted suspects?"},
      {"CausalSoundness",
       "Does the summary explain a cause-and-effect chain from the root cause "
       "to the observed symptoms?"},
      {"CausalSoundness",
       "Is the stated root cause consistent with the top of the ranked "
       "candidate list?"},
      {"Actionability",
       "Does the report recommend at least one concrete step an operator "
       "could execute immediately?"},
      {"Actionability",
       "Does each recommended action state the impact or verification it "
       "enables?"},
      {"Actionability",
       "Are the recommended actions specific to the identified root cause "
       "rather than generic operational advice?"},
      {"IncidentSpecificity",
       "Does the report cite concrete evidence from this incident, such as "
       "service names, latency figures, metrics, or log lines?"},
      {"IncidentSpecificity",
       "Is the report free of template-like filler that could apply to any "
       "incident unchanged?"},
      {"IncidentSpecificity",
       "Does the report name the affected services instead of speaking about "
       "the system only in general terms?"},
      {"Clarity",
       "Can the main conclusion be understood from the summary alone?"},
      {"Clarity",
       "Are the ranking, the explanation, and the recommended actions clearly "
       "separated?"},
      {"Clarity", "Is the language precise and free of contradictions?"},
  };
  return kChecklist;
}

namespace {

constexpr const char* kSureSystem =
    "You are grading the quality of an incident root-cause report. Answer "
    "the single yes/no question about the report. Reply with ONLY a JSON "
    "object of the form {\"answer\": \"yes\"} or {\"answer\": \"no\"}.";

constexpr const char* kSureSchema = "{\"answer\": \"yes\" | \"no\"}";

std::optional<bool> parse_yes_no(const std::string& reply) {
  auto doc = agents::extract_first_json(reply);
  if (!doc || !doc->is_object()) return std::nullopt;
  auto it = doc->find("answer");
  if (it == doc->end() || !it->is_string()) return std::nullopt;
  std::string answer = it->get<std::string>();
  std::transform(answer.begin(), answer.end(), answer.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (answer == "yes") return true;
  if (answer == "no") return false;
  return std::nullopt;
}

}  // namespace

SureResult sure_score(const agents::IncidentReport& report, agents::LlmBackend& backend,
                      const std::vector<SureQuestion>& checklist) {
  if (checklist.empty()) throw UsageError("SURE checklist is empty");

  const std::string report_text = agents::render_report_text(report);
  SureResult result;
  result.questions_asked = static_cast<int>(checklist.size());

  std::map<std::string, std::pair<int, int>> tally;  // dimension -> {yes, total}
  std::vector<std::string> dimension_order;
  for (const SureQuestion& q : checklist)
    if (!tally.count(q.dimension)) {
      tally.emplace(q.dimension, std::pair<int, int>{0, 0});
      dimension_order.push_back(q.dimension);
    }

  for (std::size_t qi = 0; qi < checklist.size(); ++qi) {
    const SureQuestion& question = checklist[qi];
    std::vector<agents::ChatTurn> turns;
    turns.push_back({agents::Role::kSystem, kSureSystem, {}});
    turns.push_back({agents::Role::kUser,
                     "Incident report under review:\n\n" + report_text +
                         "\n\nQuestion (" + question.dimension + "): " + question.text,
                     {}});

    SureAnswer answer;
    answer.question = qi;

    auto deliver = [&](const std::vector<agents::ChatTurn>& t) -> std::optional<std::string> {
      for (int attempt = 0; attempt < 2; ++attempt) {
        try {
          return backend.complete(t);
        } catch (const TransportError&) {
          if (attempt == 1) return std::nullopt;
        }
      }
      return std::nullopt;
    };

    std::optional<std::string> reply = deliver(turns);
    if (!reply) {
      answer.transport_failed = true;
      ++result.transport_failures;
    } else {
      std::optional<bool> verdict = parse_yes_no(*reply);
      if (!verdict) {
        auto repair = agents::prompts::build_repair_prompt(turns, *reply, kSureSchema);
        std::optional<std::string> second = deliver(repair);
        if (!second) {
          answer.transport_failed = true;
          ++result.transport_failures;
        } else {
          verdict = parse_yes_no(*second);
        }
      }
      if (verdict) {
        answer.yes = *verdict;
      } else if (!answer.transport_failed) {
        answer.flagged = true;  // counts as "no"
        ++result.flagged;
      }
    }

    auto& [yes, total] = tally[question.dimension];
    ++total;
    if (answer.yes) ++yes;
    result.answers.push_back(answer);
  }

  if (result.transport_failures * 2 > result.questions_asked)
    throw BackendError("SURE grading aborted: " + std::to_string(result.transport_failures) +
                       " of " + std::to_string(result.questions_asked) +
                       " questions failed at the transport layer");

  double sum = 0.0;
  for (const std::string& dim : dimension_order) {
    const auto& [yes, total] = tally[dim];
    double score = 1.0 + 4.0 * static_cast<double>(yes) / static_cast<double>(total);
    result.dimension_scores[dim] = score;
    sum += score;
  }
  result.overall = sum / static_cast<double>(dimension_order.size());
  return result;
}

json sure_to_json(const SureResult& result, const std::vector<SureQuestion>& checklist) {
  json questions = json::array();
  for (const SureAnswer& a : result.answers) {
    json item{{"answer", a.yes ? "yes" : "no"},
              {"flagged", a.flagged},
              {"transport_failed", a.transport_failed}};
    if (a.question < checklist.size()) {
      item["dimension"] = checklist[a.question].dimension;
      item["text"] = checklist[a.question].text;
    }
    questions.push_back(std::move(item));
  }
  return json{{"overall", result.overall},
              {"dimensions", result.dimension_scores},
              {"questions", std::move(questions)},
              {"questions_asked", result.questions_asked},
              {"transport_failures", result.transport_failures},
              {"flagged", result.flagged},
              {"prompt_version", agents::prompts::kPromptVersion}};
}

}  // namespace rca::eval
