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

#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rca/agents.hpp"
#include "rca/backend.hpp"
#include "rca/config.hpp"
#include "rca/diagnostics.hpp"
#include "rca/errors.hpp"
#include "rca/evaluation.hpp"
#include "rca/fixtures.hpp"
#include "rca/ingest.hpp"
#include "rca/metrics_rca.hpp"
#include "rca/model.hpp"
#include "rca/twist.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rca::cli {

namespace {

Config load_config(const std::string& path) {
  if (path.empty()) return Config{};
  return Config::from_file(path);
}

json ranking_to_json(const Ranking& ranking, bool with_rationale) {
  json out = json::array();
  for (const Ranking::Entry& e : ranking.entries) {
    json item{{"candidate", e.candidate.name}, {"score", e.score}};
    if (with_rationale && e.rationale) item["rationale"] = *e.rationale;
    out.push_back(std::move(item));
  }
  return out;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << content;
}

void write_json_file(const fs::path& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory '" + dir + "': " + ec.message());
}

void print_ranking(std::ostream& out, const std::string& label, const Ranking& ranking) {
  out << label << "\n";
  if (ranking.empty()) {
    out << "  (empty)\n";
    return;
  }
  for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
    const Ranking::Entry& e = ranking.entries[i];
    char score[32];
    std::snprintf(score, sizeof(score), "%.4f", e.score);
    out << "  " << (i + 1) << ". " << e.candidate.name << "  " << score << "\n";
  }
}

// Reciprocal-rank fusion of the two rankers, constant 60 as in the original
// formulation. Used for offline suite predictions where no agent runs.
Ranking fuse_rankings(const Ranking& trace, const Ranking& metrics) {
  std::map<ServiceId, double> scores;
  auto add = [&](const Ranking& r) {
    for (std::size_t i = 0; i < r.entries.size(); ++i)
      scores[r.entries[i].candidate] += 1.0 / (60.0 + static_cast<double>(i + 1));
  };
  add(trace);
  add(metrics);
  Ranking fused;
  double max_score = 0.0;
  for (const auto& [candidate, score] : scores) max_score = std::max(max_score, score);
  for (const auto& [candidate, score] : scores)
    fused.entries.push_back({candidate, max_score > 0 ? score / max_score : 0.0, std::nullopt});
  sort_ranking(fused);
  return fused;
}

Ranking select_ranking(const std::string& ranker, const Ranking& trace, const Ranking& metrics) {
  if (ranker == "trace") return trace;
  if (ranker == "metrics") return metrics;
  return fuse_rankings(trace, metrics);
}

bool is_case_dir(const fs::path& path) {
  return fs::is_directory(path) && fs::exists(path / "manifest.json");
}

std::vector<std::string> suite_case_dirs(const std::string& dir) {
  std::vector<std::string> cases;
  for (const auto& entry : fs::directory_iterator(dir))
    if (is_case_dir(entry.path())) cases.push_back(entry.path().string());
  std::sort(cases.begin(), cases.end());
  return cases;
}

struct RankArgs {
  std::string path;
  std::string config;
  std::string out;
  std::string ranker = "fused";
};

int cmd_rank(const RankArgs& args, std::ostream& out) {
  Config config = load_config(args.config);
  NameNormalizer normalizer(config.pod_suffix_regex.empty()
                                ? NameNormalizer::default_pattern()
                                : config.pod_suffix_regex);

  bool single = is_case_dir(args.path) || fs::is_regular_file(args.path);
  if (single) {
    ingest::LoadedCase loaded = ingest::load_case(args.path, normalizer);
    Ranking trace = twist::twist_rank(loaded.incident, config.twist);
    Ranking metrics = metrics::metrics_rank(loaded.incident, config.metrics);
    out << "case: " << loaded.incident.case_id << "\n";
    print_ranking(out, "trace ranking", trace);
    print_ranking(out, "metrics ranking", metrics);
    if (!args.out.empty()) {
      ensure_dir(args.out);
      write_json_file(fs::path(args.out) / "trace_ranking.json",
                      ranking_to_json(trace, true));
      write_json_file(fs::path(args.out) / "metrics_ranking.json",
                      ranking_to_json(metrics, true));
      out << "wrote " << (fs::path(args.out) / "trace_ranking.json").string() << " and "
          << (fs::path(args.out) / "metrics_ranking.json").string() << "\n";
    }
    return 0;
  }

  if (!fs::is_directory(args.path))
    throw DataError("'" + args.path + "' is neither a case nor a directory of cases");
  std::vector<std::string> cases = suite_case_dirs(args.path);
  if (cases.empty())
    throw DataError("'" + args.path + "' contains no cases (no */manifest.json)");

  json predictions = json::array();
  for (const std::string& case_dir : cases) {
    ingest::LoadedCase loaded = ingest::load_case(case_dir, normalizer);
    Ranking trace = twist::twist_rank(loaded.incident, config.twist);
    Ranking metrics = metrics::metrics_rank(loaded.incident, config.metrics);
    Ranking chosen = select_ranking(args.ranker, trace, metrics);
    predictions.push_back({{"case_id", loaded.incident.case_id},
                           {"ranking", ranking_to_json(chosen, false)}});
    out << loaded.incident.case_id << ": " << chosen.size() << " candidates";
    if (!chosen.empty()) out << ", top " << chosen.entries.front().candidate.name;
    out << "\n";
  }
  if (!args.out.empty()) {
    ensure_dir(args.out);
    write_json_file(fs::path(args.out) / "predictions.json", predictions);
    out << "wrote " << (fs::path(args.out) / "predictions.json").string() << "\n";
  } else {
    out << predictions.dump(2) << "\n";
  }
  return 0;
}

struct DiagnoseArgs {
  std::string path;
  std::string config;
  std::string out;
  std::string backend = "http-chat";
  std::string script;
  std::string metrics_from;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iters;
};

int cmd_diagnose(const DiagnoseArgs& args, std::ostream& out, std::ostream& err) {
  Config config = load_config(args.config);
  if (args.seed) config.diag.seed = *args.seed;
  if (args.max_iters) {
    if (*args.max_iters < 1) throw UsageError("--max-iters must be at least 1");
    config.agents.max_iterations = *args.max_iters;
  }
  ensure_dir(args.out);

  NameNormalizer normalizer(config.pod_suffix_regex.empty()
                                ? NameNormalizer::default_pattern()
                                : config.pod_suffix_regex);
  ingest::LoadedCase loaded = ingest::load_case(args.path, normalizer);

  Ranking trace = twist::twist_rank(loaded.incident, config.twist);
  Ranking metrics = args.metrics_from.empty()
                        ? metrics::metrics_rank(loaded.incident, config.metrics)
                        : ingest::load_external_ranking(args.metrics_from);

  std::unique_ptr<agents::LlmBackend> backend =
      agents::make_backend(args.backend, config.agents, args.script);

  fs::path out_dir(args.out);
  try {
    agents::WorkflowResult result =
        agents::run_workflow(loaded.incident, metrics, trace, *backend, config);
    agents::write_transcript(result.state, (out_dir / "transcript.jsonl").string());
    write_json_file(out_dir / "report.json", agents::report_to_json(result.report));
    std::string text = agents::render_report_text(result.report);
    write_text_file(out_dir / "report.txt", text);
    out << text;
    out << "wrote " << (out_dir / "report.json").string() << "\n";
    return 0;
  } catch (const agents::WorkflowAborted& aborted) {
    // Persist what happened before reporting the failure.
    agents::write_transcript(aborted.state(), (out_dir / "transcript.jsonl").string());
    err << "backend error: " << aborted.what() << "\n";
    err << "transcript saved to " << (out_dir / "transcript.jsonl").string() << "\n";
    return 3;
  }
}

struct EvaluateArgs {
  std::string cases_dir;
  std::string predictions;
  std::string out;
  int k = 5;
};

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
  eval::SuiteEvaluation suite =
      eval::evaluate_suite(args.cases_dir, args.predictions, args.k);
  out << eval::render_summary_text(suite);
  if (!args.out.empty()) {
    ensure_dir(args.out);
    write_json_file(fs::path(args.out) / "summary.json", eval::summary_to_json(suite));
    write_text_file(fs::path(args.out) / "summary.csv", eval::summary_to_csv(suite));
    out << "wrote " << (fs::path(args.out) / "summary.json").string() << " and "
        << (fs::path(args.out) / "summary.csv").string() << "\n";
  }
  return 0;
}

struct SureArgs {
  std::string report;
  std::string config;
  std::string out;
  std::string backend = "http-chat";
  std::string script;
};

int cmd_sure(const SureArgs& args, std::ostream& out) {
  Config config = load_config(args.config);
  json doc = json::parse(std::ifstream(args.report), nullptr, false);
  if (doc.is_discarded())
    throw DataError("'" + args.report + "' is not valid JSON");
  agents::IncidentReport report = agents::report_from_json(doc);

  std::unique_ptr<agents::LlmBackend> backend =
      agents::make_backend(args.backend, config.agents, args.script);
  eval::SureResult result = eval::sure_score(report, *backend);

  char overall[32];
  std::snprintf(overall, sizeof(overall), "%.3f", result.overall);
  out << "SURE score: " << overall << "\n";
  for (const auto& [dimension, score] : result.dimension_scores) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", score);
    out << "  " << dimension << ": " << buf << "\n";
  }
  if (result.flagged > 0) out << "  flagged replies: " << result.flagged << "\n";
  if (result.transport_failures > 0)
    out << "  transport failures: " << result.transport_failures << "\n";
  if (!args.out.empty()) {
    ensure_dir(args.out);
    write_json_file(fs::path(args.out) / "sure.json", eval::sure_to_json(result));
    out << "wrote " << (fs::path(args.out) / "sure.json").string() << "\n";
  }
  return 0;
}

struct GenArgs {
  std::string out;
  std::string fault = "all";
  std::string target;
  std::uint64_t seed = 0;
  int count = 1;
};

int cmd_gen_fixture(const GenArgs& args, std::ostream& out) {
  if (args.count < 1) throw UsageError("--count must be at least 1");
  std::vector<FaultType> faults;
  if (args.fault == "all") {
    faults = all_fault_types();
    if (!args.target.empty())
      throw UsageError("--target cannot be combined with --fault all");
  } else {
    auto parsed = parse_fault_type(args.fault);
    if (!parsed)
      throw UsageError("unknown fault type '" + args.fault +
                       "' (expected cpu, delay, disk, loss, mem, socket, or all)");
    faults.push_back(*parsed);
  }

  ensure_dir(args.out);
  fixtures::GenOptions options;
  for (FaultType fault : faults) {
    for (int i = 0; i < args.count; ++i) {
      std::uint64_t seed = args.seed + static_cast<std::uint64_t>(i);
      std::string target = args.target.empty()
                               ? fixtures::pick_target(fault, seed, options.topology)
                               : args.target;
      IncidentCase incident = fixtures::generate_case(fault, target, seed, options);
      fs::path dir = fs::path(args.out) / incident.case_id;
      ingest::write_case(incident, dir.string());
      out << dir.string() << "\n";
    }
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"root-cause localization toolkit for microservice incidents"};
  app.require_subcommand(1);

  RankArgs rank_args;
  CLI::App* rank = app.add_subcommand(
      "rank", "Rank root-cause candidates for one case or a directory of cases");
  rank->add_option("case", rank_args.path, "Case directory, manifest, or suite directory")
      ->required();
  rank->add_option("--config", rank_args.config, "Configuration file");
  rank->add_option("--out", rank_args.out, "Output directory");
  rank->add_option("--ranker", rank_args.ranker, "Suite prediction source")
      ->check(CLI::IsMember({"trace", "metrics", "fused"}));

  DiagnoseArgs diag_args;
  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "Run the full agent workflow and write an incident report");
  diagnose->add_option("case", diag_args.path, "Case directory or manifest")->required();
  diagnose->add_option("--config", diag_args.config, "Configuration file");
  diagnose->add_option("--out", diag_args.out, "Output directory (required)")->required();
  diagnose->add_option("--backend", diag_args.backend, "LLM backend")
      ->check(CLI::IsMember({"http-chat", "scripted"}));
  diagnose->add_option("--script", diag_args.script, "Reply script for --backend scripted");
  diagnose->add_option("--metrics-from", diag_args.metrics_from,
                       "Use an external metrics ranking instead of computing one");
  diagnose->add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t v) { diag_args.seed = v; }, "Log sampling seed");
  diagnose->add_option_function<int>(
      "--max-iters", [&](int v) { diag_args.max_iters = v; },
      "Cap on deep-dive iterations");

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score a predictions file against labeled cases");
  evaluate->add_option("cases", eval_args.cases_dir, "Directory of labeled cases")
      ->required();
  evaluate->add_option("predictions", eval_args.predictions, "predictions.json path")
      ->required();
  evaluate->add_option("--out", eval_args.out, "Output directory");
  evaluate->add_option("--k", eval_args.k, "Largest k for AC@k / Avg@k")
      ->check(CLI::PositiveNumber);

  SureArgs sure_args;
  CLI::App* sure = app.add_subcommand("sure", "Grade a report with the SURE checklist");
  sure->add_option("report", sure_args.report, "report.json path")->required();
  sure->add_option("--config", sure_args.config, "Configuration file");
  sure->add_option("--out", sure_args.out, "Output directory");
  sure->add_option("--backend", sure_args.backend, "LLM backend")
      ->check(CLI::IsMember({"http-chat", "scripted"}));
  sure->add_option("--script", sure_args.script, "Reply script for --backend scripted");

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen-fixture", "Generate synthetic labeled cases");
  gen->add_option("--out", gen_args.out, "Output directory")->required();
  gen->add_option("--fault", gen_args.fault,
                  "Fault type (cpu, delay, disk, loss, mem, socket) or 'all'");
  gen->add_option("--target", gen_args.target, "Fault target service");
  gen->add_option("--seed", gen_args.seed, "Base seed");
  gen->add_option("--count", gen_args.count, "Cases per fault type");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      throw UsageError(e.what());
    }

    if (rank->parsed()) return cmd_rank(rank_args, out);
    if (diagnose->parsed()) return cmd_diagnose(diag_args, out, err);
    if (evaluate->parsed()) return cmd_evaluate(eval_args, out);
    if (sure->parsed()) return cmd_sure(sure_args, out);
    if (gen->parsed()) return cmd_gen_fixture(gen_args, out);
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace rca::cli
