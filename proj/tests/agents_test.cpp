#include <rca/agents.hpp>

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <rca/backend.hpp>
#include <rca/config.hpp>
#include <rca/diagnostics.hpp>
#include <rca/errors.hpp>
#include <rca/model.hpp>

#include "testutil.hpp"

namespace {

using namespace rca::agents;
using nlohmann::json;
using rca::IncidentCase;
using rca::Micros;
using rca::PodId;
using rca::Ranking;
using rca::ServiceId;
using rca::Severity;
using testutil::make_log;
using testutil::make_series;
using testutil::make_span;
using testutil::remediation_reply;
using testutil::rerank_reply;

constexpr Micros kStart = 1'000'000'000;

Ranking make_ranking(const std::vector<std::pair<std::string, double>>& entries) {
  Ranking r;
  for (const auto& [name, score] : entries)
    r.entries.push_back({ServiceId{name}, score, std::nullopt});
  return r;
}

// Three services joined by one trace; svc-a has a pod with metrics and logs
// so its bundles carry a chart.
IncidentCase agent_case() {
  IncidentCase c;
  c.case_id = "agent-case";
  c.window = {kStart, kStart + 300'000'000};
  c.spans.push_back(make_span("t1", "s1", "", "svc-a", "op", kStart + 100, 900));
  c.spans.push_back(make_span("t1", "s2", "s1", "svc-b", "op", kStart + 150, 500));
  c.spans.push_back(make_span("t1", "s3", "s2", "svc-c", "op", kStart + 200, 200));
  std::vector<std::pair<Micros, double>> samples;
  for (int i = 0; i < 5; ++i) samples.emplace_back(kStart + i * 1'000'000, 40.0 + i);
  c.metrics.push_back(make_series("svc-a-0", "cpu", samples));
  c.logs.push_back(make_log(kStart + 500, "svc-a-0", Severity::kError, "boom"));
  return c;
}

WorkflowState fresh_state() {
  WorkflowState state;
  state.r_metrics =
      make_ranking({{"svc-a", 1.0}, {"svc-b", 0.5}, {"svc-c", 0.25}});
  state.r_trace = make_ranking({{"svc-b", 1.0}, {"svc-a", 0.5}});
  state.current = state.r_metrics;
  return state;
}

TEST(ExtractFirstJson, FindsObjectsInsideProse) {
  auto doc = extract_first_json("sure, here you go: {\"a\": 1} hope that helps");
  ASSERT_TRUE(doc.has_value());
  EXPECT_EQ(doc->at("a"), 1);
}

TEST(ExtractFirstJson, RespectsBracesInsideStrings) {
  auto doc = extract_first_json(R"({"msg": "brace } inside", "n": 2})");
  ASSERT_TRUE(doc.has_value());
  EXPECT_EQ(doc->at("n"), 2);
  EXPECT_EQ(doc->at("msg"), "brace } inside");

  auto escaped = extract_first_json(R"({"s": "quote \" then } brace"})");
  ASSERT_TRUE(escaped.has_value());
  EXPECT_EQ(escaped->at("s"), "quote \" then } brace");
}

TEST(ExtractFirstJson, SkipsUnparseableCandidates) {
  auto doc = extract_first_json("{oops {\"x\": 1}");
  ASSERT_TRUE(doc.has_value());
  EXPECT_EQ(doc->at("x"), 1);

  auto second = extract_first_json("{'a': 1} {\"b\": 2}");
  ASSERT_TRUE(second.has_value());
  EXPECT_EQ(second->at("b"), 2);
}

TEST(ExtractFirstJson, HandlesFencesAndArrays) {
  auto doc = extract_first_json("```json\n{\"k\": [1, 2]}\n```");
  ASSERT_TRUE(doc.has_value());
  EXPECT_EQ(doc->at("k").size(), 2u);

  auto arr = extract_first_json("list: [1, 2, {\"k\": \"v\"}] done");
  ASSERT_TRUE(arr.has_value());
  ASSERT_TRUE(arr->is_array());
  EXPECT_EQ(arr->at(2).at("k"), "v");
}

TEST(ExtractFirstJson, NothingToFind) {
  EXPECT_FALSE(extract_first_json("no structure here").has_value());
  EXPECT_FALSE(extract_first_json("{ unterminated").has_value());
  EXPECT_FALSE(extract_first_json("").has_value());
}

TEST(RerankStep, ParsesAWellFormedReply) {
  IncidentCase c = agent_case();
  WorkflowState state = fresh_state();
  ScriptedBackend backend({rerank_reply(
      {{"svc-b", 0.9}, {"svc-a", 0.6}, {"svc-c", 0.1}}, "analyze_next", "svc-b",
      "b looks guilty")});

  AgentDecision decision = rerank_step(state, c, backend);
  EXPECT_EQ(decision.kind, AgentDecision::Kind::kAnalyzeNext);
  ASSERT_TRUE(decision.target.has_value());
  EXPECT_EQ(decision.target->name, "svc-b");
  EXPECT_FALSE(decision.fallback);
  EXPECT_EQ(decision.reasoning, "b looks guilty");
  ASSERT_EQ(decision.updated_ranking.entries.size(), 3u);
  EXPECT_EQ(decision.updated_ranking.entries[0].candidate.name, "svc-b");

  ASSERT_EQ(state.transcript.size(), 1u);
  EXPECT_EQ(state.transcript[0].agent, "rerank");
  EXPECT_TRUE(state.transcript[0].response.has_value());
}

TEST(RerankStep, ScoresOverrideTheModelsListedOrder) {
  IncidentCase c = agent_case();
  WorkflowState state = fresh_state();
  // Listed worst-first; scores are the contract.
  ScriptedBackend backend({rerank_reply(
      {{"svc-c", 0.1}, {"svc-a", 0.6}, {"svc-b", 0.9}}, "finish")});

  AgentDecision decision = rerank_step(state, c, backend);
  EXPECT_EQ(decision.kind, AgentDecision::Kind::kFinish);
  EXPECT_EQ(decision.updated_ranking.entries[0].candidate.name, "svc-b");
  EXPECT_EQ(decision.updated_ranking.entries[2].candidate.name, "svc-c");
}

TEST(RerankStep, RepairPromptRecoversFromOneBadReply) {
  IncidentCase c = agent_case();
  WorkflowState state = fresh_state();
  ScriptedBackend backend({
      rerank_reply({{"zzz", 0.9}}, "analyze_next", "zzz"),  // unknown candidate
      rerank_reply({{"svc-a", 0.8}, {"svc-b", 0.2}}, "analyze_next", "svc-a"),
  });

  AgentDecision decision = rerank_step(state, c, backend);
  EXPECT_FALSE(decision.fallback);
  EXPECT_EQ(decision.target->name, "svc-a");
  ASSERT_EQ(state.transcript.size(), 2u);
  EXPECT_EQ(state.transcript[1].agent, "rerank");
}

TEST(RerankStep, FallbackWalksToTheFirstUnvisitedCandidate) {
  IncidentCase c = agent_case();
  WorkflowState state = fresh_state();
  state.visit_counts[ServiceId{"svc-a"}] = 1;
  state.visited.push_back(ServiceId{"svc-a"});
  ScriptedBackend backend({"no json here", "still no json"});

  AgentDecision decision = rerank_step(state, c, backend);
  EXPECT_TRUE(decision.fallback);
  EXPECT_EQ(decision.kind, AgentDecision::Kind::kAnalyzeNext);
  EXPECT_EQ(decision.target->name, "svc-b");
  EXPECT_EQ(decision.reasoning,
            "fallback: re-ranking reply unparseable after one repair attempt");
  // The fallback never rewrites the working ranking.
  ASSERT_EQ(decision.updated_ranking.entries.size(), 3u);
  EXPECT_EQ(decision.updated_ranking.entries[0].candidate.name, "svc-a");
  EXPECT_EQ(backend.calls_made(), 2u);
}

TEST(RerankStep, FallbackFinishesWhenEveryCandidateWasVisited) {
  IncidentCase c = agent_case();
  WorkflowState state = fresh_state();
  for (const char* name : {"svc-a", "svc-b", "svc-c"}) {
    state.visit_counts[ServiceId{name}] = 1;
    state.visited.push_back(ServiceId{name});
  }
  ScriptedBackend backend({"garbage", "more garbage"});

  AgentDecision decision = rerank_step(state, c, backend);
  EXPECT_TRUE(decision.fallback);
  EXPECT_EQ(decision.kind, AgentDecision::Kind::kFinish);
}

TEST(RerankStep, RejectsRepliesThatBreakRankingInvariants) {
  IncidentCase c = agent_case();
  WorkflowState state = fresh_state();
  ScriptedBackend backend({
      // Duplicate candidate.
      rerank_reply({{"svc-a", 0.9}, {"svc-a", 0.5}}, "analyze_next", "svc-a"),
      // analyze_next whose target is missing from the ranking.
      rerank_reply({{"svc-a", 0.9}}, "analyze_next", "svc-b"),
  });

  AgentDecision decision = rerank_step(state, c, backend);
  EXPECT_TRUE(decision.fallback);  // both replies rejected
  EXPECT_EQ(backend.calls_made(), 2u);
}

TEST(DeepDiveStep, RecordsSummaryIterationAndVisit) {
  IncidentCase c = agent_case();
  WorkflowState state = fresh_state();
  rca::DiagConfig diag_config;
  auto bundle = rca::diag::build_service_bundle(c, ServiceId{"svc-a"}, diag_config);
  ScriptedBackend backend({"first analysis", "second analysis"});

  deep_dive_step(state, ServiceId{"svc-a"}, bundle, backend);
  ASSERT_EQ(state.summaries.size(), 1u);
  EXPECT_EQ(state.summaries[0].service.name, "svc-a");
  EXPECT_EQ(state.summaries[0].iteration, 1);
  EXPECT_EQ(state.summaries[0].text, "first analysis");
  EXPECT_EQ(state.iteration, 1);
  ASSERT_EQ(state.visited.size(), 1u);
  EXPECT_EQ(state.visit_counts[ServiceId{"svc-a"}], 1);

  deep_dive_step(state, ServiceId{"svc-a"}, bundle, backend);
  EXPECT_EQ(state.iteration, 2);
  EXPECT_EQ(state.visited.size(), 1u);  // first-visit order only
  EXPECT_EQ(state.visit_counts[ServiceId{"svc-a"}], 2);
  ASSERT_EQ(state.transcript.size(), 2u);
  EXPECT_EQ(state.transcript[0].agent, "deep_dive");
}

TEST(DeepDiveStep, ChartTravelsOnlyWithVisionBackends) {
  IncidentCase c = agent_case();
  rca::DiagConfig diag_config;
  auto bundle = rca::diag::build_service_bundle(c, ServiceId{"svc-a"}, diag_config);
  ASSERT_TRUE(bundle.chart_png.has_value());

  WorkflowState blind_state = fresh_state();
  ScriptedBackend blind({"reply"});
  deep_dive_step(blind_state, ServiceId{"svc-a"}, bundle, blind);
  for (const json& turn : blind_state.transcript[0].request)
    EXPECT_FALSE(turn.contains("images"));

  WorkflowState seeing_state = fresh_state();
  ScriptedBackend seeing({"reply"}, true);
  deep_dive_step(seeing_state, ServiceId{"svc-a"}, bundle, seeing);
  bool image_seen = false;
  for (const json& turn : seeing_state.transcript[0].request) {
    if (!turn.contains("images")) continue;
    image_seen = true;
    ASSERT_EQ(turn["images"].size(), 1u);
    EXPECT_EQ(turn["images"][0].at("mime"), "image/png");
    std::string b64 =
        base64_encode(bundle.chart_png->data(), bundle.chart_png->size());
    EXPECT_EQ(turn["images"][0].at("base64_chars"), b64.size());
  }
  EXPECT_TRUE(image_seen);
}

TEST(RemediationStep, ParsesSummaryActionsAndConfidence) {
  IncidentCase c = agent_case();
  WorkflowState state = fresh_state();
  state.iteration = 2;
  std::string reply =
      "{\"summary\":\"svc-a leaked memory\","
      "\"actions\":[{\"step\":\"roll back\",\"impact\":\"restores service\"},"
      "{\"step\":\"add an alert\"}],"
      "\"confidence\":[{\"candidate\":\"svc-a\",\"note\":\"high confidence\"}]}";
  ScriptedBackend backend({reply});

  IncidentReport report = remediation_step(state, c, backend);
  EXPECT_EQ(report.case_id, "agent-case");
  EXPECT_FALSE(report.degraded);
  EXPECT_EQ(report.iterations, 2);
  EXPECT_EQ(report.summary, "svc-a leaked memory");
  ASSERT_EQ(report.actions.size(), 2u);
  EXPECT_EQ(report.actions[0].step, "roll back");
  EXPECT_EQ(report.actions[0].impact, "restores service");
  EXPECT_TRUE(report.actions[1].impact.empty());
  ASSERT_FALSE(report.final_ranking.entries.empty());
  ASSERT_TRUE(report.final_ranking.entries[0].rationale.has_value());
  EXPECT_EQ(*report.final_ranking.entries[0].rationale, "high confidence");
}

TEST(RemediationStep, RepairsOneMalformedReply) {
  IncidentCase c = agent_case();
  WorkflowState state = fresh_state();
  ScriptedBackend backend({"{\"summary\":\"\"}", remediation_reply("fixed on retry")});

  IncidentReport report = remediation_step(state, c, backend);
  EXPECT_FALSE(report.degraded);
  EXPECT_EQ(report.summary, "fixed on retry");
  ASSERT_EQ(state.transcript.size(), 2u);
  EXPECT_EQ(state.transcript[1].agent, "remediation");
}

TEST(RemediationStep, TwoBadRepliesDegradeToTheTemplate) {
  IncidentCase c = agent_case();
  WorkflowState state = fresh_state();
  state.summaries.push_back({ServiceId{"svc-a"}, 1, "looked at a"});
  state.iteration = 1;
  ScriptedBackend backend({"not json", "also not json"});

  IncidentReport report = remediation_step(state, c, backend);
  EXPECT_TRUE(report.degraded);
  EXPECT_EQ(report.iterations, 1);
  EXPECT_NE(report.summary.find("assembled from recorded analysis"),
            std::string::npos);
  EXPECT_NE(report.summary.find("svc-a (iteration 1)"), std::string::npos);
  ASSERT_EQ(report.actions.size(), 1u);
  EXPECT_NE(report.actions[0].step.find("svc-a"), std::string::npos);
}

TEST(RemediationStep, TransportDeathStillProducesAReport) {
  IncidentCase c = agent_case();
  WorkflowState state = fresh_state();
  ScriptedBackend backend(std::vector<std::string>{});  // dies immediately

  IncidentReport report = remediation_step(state, c, backend);
  EXPECT_TRUE(report.degraded);
  EXPECT_NE(report.summary.find("No deep dives were completed"), std::string::npos);
  // Both transport attempts are on the record.
  ASSERT_EQ(state.transcript.size(), 2u);
  EXPECT_TRUE(state.transcript[0].error.has_value());
  EXPECT_TRUE(state.transcript[1].error.has_value());
}

TEST(RunWorkflow, BothRankingsEmptyIsADataError) {
  IncidentCase c = agent_case();
  ScriptedBackend backend({"x"});
  rca::Config config;
  EXPECT_THROW(run_workflow(c, Ranking{}, Ranking{}, backend, config), rca::DataError);
}

TEST(RunWorkflow, EmptyMetricsRankingFallsBackToTraceRanking) {
  IncidentCase c = agent_case();
  ScriptedBackend backend({
      rerank_reply({{"svc-b", 0.9}, {"svc-a", 0.4}}, "finish"),
      remediation_reply(),
  });
  rca::Config config;

  WorkflowResult result = run_workflow(c, Ranking{},
                                       make_ranking({{"svc-b", 1.0}, {"svc-a", 0.5}}),
                                       backend, config);
  EXPECT_EQ(result.state.current.entries[0].candidate.name, "svc-b");
  EXPECT_EQ(result.report.iterations, 0);
}

TEST(RunWorkflow, TwoStepScriptRunsOneDive) {
  IncidentCase c = agent_case();
  ScriptedBackend backend({
      rerank_reply({{"svc-b", 0.9}, {"svc-a", 0.6}, {"svc-c", 0.1}}, "analyze_next",
                   "svc-b"),
      "svc-b looks saturated",
      rerank_reply({{"svc-b", 0.9}, {"svc-a", 0.6}, {"svc-c", 0.1}}, "finish"),
      remediation_reply("final word"),
  });
  rca::Config config;

  WorkflowResult result =
      run_workflow(c, fresh_state().r_metrics, fresh_state().r_trace, backend, config);

  EXPECT_EQ(result.report.summary, "final word");
  EXPECT_EQ(result.report.iterations, 1);
  EXPECT_FALSE(result.report.degraded);
  ASSERT_EQ(result.state.visited.size(), 1u);
  EXPECT_EQ(result.state.visited[0].name, "svc-b");
  ASSERT_EQ(result.state.summaries.size(), 1u);
  EXPECT_EQ(result.state.summaries[0].text, "svc-b looks saturated");

  std::map<std::string, int> calls;
  for (const TranscriptEntry& entry : result.state.transcript) ++calls[entry.agent];
  EXPECT_EQ(calls["rerank"], 2);
  EXPECT_EQ(calls["deep_dive"], 1);
  EXPECT_EQ(calls["remediation"], 1);
}

TEST(RunWorkflow, RevisitCapRedirectsThenStops) {
  IncidentCase c = agent_case();
  // Every rerank insists on svc-a; the cap of two visits forces the third
  // dive onto svc-b and the fourth rerank finds nothing unvisited.
  std::string insist =
      rerank_reply({{"svc-a", 0.9}, {"svc-b", 0.5}}, "analyze_next", "svc-a");
  ScriptedBackend backend({insist, "dive-1", insist, "dive-2", insist, "dive-3",
                           insist, remediation_reply("done")});
  rca::Config config;

  WorkflowResult result = run_workflow(
      c, make_ranking({{"svc-a", 1.0}, {"svc-b", 0.5}}), Ranking{}, backend, config);

  EXPECT_EQ(result.report.iterations, 3);
  ASSERT_EQ(result.state.visited.size(), 2u);
  EXPECT_EQ(result.state.visited[0].name, "svc-a");
  EXPECT_EQ(result.state.visited[1].name, "svc-b");
  EXPECT_EQ(result.state.visit_counts[ServiceId{"svc-a"}], 2);
  EXPECT_EQ(result.state.visit_counts[ServiceId{"svc-b"}], 1);
  EXPECT_EQ(backend.calls_made(), 8u);
}

TEST(RunWorkflow, MaxIterationsBoundsTheLoop) {
  IncidentCase c = agent_case();
  ScriptedBackend backend({
      rerank_reply({{"svc-a", 0.9}, {"svc-b", 0.5}}, "analyze_next", "svc-a"),
      "dive a",
      rerank_reply({{"svc-b", 0.9}, {"svc-a", 0.5}}, "analyze_next", "svc-b"),
      "dive b",
      remediation_reply(),
  });
  rca::Config config;
  config.agents.max_iterations = 2;

  WorkflowResult result = run_workflow(
      c, make_ranking({{"svc-a", 1.0}, {"svc-b", 0.5}}), Ranking{}, backend, config);
  EXPECT_EQ(result.report.iterations, 2);
  EXPECT_EQ(backend.calls_made(), 5u);
}

TEST(RunWorkflow, DoubleTransportFailureAbortsWithState) {
  IncidentCase c = agent_case();
  // One good rerank, then the script runs dry during the dive.
  ScriptedBackend backend({
      rerank_reply({{"svc-a", 0.9}, {"svc-b", 0.5}}, "analyze_next", "svc-a"),
  });
  rca::Config config;

  try {
    run_workflow(c, make_ranking({{"svc-a", 1.0}, {"svc-b", 0.5}}), Ranking{},
                 backend, config);
    FAIL();
  } catch (const WorkflowAborted& e) {
    EXPECT_NE(std::string(e.what()).find("workflow aborted:"), std::string::npos);
    const WorkflowState& state = e.state();
    ASSERT_EQ(state.transcript.size(), 3u);
    EXPECT_EQ(state.transcript[0].agent, "rerank");
    EXPECT_TRUE(state.transcript[0].response.has_value());
    EXPECT_EQ(state.transcript[1].agent, "deep_dive");
    EXPECT_TRUE(state.transcript[1].error.has_value());
    EXPECT_TRUE(state.transcript[2].error.has_value());
    EXPECT_EQ(state.iteration, 0);
  }
}

TEST(WriteTranscript, OneJsonObjectPerLine) {
  IncidentCase c = agent_case();
  ScriptedBackend backend({
      rerank_reply({{"svc-a", 0.9}, {"svc-b", 0.5}}, "finish"),
      remediation_reply(),
  });
  rca::Config config;
  WorkflowResult result = run_workflow(
      c, make_ranking({{"svc-a", 1.0}, {"svc-b", 0.5}}), Ranking{}, backend, config);

  testutil::TempDir dir("transcript");
  std::string path = dir.str("transcript.jsonl");
  write_transcript(result.state, path);

  std::istringstream lines(testutil::read_file(path));
  std::string line;
  std::size_t index = 0;
  while (std::getline(lines, line)) {
    json doc = json::parse(line);
    EXPECT_EQ(doc.at("index"), index);
    EXPECT_TRUE(doc.contains("agent"));
    EXPECT_TRUE(doc.at("request").is_array());
    EXPECT_TRUE(doc.contains("response") != doc.contains("error"));
    ++index;
  }
  EXPECT_EQ(index, result.state.transcript.size());

  EXPECT_THROW(write_transcript(result.state, dir.str("no-such-dir/t.jsonl")),
               rca::DataError);
}

TEST(ReportJson, RoundTripsAndCarriesThePromptVersion) {
  IncidentReport report;
  report.case_id = "case-7";
  report.summary = "things broke";
  report.degraded = true;
  report.iterations = 4;
  report.final_ranking = make_ranking({{"svc-a", 0.9}, {"svc-b", 0.4}});
  report.final_ranking.entries[0].rationale = "strong signal";
  report.actions.push_back({"restart it", "fixes things"});
  report.actions.push_back({"watch it", ""});

  json doc = report_to_json(report);
  EXPECT_EQ(doc.at("prompt_version"), "v1");

  IncidentReport back = report_from_json(doc);
  EXPECT_EQ(back.case_id, "case-7");
  EXPECT_EQ(back.summary, "things broke");
  EXPECT_TRUE(back.degraded);
  EXPECT_EQ(back.iterations, 4);
  ASSERT_EQ(back.final_ranking.entries.size(), 2u);
  EXPECT_EQ(back.final_ranking.entries[0].candidate.name, "svc-a");
  ASSERT_TRUE(back.final_ranking.entries[0].rationale.has_value());
  EXPECT_EQ(*back.final_ranking.entries[0].rationale, "strong signal");
  EXPECT_FALSE(back.final_ranking.entries[1].rationale.has_value());
  ASSERT_EQ(back.actions.size(), 2u);
  EXPECT_EQ(back.actions[1].impact, "");
}

TEST(ReportJson, FromJsonIsStrictAboutRequiredKeys) {
  EXPECT_THROW(report_from_json(json::array()), rca::DataError);
  EXPECT_THROW(report_from_json(json{{"summary", "s"}}), rca::DataError);
  EXPECT_THROW(report_from_json(json{{"case_id", "c"}}), rca::DataError);
  EXPECT_THROW(
      report_from_json(json{{"case_id", "c"}, {"summary", "s"}, {"ranking", 5}}),
      rca::DataError);
  EXPECT_THROW(report_from_json(json{{"case_id", "c"},
                                     {"summary", "s"},
                                     {"ranking", json::array({{{"candidate", "x"}}})}}),
               rca::DataError);
  EXPECT_THROW(report_from_json(json{{"case_id", "c"},
                                     {"summary", "s"},
                                     {"actions", json::array({{{"impact", "x"}}})}}),
               rca::DataError);

  // ranking and actions themselves are optional.
  IncidentReport minimal =
      report_from_json(json{{"case_id", "c"}, {"summary", "s"}});
  EXPECT_TRUE(minimal.final_ranking.entries.empty());
  EXPECT_TRUE(minimal.actions.empty());
  EXPECT_FALSE(minimal.degraded);
}

TEST(RenderReportText, LaysOutEverySection) {
  IncidentReport report;
  report.case_id = "case-x";
  report.summary = "Things failed.";
  report.iterations = 2;
  report.final_ranking = make_ranking({{"svc-a", 0.9}, {"svc-b", 0.4}});
  report.final_ranking.entries[0].rationale = "strong signal";
  report.actions.push_back({"restart it", "fixes things"});
  report.actions.push_back({"watch it", ""});

  std::string expected =
      "incident report: case-x\n"
      "analysis iterations: 2\n"
      "\nsummary\n-------\nThings failed.\n"
      "\nranked candidates\n-----------------\n"
      " 1. svc-a  score 0.9000\n"
      "    strong signal\n"
      " 2. svc-b  score 0.4000\n"
      "\nrecommended actions\n-------------------\n"
      " 1. restart it\n"
      "    impact: fixes things\n"
      " 2. watch it\n";
  EXPECT_EQ(render_report_text(report), expected);
}

TEST(RenderReportText, DegradedNoteAndEmptySections) {
  IncidentReport report;
  report.case_id = "case-y";
  report.summary = "n/a";
  report.degraded = true;

  std::string text = render_report_text(report);
  EXPECT_NE(text.find("note: report synthesis degraded to the built-in template\n"),
            std::string::npos);
  EXPECT_NE(text.find("ranked candidates\n-----------------\n(none)\n"),
            std::string::npos);
  EXPECT_NE(text.find("recommended actions\n-------------------\n(none)\n"),
            std::string::npos);
}

}  // namespace
