#include <rca/fixtures.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <rca/errors.hpp>
#include <rca/ingest.hpp>
#include <rca/model.hpp>

#include "testutil.hpp"

namespace {

using namespace rca::fixtures;
using rca::FaultType;
using rca::IncidentCase;
using rca::LogEntry;
using rca::MetricSeries;
using rca::Micros;
using rca::Severity;
using rca::Span;

GenOptions small_options() {
  GenOptions options;
  options.baseline_s = 20.0;
  options.incident_s = 10.0;
  options.trace_rate_hz = 2.0;
  return options;
}

TEST(Topology, DefaultHasEightServicesWithFrontendEntry) {
  Topology t = Topology::default_topology();
  ASSERT_EQ(t.services.size(), 8u);
  EXPECT_EQ(t.services[0].name, "frontend");
  EXPECT_EQ(t.services[t.index_of("payment")].name, "payment");
  EXPECT_THROW(t.index_of("no-such-service"), rca::UsageError);

  EXPECT_EQ(t.services[t.index_of("frontend")].edges.size(), 4u);
  EXPECT_EQ(t.services[t.index_of("checkout")].edges.size(), 3u);
  EXPECT_EQ(t.services[t.index_of("recommend")].edges.size(), 1u);
  for (const ServiceSpec& svc : t.services)
    for (const CallEdge& edge : svc.edges) {
      ASSERT_LT(edge.callee, t.services.size());
      EXPECT_NE(edge.callee, 0u) << svc.name << " must not call the entry point";
      EXPECT_GT(edge.probability, 0.0);
      EXPECT_LE(edge.probability, 1.0);
    }
}

TEST(PickTarget, DeterministicAndNeverTheEntryPoint) {
  Topology t = Topology::default_topology();
  for (FaultType fault : rca::all_fault_types()) {
    for (std::uint64_t seed = 0; seed < 14; ++seed) {
      std::string target = pick_target(fault, seed, t);
      EXPECT_NE(target, "frontend");
      EXPECT_NO_THROW(t.index_of(target));
      EXPECT_EQ(pick_target(fault, seed, t), target);
    }
  }

  // Seven services are callable in the default topology; consecutive seeds
  // sweep all of them.
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 7; ++seed)
    seen.insert(pick_target(FaultType::kCpu, seed, t));
  EXPECT_EQ(seen.size(), 7u);
}

TEST(PickTarget, UncallableTopologyIsAUsageError) {
  Topology isolated;
  isolated.services = {{"alone", {"op"}, 10.0, 1, {}},
                       {"hermit", {"op"}, 10.0, 1, {}}};
  EXPECT_THROW(pick_target(FaultType::kCpu, 0, isolated), rca::UsageError);
}

TEST(GenerateCase, ByteIdenticalForIdenticalArguments) {
  GenOptions options = small_options();
  IncidentCase a = generate_case(FaultType::kCpu, "payment", 5, options);
  IncidentCase b = generate_case(FaultType::kCpu, "payment", 5, options);

  testutil::TempDir dir("fixture-det");
  rca::ingest::write_case(a, dir.str("a"));
  rca::ingest::write_case(b, dir.str("b"));
  for (const char* file : {"manifest.json", "metrics.csv", "logs.jsonl", "traces.csv"})
    EXPECT_EQ(testutil::read_file(dir.str(std::string("a/") + file)),
              testutil::read_file(dir.str(std::string("b/") + file)))
        << file;

  IncidentCase c = generate_case(FaultType::kCpu, "payment", 6, options);
  rca::ingest::write_case(c, dir.str("c"));
  EXPECT_NE(testutil::read_file(dir.str("a/metrics.csv")),
            testutil::read_file(dir.str("c/metrics.csv")));
}

TEST(GenerateCase, LabelsWindowAndGroundTruth) {
  IncidentCase incident =
      generate_case(FaultType::kLoss, "currency", 7, small_options());
  EXPECT_EQ(incident.case_id, "case-loss-currency-s7");
  ASSERT_TRUE(incident.ground_truth.has_value());
  EXPECT_EQ(incident.ground_truth->service.name, "currency");
  EXPECT_EQ(incident.ground_truth->fault, FaultType::kLoss);

  // The labeled window covers exactly the incident phase; telemetry begins
  // one baseline earlier.
  EXPECT_EQ(incident.window.end_us - incident.window.start_us, 10'000'000);
  ASSERT_FALSE(incident.metrics.empty());
  ASSERT_FALSE(incident.metrics[0].samples.empty());
  Micros first_sample = incident.metrics[0].samples.front().time_us;
  EXPECT_EQ(incident.window.start_us - first_sample, 20'000'000);
}

TEST(GenerateCase, StructureSurvivesValidation) {
  IncidentCase incident =
      generate_case(FaultType::kDelay, "checkout", 11, small_options());
  rca::ValidationReport report = rca::validate_case(incident);
  EXPECT_TRUE(report.ok()) << report.to_string();

  // frontend and catalog run two pods, everything else one: ten pods, three
  // metric series each, thirty one-second samples per series.
  std::set<std::string> pods;
  for (const MetricSeries& series : incident.metrics) {
    pods.insert(series.pod.name);
    EXPECT_EQ(series.samples.size(), 30u);
    for (std::size_t i = 1; i < series.samples.size(); ++i)
      EXPECT_LT(series.samples[i - 1].time_us, series.samples[i].time_us);
    for (const auto& sample : series.samples) EXPECT_GE(sample.value, 0.0);
  }
  EXPECT_EQ(pods.size(), 10u);
  EXPECT_EQ(incident.metrics.size(), 30u);

  for (std::size_t i = 1; i < incident.logs.size(); ++i)
    EXPECT_LE(incident.logs[i - 1].time_us, incident.logs[i].time_us);

  // Pod names normalize back to the topology's service names.
  std::vector<std::string> services;
  for (const rca::ServiceId& s : incident.services()) services.push_back(s.name);
  EXPECT_EQ(services, (std::vector<std::string>{"adservice", "catalog", "checkout",
                                                "currency", "email", "frontend",
                                                "payment", "recommend"}));

  // Every trace is a tree rooted at the entry point.
  std::map<std::string, std::set<std::string>> ids_by_trace;
  for (const Span& span : incident.spans)
    ids_by_trace[span.trace_id].insert(span.span_id);
  EXPECT_FALSE(ids_by_trace.empty());
  std::map<std::string, int> roots_by_trace;
  for (const Span& span : incident.spans) {
    EXPECT_GT(span.duration_us, 0);
    if (span.parent_span_id) {
      EXPECT_TRUE(ids_by_trace[span.trace_id].count(*span.parent_span_id))
          << "dangling parent in " << span.trace_id;
    } else {
      ++roots_by_trace[span.trace_id];
      EXPECT_EQ(span.service.name, "frontend");
    }
  }
  for (const auto& [trace_id, roots] : roots_by_trace) EXPECT_EQ(roots, 1);
}

TEST(GenerateCase, DelayFaultInflatesTargetSpansAfterOnset) {
  IncidentCase incident =
      generate_case(FaultType::kDelay, "checkout", 1, small_options());
  Micros onset = incident.window.start_us;

  double baseline_sum = 0.0, incident_sum = 0.0;
  int baseline_n = 0, incident_n = 0;
  for (const Span& span : incident.spans) {
    if (span.service.name != "checkout") continue;
    if (span.start_us < onset) {
      baseline_sum += static_cast<double>(span.duration_us);
      ++baseline_n;
    } else {
      incident_sum += static_cast<double>(span.duration_us);
      ++incident_n;
    }
  }
  ASSERT_GE(baseline_n, 3);
  ASSERT_GE(incident_n, 3);
  // The injected delay adds at least 300ms to every post-onset span.
  EXPECT_GT(incident_sum / incident_n, baseline_sum / baseline_n + 200'000.0);
}

TEST(GenerateCase, CpuFaultShiftsTheTargetMetricAndEchoesToCallers) {
  IncidentCase incident =
      generate_case(FaultType::kCpu, "payment", 2, small_options());
  Micros onset = incident.window.start_us;

  auto shift = [&](const std::string& pod_prefix, const std::string& metric) {
    double before_sum = 0.0, after_sum = 0.0;
    int before_n = 0, after_n = 0;
    for (const MetricSeries& series : incident.metrics) {
      if (series.metric != metric) continue;
      if (series.pod.name.rfind(pod_prefix, 0) != 0) continue;
      for (const auto& sample : series.samples) {
        if (sample.time_us < onset) {
          before_sum += sample.value;
          ++before_n;
        } else {
          after_sum += sample.value;
          ++after_n;
        }
      }
    }
    EXPECT_GT(before_n, 0);
    EXPECT_GT(after_n, 0);
    return after_sum / after_n - before_sum / before_n;
  };

  EXPECT_GT(shift("payment-", "cpu"), 20.0);
  // checkout calls payment, so it sees the signal attenuated and two
  // seconds late; frontend only reaches payment through checkout and
  // stays quiet.
  EXPECT_GT(shift("checkout-", "cpu"), 5.0);
  EXPECT_LT(std::abs(shift("frontend-", "cpu")), 10.0);
  EXPECT_LT(std::abs(shift("email-", "cpu")), 10.0);
  // The fault moves only its own metric.
  EXPECT_LT(std::abs(shift("payment-", "disk_io")), 10.0);
}

TEST(GenerateCase, LossFaultBurstsErrorsOnTargetPodsOnly) {
  IncidentCase incident =
      generate_case(FaultType::kLoss, "currency", 3, small_options());
  Micros onset = incident.window.start_us;

  int errors = 0;
  for (const LogEntry& entry : incident.logs) {
    if (entry.severity != Severity::kError) continue;
    ++errors;
    EXPECT_GE(entry.time_us, onset);
    EXPECT_EQ(entry.pod.name.rfind("currency-", 0), 0u) << entry.pod.name;
  }
  EXPECT_GE(errors, 3);
}

TEST(GenerateCase, RejectsBadArguments) {
  GenOptions options = small_options();
  EXPECT_THROW(generate_case(FaultType::kCpu, "frontend", 1, options), rca::UsageError);
  EXPECT_THROW(generate_case(FaultType::kCpu, "ghost", 1, options), rca::UsageError);

  GenOptions zero_baseline = small_options();
  zero_baseline.baseline_s = 0.0;
  EXPECT_THROW(generate_case(FaultType::kCpu, "payment", 1, zero_baseline),
               rca::UsageError);
  GenOptions zero_incident = small_options();
  zero_incident.incident_s = 0.0;
  EXPECT_THROW(generate_case(FaultType::kCpu, "payment", 1, zero_incident),
               rca::UsageError);
  GenOptions bad_rate = small_options();
  bad_rate.trace_rate_hz = -1.0;
  EXPECT_THROW(generate_case(FaultType::kCpu, "payment", 1, bad_rate),
               rca::UsageError);
}

}  // namespace
