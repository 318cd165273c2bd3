#include <rca/model.hpp>

#include <gtest/gtest.h>

#include <rca/errors.hpp>

#include "testutil.hpp"

using testutil::make_log;
using testutil::make_series;
using testutil::make_span;

namespace {

TEST(NameNormalizer, StripsStackedReplicaSuffixes) {
  rca::NameNormalizer n;
  EXPECT_EQ(n.service_of({"checkout-6f4f7d5b6b-x2v9k"}).name, "checkout");
  EXPECT_EQ(n.service_of({"frontend-0"}).name, "frontend");
  EXPECT_EQ(n.service_of({"payment-abcde"}).name, "payment");
  EXPECT_EQ(n.service_of({"catalog"}).name, "catalog");
}

TEST(NameNormalizer, CustomPattern) {
  rca::NameNormalizer n("_[0-9]+$");
  EXPECT_EQ(n.service_of({"db_123"}).name, "db");
  EXPECT_EQ(n.service_of({"db-123"}).name, "db-123");
}

TEST(NameNormalizer, InvalidPatternThrowsUsageError) {
  EXPECT_THROW(rca::NameNormalizer("(["), rca::UsageError);
}

TEST(Severity, ParseIsCaseInsensitive) {
  EXPECT_EQ(rca::parse_severity("error"), rca::Severity::kError);
  EXPECT_EQ(rca::parse_severity("ERROR"), rca::Severity::kError);
  EXPECT_EQ(rca::parse_severity("Warn"), rca::Severity::kWarn);
  EXPECT_EQ(rca::parse_severity("warning"), rca::Severity::kWarn);
  EXPECT_EQ(rca::parse_severity("whatever"), rca::Severity::kUnknown);
}

TEST(FaultType, ParseAndRoundTrip) {
  auto all = rca::all_fault_types();
  EXPECT_EQ(all.size(), 6u);
  for (rca::FaultType f : all) {
    auto parsed = rca::parse_fault_type(rca::to_string(f));
    ASSERT_TRUE(parsed.has_value());
    EXPECT_EQ(*parsed, f);
  }
  EXPECT_EQ(rca::parse_fault_type("mem"), rca::FaultType::kMem);
  EXPECT_FALSE(rca::parse_fault_type("gamma-rays").has_value());
}

TEST(TimeWindow, HalfOpenContains) {
  rca::TimeWindow w{100, 200};
  EXPECT_TRUE(w.contains(100));
  EXPECT_TRUE(w.contains(199));
  EXPECT_FALSE(w.contains(200));
  EXPECT_FALSE(w.contains(99));
}

TEST(Traces, GroupsAndSortsByTraceId) {
  std::vector<rca::Span> spans;
  spans.push_back(make_span("t2", "s1", "", "b", "op", 50, 10));
  spans.push_back(make_span("t1", "s2", "s1", "a", "op", 20, 10));
  spans.push_back(make_span("t1", "s1", "", "a", "op", 10, 40));

  auto traces = rca::group_spans_into_traces(spans);
  ASSERT_EQ(traces.size(), 2u);
  EXPECT_EQ(traces[0].trace_id, "t1");
  EXPECT_EQ(traces[1].trace_id, "t2");
  ASSERT_EQ(traces[0].spans.size(), 2u);
  // Sorted by (start_us, span_id).
  EXPECT_EQ(traces[0].spans[0].span_id, "s1");
  EXPECT_EQ(traces[0].spans[1].span_id, "s2");
  EXPECT_TRUE(traces[0].dangling.empty());
  ASSERT_NE(traces[0].root(), nullptr);
  EXPECT_EQ(traces[0].root()->span_id, "s1");
}

TEST(Traces, DanglingParentIsListedNotFatal) {
  std::vector<rca::Span> spans;
  spans.push_back(make_span("t1", "s1", "ghost", "a", "op", 10, 40));
  auto traces = rca::group_spans_into_traces(spans);
  ASSERT_EQ(traces.size(), 1u);
  ASSERT_EQ(traces[0].dangling.size(), 1u);
  EXPECT_EQ(traces[0].dangling[0], "s1");
  // Every span claims a parent; root() falls back to the first span.
  ASSERT_NE(traces[0].root(), nullptr);
  EXPECT_EQ(traces[0].root()->span_id, "s1");
}

TEST(Traces, DuplicateSpanIdThrowsDataError) {
  std::vector<rca::Span> spans;
  spans.push_back(make_span("t1", "s1", "", "a", "op", 10, 40));
  spans.push_back(make_span("t1", "s1", "", "a", "op", 20, 40));
  try {
    rca::group_spans_into_traces(spans);
    FAIL() << "expected DataError";
  } catch (const rca::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("t1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("s1"), std::string::npos);
  }
}

TEST(IncidentCase, ServicesUnionsSpansAndPods) {
  rca::IncidentCase c;
  c.case_id = "c";
  c.window = {0, 10};
  c.spans.push_back(make_span("t1", "s1", "", "zeta", "op", 1, 1));
  c.metrics.push_back(make_series("alpha-12345-abcde", "cpu", {{1, 0.5}}));
  c.logs.push_back(make_log(1, "beta-0", rca::Severity::kInfo, "hello"));

  auto services = c.services();
  ASSERT_EQ(services.size(), 3u);
  EXPECT_EQ(services[0].name, "alpha");
  EXPECT_EQ(services[1].name, "beta");
  EXPECT_EQ(services[2].name, "zeta");

  auto pods = c.pods_of({"alpha"});
  ASSERT_EQ(pods.size(), 1u);
  EXPECT_EQ(pods[0].name, "alpha-12345-abcde");
  EXPECT_TRUE(c.pods_of({"zeta"}).empty());
}

TEST(Ranking, PositionOfFindsCandidate) {
  rca::Ranking r;
  r.entries.push_back({{"a"}, 0.9, std::nullopt});
  r.entries.push_back({{"b"}, 0.5, std::nullopt});
  ASSERT_TRUE(r.position_of({"b"}).has_value());
  EXPECT_EQ(*r.position_of({"b"}), 1u);
  EXPECT_FALSE(r.position_of({"zzz"}).has_value());
}

TEST(Ranking, ViolationsCatchMalformedLists) {
  rca::Ranking dup;
  dup.entries.push_back({{"a"}, 0.9, std::nullopt});
  dup.entries.push_back({{"a"}, 0.5, std::nullopt});
  EXPECT_FALSE(dup.violations().empty());

  rca::Ranking range;
  range.entries.push_back({{"a"}, 1.5, std::nullopt});
  EXPECT_FALSE(range.violations().empty());

  rca::Ranking order;
  order.entries.push_back({{"a"}, 0.2, std::nullopt});
  order.entries.push_back({{"b"}, 0.9, std::nullopt});
  EXPECT_FALSE(order.violations().empty());

  rca::Ranking ok;
  ok.entries.push_back({{"a"}, 0.9, std::nullopt});
  ok.entries.push_back({{"b"}, 0.9, std::nullopt});
  ok.entries.push_back({{"c"}, 0.1, std::nullopt});
  EXPECT_TRUE(ok.violations().empty());
}

TEST(Ranking, SortIsDeterministicUnderTies) {
  rca::Ranking r;
  r.entries.push_back({{"zeta"}, 0.5, std::nullopt});
  r.entries.push_back({{"alpha"}, 0.5, std::nullopt});
  r.entries.push_back({{"mid"}, 0.9, std::nullopt});
  rca::sort_ranking(r);
  EXPECT_EQ(r.entries[0].candidate.name, "mid");
  EXPECT_EQ(r.entries[1].candidate.name, "alpha");
  EXPECT_EQ(r.entries[2].candidate.name, "zeta");
}

TEST(ValidateCase, CleanCasePasses) {
  rca::IncidentCase c;
  c.case_id = "ok";
  c.window = {0, 10};
  c.spans.push_back(make_span("t1", "s1", "", "a", "op", 1, 1));
  c.metrics.push_back(make_series("a-0", "cpu", {{1, 0.5}, {2, 0.6}}));
  EXPECT_TRUE(rca::validate_case(c).ok());
}

TEST(ValidateCase, ReportsEachDefect) {
  rca::IncidentCase c;
  c.case_id = "";
  c.window = {10, 10};  // empty window
  c.metrics.push_back(make_series("a-0", "cpu", {{2, 0.5}, {2, 0.6}}));  // non-increasing
  c.spans.push_back(make_span("t1", "s1", "s1", "a", "op", 1, -5));  // own parent, negative

  auto report = rca::validate_case(c);
  EXPECT_FALSE(report.ok());
  std::string text = report.to_string();
  EXPECT_NE(text.find("case_id"), std::string::npos);
  EXPECT_NE(text.find("window"), std::string::npos);
  EXPECT_NE(text.find("strictly increasing"), std::string::npos);
  EXPECT_NE(text.find("own parent"), std::string::npos);
  EXPECT_NE(text.find("negative duration"), std::string::npos);
}

}  // namespace
