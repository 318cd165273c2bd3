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

#include <compare>
#include <cstdint>
#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace rca {

// All timestamps are integer microseconds since the Unix epoch.
using Micros = std::int64_t;

// Logical service name; the unit every ranking and causal graph operates on.
struct ServiceId {
  std::string name;
  auto operator<=>(const ServiceId&) const = default;
};

// Concrete deployment unit as it appears in raw telemetry. Each pod maps to
// exactly one service via NameNormalizer.
struct PodId {
  std::string name;
  auto operator<=>(const PodId&) const = default;
};

enum class Severity { kDebug, kInfo, kWarn, kError, kFatal, kUnknown };

std::string to_string(Severity s);
// Case-insensitive; unrecognized labels become kUnknown rather than failing
// the whole load.
Severity parse_severity(const std::string& text);

enum class FaultType { kCpu, kDelay, kDisk, kLoss, kMem, kSocket };

std::string to_string(FaultType f);
// Case-insensitive match against CPU/DELAY/DISK/LOSS/MEM/SOCKET.
std::optional<FaultType> parse_fault_type(const std::string& text);
std::vector<FaultType> all_fault_types();

struct MetricSample {
  Micros time_us = 0;
  double value = 0.0;
};

// One (pod, metric) time series. Sample timestamps are strictly increasing.
struct MetricSeries {
  PodId pod;
  std::string metric;
  std::vector<MetricSample> samples;
};

struct LogEntry {
  Micros time_us = 0;
  PodId pod;
  Severity severity = Severity::kInfo;
  std::string message;
};

struct Span {
  std::string trace_id;
  std::string span_id;
  // Empty optional for root spans. A parent id that resolves to no span in
  // the same trace marks the span as dangling, not invalid.
  std::optional<std::string> parent_span_id;
  ServiceId service;
  std::string operation;
  Micros start_us = 0;
  Micros duration_us = 0;
};

// Half-open incident window [start_us, end_us). Telemetry before start_us is
// the fault-free baseline.
struct TimeWindow {
  Micros start_us = 0;
  Micros end_us = 0;
  bool contains(Micros t) const { return t >= start_us && t < end_us; }
};

struct GroundTruth {
  ServiceId service;
  FaultType fault = FaultType::kCpu;
};

// Strips replica suffixes from pod names to recover the owning service:
// "checkout-6f4f7d5b6b-x2v9k" -> "checkout". The suffix pattern is applied
// repeatedly because orchestrators stack several generated segments.
class NameNormalizer {
 public:
  NameNormalizer();
  // Throws UsageError if the pattern is not a valid ECMAScript regex.
  explicit NameNormalizer(std::string suffix_pattern);

  ServiceId service_of(const PodId& pod) const;
  const std::string& pattern() const { return pattern_; }

  static const char* default_pattern();

 private:
  std::string pattern_;
  std::regex regex_;
};

// One incident: a bounded time window plus every telemetry record observed
// around it. Immutable once loaded or generated.
struct IncidentCase {
  std::string case_id;
  TimeWindow window;
  std::vector<MetricSeries> metrics;
  std::vector<LogEntry> logs;
  std::vector<Span> spans;
  std::optional<GroundTruth> ground_truth;
  NameNormalizer normalizer;

  ServiceId service_of(const PodId& pod) const { return normalizer.service_of(pod); }
  // Sorted union of span services and the normalized owners of every pod
  // seen in metrics or logs.
  std::vector<ServiceId> services() const;
  // Sorted list of distinct pods seen in metrics or logs that normalize to
  // the given service.
  std::vector<PodId> pods_of(const ServiceId& service) const;
};

// Spans of one trace, sorted by (start_us, span_id). `dangling` lists span
// ids whose parent id resolves to no span in the trace.
struct Trace {
  std::string trace_id;
  std::vector<Span> spans;
  std::vector<std::string> dangling;

  // First root span in sort order, or the first span when every span claims
  // a parent.
  const Span* root() const;
};

// Partitions spans by trace id. Throws DataError naming the offending ids
// when a span id repeats within one trace. Output is sorted by trace_id.
std::vector<Trace> group_spans_into_traces(const std::vector<Span>& spans);

// A scored candidate list, best first. `rationale` carries human-readable
// provenance for report rendering; scoring never reads it.
struct Ranking {
  struct Entry {
    ServiceId candidate;
    double score = 0.0;
    std::optional<std::string> rationale;
  };
  std::vector<Entry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  std::optional<std::size_t> position_of(const ServiceId& candidate) const;

  // Empty when the ranking is well formed: candidates unique, every score
  // finite and in [0, 1], scores non-increasing.
  std::vector<std::string> violations() const;
};

// Stable sort by descending score; equal scores keep candidate name order so
// repeated runs emit identical bytes.
void sort_ranking(Ranking& ranking);

struct Violation {
  std::string location;
  std::string message;
};

// Outcome of validate_case. Violations are data for the caller to render or
// act on; producing them never throws.
struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate_case(const IncidentCase& incident);

}  // namespace rca
