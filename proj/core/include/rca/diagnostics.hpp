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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rca/config.hpp"
#include "rca/model.hpp"

// Diagnostic bundle synthesis: everything an analysis agent sees about one
// candidate, rendered deterministically and kept inside a token budget.
namespace rca::diag {

// Rendered verbatim when a candidate has no log lines at all.
inline constexpr const char* kEmptyLogMarker = "source log was empty";

// One aggregation window. count == 0 means no samples fell in the window;
// mean/max/p95 are meaningless then and render as "no samples".
struct ProfileRow {
  Micros window_start_us = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double max = 0.0;
  double p95 = 0.0;
};

// Windowed statistics over the incident window, one row list per metric.
// When several pods contribute, keys become "metric@pod" to keep the series
// apart.
struct ProfileAggregate {
  std::string label;
  int window_s = 0;
  Micros anchor_us = 0;
  std::map<std::string, std::vector<ProfileRow>> per_metric;
};

// Windows of `window_s` anchored at the incident window start,
// ceil(window_length / window_s) of them, empty ones included. Throws
// DataError when the pod appears nowhere in the case.
ProfileAggregate aggregate_profile(const IncidentCase& incident, const PodId& pod,
                                   int window_s);
// Same, merged over every pod of the service.
ProfileAggregate aggregate_service_profile(const IncidentCase& incident,
                                           const ServiceId& service, int window_s);

std::string render_profile_table(const ProfileAggregate& profile);

// One 900x300 panel per metric, mean/max/p95 polylines, gaps where a window
// has no samples. nullopt when there is nothing to plot (no metrics, or
// every window empty).
std::optional<std::vector<std::uint8_t>> render_profile_chart(
    const ProfileAggregate& profile);

// Immediate callers and callees of one service, with call-edge counts taken
// from resolved parent-child span pairs across all traces.
struct DependencySubgraph {
  ServiceId center;
  std::map<ServiceId, std::size_t> callers;
  std::map<ServiceId, std::size_t> callees;
};

DependencySubgraph extract_subgraph(const IncidentCase& incident, const ServiceId& service);
std::string render_subgraph_text(const DependencySubgraph& graph);

struct LogStats {
  std::size_t total_in = 0;
  std::size_t matched = 0;      // entries passing the error filter
  std::size_t after_dedup = 0;  // matched entries surviving dedup
  std::size_t backfilled = 0;   // non-error entries added to reach the cap
  bool sampled = false;
};

// Error-first excerpt of a pod's logs: severity ERROR/FATAL or messages
// containing exception/traceback/panic/fatal, deduplicated after stripping
// leading timestamps, seeded-sampled down to `cap` when overfull, backfilled
// with the most recent other lines when underfull. Entries are time-ordered.
struct RefinedLogCorpus {
  std::vector<LogEntry> entries;
  LogStats stats;
  // True only when the source had no lines at all; rendering then emits
  // kEmptyLogMarker.
  bool empty_marker = false;
};

RefinedLogCorpus abstract_logs(const std::vector<LogEntry>& source, int cap,
                               std::uint64_t seed);
RefinedLogCorpus abstract_logs(const IncidentCase& incident, const PodId& pod, int cap,
                               std::uint64_t seed);
std::string render_logs_text(const RefinedLogCorpus& corpus);

struct BundleStats {
  std::size_t estimated_tokens = 0;  // after truncation
  std::size_t dropped_log_entries = 0;
  std::size_t dropped_profile_rows = 0;
};

// Assembled evidence for one candidate. `text` is the canonical payload
// that goes into prompts; it is what the token budget was enforced on.
struct DiagnosticBundle {
  ServiceId service;
  std::vector<PodId> pods;
  ProfileAggregate profile;
  std::optional<std::vector<std::uint8_t>> chart_png;
  DependencySubgraph subgraph;
  RefinedLogCorpus logs;
  BundleStats stats;
  std::string text;
};

// chars / 4, rounded up.
std::size_t estimate_tokens(const std::string& text);

// Single-pod bundle. Throws DataError when the pod appears nowhere.
DiagnosticBundle build_bundle(const IncidentCase& incident, const PodId& pod,
                              const DiagConfig& config);
// Bundle over all pods of a service; valid for trace-only services too.
// Throws DataError when the service appears nowhere in the case.
DiagnosticBundle build_service_bundle(const IncidentCase& incident,
                                      const ServiceId& service, const DiagConfig& config);

// Audit form: every bundle part plus truncation stats; the chart is
// described (size, crc32), not embedded.
nlohmann::json bundle_to_json(const DiagnosticBundle& bundle);

}  // namespace rca::diag
