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
#include <string>
#include <vector>

#include "rca/config.hpp"
#include "rca/model.hpp"

// Trace-side ranker. Baseline span durations (spans starting before the
// incident window) yield per-operation robust statistics; incident spans are
// flagged against a median + MAD threshold; services are scored by a
// weighted composite of four evidence components and ranked best first.
namespace rca::twist {

struct StatsKey {
  ServiceId service;
  std::string operation;
  auto operator<=>(const StatsKey&) const = default;
};

struct KeyStats {
  double median = 0.0;
  double mad = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

// Duration statistics per (service, operation) over baseline spans. Keys
// unseen in the baseline fall back to the pooled global population.
struct BaselineStats {
  std::map<StatsKey, KeyStats> per_key;
  KeyStats global;
  std::size_t baseline_span_count = 0;

  const KeyStats& lookup(const ServiceId& service, const std::string& operation) const;
};

// Sorts a copy. Even-sized input averages the two middle elements.
double median_of(std::vector<double> values);
// Median absolute deviation around `center`.
double mad_of(const std::vector<double>& values, double center);

// Throws DataError when the case has no spans before the incident window;
// thresholds would otherwise be meaningless.
BaselineStats compute_baseline_stats(const IncidentCase& incident);

// median + k_mad * 1.4826 * MAD. A zero MAD (constant baseline) degrades
// the threshold to median * (1 + fallback_ratio).
double anomaly_threshold(const KeyStats& stats, const TwistConfig& config);

// Span ids are only unique within one trace, so anomalies are keyed by the
// (trace, span) pair.
struct SpanKey {
  std::string trace_id;
  std::string span_id;
  auto operator<=>(const SpanKey&) const = default;
};

struct SpanAnomaly {
  bool flagged = false;
  double threshold_us = 0.0;
  // max(0, duration - threshold); zero for unflagged spans.
  double excess_us = 0.0;
};

// One entry per span starting inside the incident window, flagged or not.
// Membership in this map is what later stages treat as "incident span".
std::map<SpanKey, SpanAnomaly> detect_span_anomalies(const IncidentCase& incident,
                                                     const BaselineStats& stats,
                                                     const TwistConfig& config);

// Parent-child structure of one trace. A parent reference that closes a
// cycle is dropped and the trace marked malformed; scoring still proceeds.
struct TraceDag {
  std::string trace_id;
  std::vector<Span> spans;
  // (parent index, child index) into `spans`.
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> child_count;
  bool anomalous = false;
  bool malformed = false;
};

std::vector<TraceDag> build_trace_dags(const std::vector<Trace>& traces,
                                       const std::map<SpanKey, SpanAnomaly>& anomalies);

struct ComponentScores {
  double self_anomaly = 0.0;    // flagged share of the service's incident spans
  double trace_impact = 0.0;    // share of anomalous traces touching the service
  double blast_radius = 0.0;    // mean child fan-out, relative to the system max
  double delay_severity = 0.0;  // worst excess, relative to the system max
  double composite = 0.0;
};

// Scores every service with at least one incident-window span.
std::map<ServiceId, ComponentScores> component_scores(
    const std::vector<TraceDag>& dags, const std::map<SpanKey, SpanAnomaly>& anomalies,
    const TwistConfig& config);

// Full pipeline: baseline stats, span anomalies, trace structure, composite
// scores. Ties are broken by delay severity, then candidate name. Entry
// rationales carry the four component values for report rendering.
Ranking twist_rank(const IncidentCase& incident, const TwistConfig& config);

}  // namespace rca::twist
