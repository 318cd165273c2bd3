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

#include "rca/twist.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rca/errors.hpp"

namespace rca::twist {

namespace {

constexpr double kMadToSigma = 1.4826;

KeyStats stats_of(const std::vector<double>& values) {
  KeyStats s;
  s.count = values.size();
  if (values.empty()) return s;
  s.median = median_of(values);
  s.mad = mad_of(values, s.median);
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

void check_weights(const TwistConfig& config) {
  double sum = 0.0;
  for (double w : config.weights) {
    if (w < 0.0) throw UsageError("twist weights must be non-negative");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw UsageError("twist weights must sum to 1, got " + std::to_string(sum));
}

}  // namespace

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mad_of(const std::vector<double>& values, double center) {
  std::vector<double> dev;
  dev.reserve(values.size());
  for (double v : values) dev.push_back(std::fabs(v - center));
  return median_of(std::move(dev));
}

const KeyStats& BaselineStats::lookup(const ServiceId& service,
                                      const std::string& operation) const {
  auto it = per_key.find(StatsKey{service, operation});
  return it != per_key.end() ? it->second : global;
}

BaselineStats compute_baseline_stats(const IncidentCase& incident) {
  std::map<StatsKey, std::vector<double>> grouped;
  std::vector<double> all;
  for (const Span& s : incident.spans) {
    if (s.start_us >= incident.window.start_us) continue;
    double d = static_cast<double>(s.duration_us);
    grouped[StatsKey{s.service, s.operation}].push_back(d);
    all.push_back(d);
  }
  if (all.empty())
    throw DataError("case '" + incident.case_id +
                    "' has no baseline spans before the incident window");

  BaselineStats stats;
  stats.baseline_span_count = all.size();
  for (const auto& [key, values] : grouped) stats.per_key[key] = stats_of(values);
  stats.global = stats_of(all);
  return stats;
}

double anomaly_threshold(const KeyStats& stats, const TwistConfig& config) {
  if (stats.mad == 0.0) return stats.median * (1.0 + config.fallback_ratio);
  return stats.median + config.k_mad * kMadToSigma * stats.mad;
}

std::map<SpanKey, SpanAnomaly> detect_span_anomalies(const IncidentCase& incident,
                                                     const BaselineStats& stats,
                                                     const TwistConfig& config) {
  std::map<SpanKey, SpanAnomaly> out;
  for (const Span& s : incident.spans) {
    if (!incident.window.contains(s.start_us)) continue;
    const KeyStats& key_stats = stats.lookup(s.service, s.operation);
    SpanAnomaly a;
    a.threshold_us = anomaly_threshold(key_stats, config);
    double d = static_cast<double>(s.duration_us);
    a.flagged = d > a.threshold_us;
    a.excess_us = a.flagged ? d - a.threshold_us : 0.0;
    out[SpanKey{s.trace_id, s.span_id}] = a;
  }
  return out;
}

std::vector<TraceDag> build_trace_dags(const std::vector<Trace>& traces,
                                       const std::map<SpanKey, SpanAnomaly>& anomalies) {
  std::vector<TraceDag> dags;
  dags.reserve(traces.size());

  for (const Trace& trace : traces) {
    TraceDag dag;
    dag.trace_id = trace.trace_id;
    dag.spans = trace.spans;
    dag.child_count.assign(dag.spans.size(), 0);

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < dag.spans.size(); ++i) index[dag.spans[i].span_id] = i;

    // parent[i] = index of i's parent, or npos. Resolved before cycle
    // breaking so the walk below sees the raw reference structure.
    constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> parent(dag.spans.size(), npos);
    for (std::size_t i = 0; i < dag.spans.size(); ++i) {
      const Span& s = dag.spans[i];
      if (!s.parent_span_id) continue;
      auto it = index.find(*s.parent_span_id);
      if (it != index.end()) parent[i] = it->second;
    }

    // Parent references form a functional graph; a cycle can only be a loop
    // of parent links. Walk each chain, and when a node on the current path
    // reappears, cut that node's parent link.
    enum class Mark { kWhite, kGray, kBlack };
    std::vector<Mark> mark(dag.spans.size(), Mark::kWhite);
    for (std::size_t start = 0; start < dag.spans.size(); ++start) {
      if (mark[start] != Mark::kWhite) continue;
      std::vector<std::size_t> path;
      std::size_t node = start;
      while (node != npos && mark[node] == Mark::kWhite) {
        mark[node] = Mark::kGray;
        path.push_back(node);
        std::size_t up = parent[node];
        if (up != npos && mark[up] == Mark::kGray) {
          parent[node] = npos;
          dag.malformed = true;
          break;
        }
        node = up;
      }
      for (std::size_t n : path) mark[n] = Mark::kBlack;
    }

    for (std::size_t i = 0; i < dag.spans.size(); ++i) {
      if (parent[i] == npos) continue;
      dag.edges.emplace_back(parent[i], i);
      ++dag.child_count[parent[i]];
    }

    for (const Span& s : dag.spans) {
      auto it = anomalies.find(SpanKey{s.trace_id, s.span_id});
      if (it != anomalies.end() && it->second.flagged) {
        dag.anomalous = true;
        break;
      }
    }
    dags.push_back(std::move(dag));
  }
  return dags;
}

std::map<ServiceId, ComponentScores> component_scores(
    const std::vector<TraceDag>& dags, const std::map<SpanKey, SpanAnomaly>& anomalies,
    const TwistConfig& config) {
  check_weights(config);

  struct Tally {
    std::size_t incident_spans = 0;
    std::size_t flagged_spans = 0;
    double fanout_sum = 0.0;
    std::size_t anomalous_traces = 0;
    double max_excess = 0.0;
  };
  std::map<ServiceId, Tally> tallies;

  std::size_t total_anomalous_traces = 0;
  for (const TraceDag& dag : dags) {
    if (dag.anomalous) ++total_anomalous_traces;
    for (std::size_t i = 0; i < dag.spans.size(); ++i) {
      const Span& s = dag.spans[i];
      auto it = anomalies.find(SpanKey{s.trace_id, s.span_id});
      if (it == anomalies.end()) continue;
      Tally& t = tallies[s.service];
      ++t.incident_spans;
      t.fanout_sum += static_cast<double>(dag.child_count[i]);
      if (it->second.flagged) {
        ++t.flagged_spans;
        t.max_excess = std::max(t.max_excess, it->second.excess_us);
      }
    }
  }
  // Membership pass runs after every tally exists: a service's incident
  // spans may sit entirely in other traces than the anomalous one touching it.
  for (const TraceDag& dag : dags) {
    if (!dag.anomalous) continue;
    std::set<ServiceId> members;
    for (const Span& s : dag.spans) members.insert(s.service);
    for (const ServiceId& s : members) {
      auto it = tallies.find(s);
      if (it != tallies.end()) ++it->second.anomalous_traces;
    }
  }

  double max_mean_fanout = 0.0;
  double max_excess = 0.0;
  for (const auto& [service, t] : tallies) {
    if (t.incident_spans > 0)
      max_mean_fanout =
          std::max(max_mean_fanout, t.fanout_sum / static_cast<double>(t.incident_spans));
    max_excess = std::max(max_excess, t.max_excess);
  }

  std::map<ServiceId, ComponentScores> out;
  for (const auto& [service, t] : tallies) {
    if (t.incident_spans == 0) continue;
    ComponentScores c;
    c.self_anomaly =
        static_cast<double>(t.flagged_spans) / static_cast<double>(t.incident_spans);
    c.trace_impact = total_anomalous_traces == 0
                         ? 0.0
                         : static_cast<double>(t.anomalous_traces) /
                               static_cast<double>(total_anomalous_traces);
    double mean_fanout = t.fanout_sum / static_cast<double>(t.incident_spans);
    c.blast_radius = max_mean_fanout == 0.0 ? 0.0 : mean_fanout / max_mean_fanout;
    c.delay_severity = max_excess == 0.0 ? 0.0 : t.max_excess / max_excess;
    c.composite = config.weights[0] * c.self_anomaly + config.weights[1] * c.trace_impact +
                  config.weights[2] * c.blast_radius + config.weights[3] * c.delay_severity;
    out[service] = c;
  }
  return out;
}

Ranking twist_rank(const IncidentCase& incident, const TwistConfig& config) {
  check_weights(config);
  BaselineStats stats = compute_baseline_stats(incident);
  auto anomalies = detect_span_anomalies(incident, stats, config);
  auto traces = group_spans_into_traces(incident.spans);
  auto dags = build_trace_dags(traces, anomalies);
  auto components = component_scores(dags, anomalies, config);

  struct Scored {
    ServiceId service;
    ComponentScores c;
  };
  std::vector<Scored> scored;
  scored.reserve(components.size());
  for (const auto& [service, c] : components) scored.push_back({service, c});
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.c.composite != b.c.composite) return a.c.composite > b.c.composite;
    if (a.c.delay_severity != b.c.delay_severity)
      return a.c.delay_severity > b.c.delay_severity;
    return a.service.name < b.service.name;
  });

  Ranking ranking;
  for (const Scored& s : scored) {
    std::ostringstream rationale;
    rationale.precision(4);
    rationale << std::fixed << "self_anomaly=" << s.c.self_anomaly
              << " trace_impact=" << s.c.trace_impact
              << " blast_radius=" << s.c.blast_radius
              << " delay_severity=" << s.c.delay_severity;
    ranking.entries.push_back({s.service, s.c.composite, rationale.str()});
  }

  std::vector<std::string> problems = ranking.violations();
  if (!problems.empty())
    throw DataError("trace ranking violated its contract: " + problems.front());
  return ranking;
}

}  // namespace rca::twist
