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
#include <optional>
#include <tuple>
#include <vector>

#include "rca/config.hpp"
#include "rca/model.hpp"

// Metrics-side ranker. Each series gets a robust anomaly score against its
// baseline; pairwise Granger F-tests over resampled series build a directed
// service-level causal graph; a damped walk on the edge-reversed graph,
// restarted in proportion to anomaly mass, yields the ranking.
namespace rca::metrics {

struct MetricAnomaly {
  PodId pod;
  std::string metric;
  double score = 0.0;
};

// Robust z-score per series: the worst incident-window deviation from the
// baseline median, in MAD units (MAD floored at 1e-9, score capped at 1e12).
// A series without its own baseline borrows the pooled baseline of the same
// metric name, then the all-series pool; with no baseline anywhere the
// score is 0. Sorted by (pod, metric).
std::vector<MetricAnomaly> metric_anomaly_scores(const IncidentCase& incident);

// Max anomaly over each service's series. Services owning no series are
// absent.
std::map<ServiceId, double> service_anomaly_scores(const IncidentCase& incident);

// Mean-per-bucket resampling onto a fixed grid anchored at `origin_us`;
// interior gaps are forward-filled. `values` covers the series' occupied
// bucket range only; buckets before the first or after the last sample are
// not invented.
struct ResampledSeries {
  std::int64_t first_bucket = 0;
  std::vector<double> values;
};
ResampledSeries resample_series(const MetricSeries& series, Micros origin_us,
                                Micros step_us);

struct GrangerResult {
  double f_stat = 0.0;
  double p_value = 1.0;
};

// Does lagged x improve an AR(lag) fit of y? F-test of the restricted model
// (constant + y lags) against the augmented one, on the n-lag usable rows.
// Returns nullopt when the segment is too short, a regressor matrix is rank
// deficient, or both residuals vanish.
std::optional<GrangerResult> granger_f_test(const std::vector<double>& x,
                                            const std::vector<double>& y, int lag);

// Directed service graph; an edge (cause, effect) carries the number of
// significant metric-pair links from cause's series to effect's series.
// Self-edges are never produced.
struct CausalGraph {
  std::vector<ServiceId> nodes;
  std::map<std::pair<ServiceId, ServiceId>, int> edges;

  struct Stats {
    std::size_t pairs_considered = 0;
    std::size_t pairs_tested = 0;
    std::size_t skipped_short = 0;
    std::size_t skipped_degenerate = 0;
  };
  Stats stats;
};

CausalGraph granger_graph(const IncidentCase& incident, const MetricsConfig& config);

// Stationary distribution of a damped walk with restart distribution
// `personalization` over directed weighted `edges` (u, v, w). Power
// iteration until the L1 step change drops below 1e-9, capped at 1000
// rounds; the mass of nodes without outgoing edges restarts immediately.
std::vector<double> stationary_scores(
    std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges,
    const std::vector<double>& personalization, double damping);

// Walk on the edge-reversed graph, restarted by normalized anomaly mass
// (uniform when every score is zero). With no edges at all the result
// degrades to the restart distribution, which ranks by anomaly alone; the
// entry rationales say so. Both RankMode values compute the same stationary
// solution: the restart-walk visit distribution has this closed form.
Ranking graph_rank(const CausalGraph& graph, const std::map<ServiceId, double>& anomaly,
                   const MetricsConfig& config);

// Full pipeline. A case without metric series yields an empty ranking.
Ranking metrics_rank(const IncidentCase& incident, const MetricsConfig& config);

}  // namespace rca::metrics
