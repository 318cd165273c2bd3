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

#include "rca/metrics_rca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>

#include "rca/errors.hpp"
#include "rca/twist.hpp"

namespace rca::metrics {

namespace {

constexpr double kMadToSigma = 1.4826;
constexpr double kMadFloor = 1e-9;
constexpr double kScoreCap = 1e12;
constexpr double kVarianceFloor = 1e-24;

double robust_deviation(const std::vector<double>& incident, double med, double mad) {
  double denom = kMadToSigma * std::max(mad, kMadFloor);
  double worst = 0.0;
  for (double v : incident) worst = std::max(worst, std::fabs(v - med) / denom);
  return std::min(worst, kScoreCap);
}

double variance_of(const double* data, std::size_t n) {
  if (n == 0) return 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += data[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) var += (data[i] - mean) * (data[i] - mean);
  return var / static_cast<double>(n);
}

}  // namespace

std::vector<MetricAnomaly> metric_anomaly_scores(const IncidentCase& incident) {
  struct Split {
    std::vector<double> baseline;
    std::vector<double> window;
  };
  std::vector<std::pair<const MetricSeries*, Split>> splits;
  splits.reserve(incident.metrics.size());
  std::map<std::string, std::vector<double>> metric_pool;
  std::vector<double> global_pool;

  for (const MetricSeries& series : incident.metrics) {
    Split split;
    for (const MetricSample& s : series.samples) {
      if (s.time_us < incident.window.start_us) {
        split.baseline.push_back(s.value);
        metric_pool[series.metric].push_back(s.value);
        global_pool.push_back(s.value);
      } else if (s.time_us < incident.window.end_us) {
        split.window.push_back(s.value);
      }
    }
    splits.push_back({&series, std::move(split)});
  }

  std::vector<MetricAnomaly> out;
  out.reserve(splits.size());
  for (const auto& [series, split] : splits) {
    MetricAnomaly a{series->pod, series->metric, 0.0};
    const std::vector<double>* reference = &split.baseline;
    if (reference->empty()) {
      auto it = metric_pool.find(series->metric);
      if (it != metric_pool.end() && !it->second.empty()) reference = &it->second;
      else if (!global_pool.empty()) reference = &global_pool;
      else reference = nullptr;
    }
    if (reference && !split.window.empty()) {
      double med = twist::median_of(*reference);
      double mad = twist::mad_of(*reference, med);
      a.score = robust_deviation(split.window, med, mad);
    }
    out.push_back(std::move(a));
  }
  std::sort(out.begin(), out.end(), [](const MetricAnomaly& a, const MetricAnomaly& b) {
    if (a.pod != b.pod) return a.pod < b.pod;
    return a.metric < b.metric;
  });
  return out;
}

std::map<ServiceId, double> service_anomaly_scores(const IncidentCase& incident) {
  std::map<ServiceId, double> out;
  for (const MetricAnomaly& a : metric_anomaly_scores(incident)) {
    ServiceId service = incident.service_of(a.pod);
    auto [it, inserted] = out.emplace(service, a.score);
    if (!inserted) it->second = std::max(it->second, a.score);
  }
  return out;
}

ResampledSeries resample_series(const MetricSeries& series, Micros origin_us,
                                Micros step_us) {
  ResampledSeries out;
  if (series.samples.empty() || step_us <= 0) return out;

  std::int64_t first = (series.samples.front().time_us - origin_us) / step_us;
  std::int64_t last = (series.samples.back().time_us - origin_us) / step_us;
  out.first_bucket = first;
  out.values.assign(static_cast<std::size_t>(last - first + 1), 0.0);

  std::vector<std::size_t> counts(out.values.size(), 0);
  for (const MetricSample& s : series.samples) {
    auto idx = static_cast<std::size_t>((s.time_us - origin_us) / step_us - first);
    out.values[idx] += s.value;
    ++counts[idx];
  }
  double fill = 0.0;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (counts[i] > 0) {
      out.values[i] /= static_cast<double>(counts[i]);
      fill = out.values[i];
    } else {
      out.values[i] = fill;
    }
  }
  return out;
}

std::optional<GrangerResult> granger_f_test(const std::vector<double>& x,
                                            const std::vector<double>& y, int lag) {
  if (lag < 1 || x.size() != y.size()) return std::nullopt;
  std::size_t n = y.size();
  auto l = static_cast<std::size_t>(lag);
  if (n < l + 1) return std::nullopt;
  std::size_t rows = n - l;
  auto df2_check = static_cast<std::int64_t>(rows) - (2 * lag + 1);
  if (df2_check < 1) return std::nullopt;

  Eigen::VectorXd target(rows);
  Eigen::MatrixXd restricted(rows, 1 + l);
  Eigen::MatrixXd unrestricted(rows, 1 + 2 * l);
  for (std::size_t t = 0; t < rows; ++t) {
    std::size_t i = t + l;
    target(static_cast<Eigen::Index>(t)) = y[i];
    restricted(t, 0) = 1.0;
    unrestricted(t, 0) = 1.0;
    for (std::size_t j = 1; j <= l; ++j) {
      restricted(t, j) = y[i - j];
      unrestricted(t, j) = y[i - j];
      unrestricted(t, l + j) = x[i - j];
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_r(restricted);
  if (qr_r.rank() < restricted.cols()) return std::nullopt;
  double rss_r = (target - restricted * qr_r.solve(target)).squaredNorm();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_u(unrestricted);
  if (qr_u.rank() < unrestricted.cols()) return std::nullopt;
  double rss_u = (target - unrestricted * qr_u.solve(target)).squaredNorm();

  double df2 = static_cast<double>(df2_check);
  if (rss_u < 1e-30) {
    // Perfect unrestricted fit. No improvement over an equally perfect
    // restricted fit is uninformative; otherwise maximal significance.
    if (rss_r - rss_u < 1e-30) return std::nullopt;
    return GrangerResult{kScoreCap, 0.0};
  }

  double f = ((rss_r - rss_u) / static_cast<double>(lag)) / (rss_u / df2);
  if (f < 0.0) f = 0.0;
  boost::math::fisher_f dist(static_cast<double>(lag), df2);
  double p = boost::math::cdf(boost::math::complement(dist, f));
  return GrangerResult{f, p};
}

CausalGraph granger_graph(const IncidentCase& incident, const MetricsConfig& config) {
  CausalGraph graph;

  std::vector<const MetricSeries*> series;
  for (const MetricSeries& m : incident.metrics)
    if (!m.samples.empty()) series.push_back(&m);
  std::sort(series.begin(), series.end(),
            [](const MetricSeries* a, const MetricSeries* b) {
              if (a->pod != b->pod) return a->pod < b->pod;
              return a->metric < b->metric;
            });

  std::set<ServiceId> node_set;
  for (const MetricSeries& m : incident.metrics) node_set.insert(incident.service_of(m.pod));
  graph.nodes.assign(node_set.begin(), node_set.end());
  if (series.empty()) return graph;

  Micros origin = std::numeric_limits<Micros>::max();
  for (const MetricSeries* m : series) origin = std::min(origin, m->samples.front().time_us);
  auto step_us = static_cast<Micros>(std::llround(config.resample_step_s * 1e6));
  if (step_us < 1) step_us = 1;

  std::vector<ResampledSeries> grids;
  std::vector<ServiceId> owners;
  grids.reserve(series.size());
  for (const MetricSeries* m : series) {
    grids.push_back(resample_series(*m, origin, step_us));
    owners.push_back(incident.service_of(m->pod));
  }

  std::size_t min_len = 2 * (static_cast<std::size_t>(config.lag) + 1) + 2;
  for (std::size_t i = 0; i < grids.size(); ++i) {
    for (std::size_t j = 0; j < grids.size(); ++j) {
      if (i == j || owners[i] == owners[j]) continue;
      ++graph.stats.pairs_considered;

      const ResampledSeries& a = grids[i];
      const ResampledSeries& b = grids[j];
      std::int64_t lo = std::max(a.first_bucket, b.first_bucket);
      std::int64_t hi = std::min(a.first_bucket + static_cast<std::int64_t>(a.values.size()),
                                 b.first_bucket + static_cast<std::int64_t>(b.values.size())) - 1;
      if (hi < lo || static_cast<std::size_t>(hi - lo + 1) < min_len) {
        ++graph.stats.skipped_short;
        continue;
      }
      auto len = static_cast<std::size_t>(hi - lo + 1);
      const double* xa = a.values.data() + (lo - a.first_bucket);
      const double* yb = b.values.data() + (lo - b.first_bucket);
      if (variance_of(xa, len) < kVarianceFloor || variance_of(yb, len) < kVarianceFloor) {
        ++graph.stats.skipped_degenerate;
        continue;
      }
      std::vector<double> x(xa, xa + len), y(yb, yb + len);
      auto result = granger_f_test(x, y, config.lag);
      if (!result) {
        ++graph.stats.skipped_degenerate;
        continue;
      }
      ++graph.stats.pairs_tested;
      if (result->p_value < config.alpha) ++graph.edges[{owners[i], owners[j]}];
    }
  }
  return graph;
}

std::vector<double> stationary_scores(
    std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges,
    const std::vector<double>& personalization, double damping) {
  if (n == 0) return {};

  std::vector<double> p(personalization);
  p.resize(n, 0.0);
  double psum = 0.0;
  for (double v : p) psum += v;
  if (psum <= 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(n));
  } else {
    for (double& v : p) v /= psum;
  }

  std::vector<double> out_weight(n, 0.0);
  for (const auto& [u, v, w] : edges) {
    (void)v;
    out_weight[u] += w;
  }

  std::vector<double> rank(p);
  std::vector<double> next(n, 0.0);
  for (int iter = 0; iter < 1000; ++iter) {
    double dangling = 0.0;
    for (std::size_t u = 0; u < n; ++u)
      if (out_weight[u] == 0.0) dangling += rank[u];
    for (std::size_t v = 0; v < n; ++v)
      next[v] = (1.0 - damping) * p[v] + damping * dangling * p[v];
    for (const auto& [u, v, w] : edges)
      next[v] += damping * rank[u] * w / out_weight[u];

    double l1 = 0.0;
    for (std::size_t v = 0; v < n; ++v) l1 += std::fabs(next[v] - rank[v]);
    rank.swap(next);
    if (l1 < 1e-9) break;
  }
  return rank;
}

Ranking graph_rank(const CausalGraph& graph, const std::map<ServiceId, double>& anomaly,
                   const MetricsConfig& config) {
  Ranking ranking;
  std::size_t n = graph.nodes.size();
  if (n == 0) return ranking;

  std::map<ServiceId, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[graph.nodes[i]] = i;

  std::vector<double> personalization(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = anomaly.find(graph.nodes[i]);
    if (it != anomaly.end() && it->second > 0.0) personalization[i] = it->second;
  }

  // The walk runs on the reversed graph: effects point back at their causes
  // so walk mass accumulates on upstream culprits.
  std::vector<std::tuple<std::size_t, std::size_t, double>> reversed;
  reversed.reserve(graph.edges.size());
  int total_links = 0;
  for (const auto& [pair, weight] : graph.edges) {
    reversed.emplace_back(index.at(pair.second), index.at(pair.first),
                          static_cast<double>(weight));
    total_links += weight;
  }

  std::vector<double> scores =
      stationary_scores(n, reversed, personalization, config.damping);

  bool no_edges = graph.edges.empty();
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream rationale;
    rationale.precision(6);
    auto it = anomaly.find(graph.nodes[i]);
    double a = it != anomaly.end() ? it->second : 0.0;
    if (no_edges) {
      rationale << "no significant causal links; ranked by anomaly score ("
                << "anomaly=" << a << ")";
    } else {
      rationale << "anomaly=" << a << "; " << to_string(config.mode)
                << " walk over " << n << " nodes, " << graph.edges.size()
                << " edges, " << total_links << " links";
    }
    ranking.entries.push_back({graph.nodes[i], scores[i], rationale.str()});
  }
  sort_ranking(ranking);

  std::vector<std::string> problems = ranking.violations();
  if (!problems.empty())
    throw DataError("metrics ranking violated its contract: " + problems.front());
  return ranking;
}

Ranking metrics_rank(const IncidentCase& incident, const MetricsConfig& config) {
  if (incident.metrics.empty()) return {};
  CausalGraph graph = granger_graph(incident, config);
  return graph_rank(graph, service_anomaly_scores(incident), config);
}

}  // namespace rca::metrics
