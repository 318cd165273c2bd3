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

#include "rca/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

#include <zlib.h>

#include "rca/chart.hpp"
#include "rca/errors.hpp"
#include "rca/ingest.hpp"
#include "rca/rng.hpp"

namespace rca::diag {

namespace {

bool pod_known(const IncidentCase& incident, const PodId& pod) {
  for (const MetricSeries& m : incident.metrics)
    if (m.pod == pod) return true;
  for (const LogEntry& l : incident.logs)
    if (l.pod == pod) return true;
  return false;
}

double nearest_rank_p95(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  auto rank = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(n)));
  if (rank < 1) rank = 1;
  return values[rank - 1];
}

ProfileAggregate aggregate_over(const IncidentCase& incident, std::string label,
                                const std::vector<PodId>& pods, int window_s) {
  ProfileAggregate profile;
  profile.label = std::move(label);
  profile.window_s = window_s;
  profile.anchor_us = incident.window.start_us;

  Micros window_us = static_cast<Micros>(window_s) * 1'000'000;
  Micros span = incident.window.end_us - incident.window.start_us;
  auto window_count = static_cast<std::size_t>((span + window_us - 1) / window_us);
  if (window_count == 0) window_count = 1;

  bool multi_pod = pods.size() > 1;
  for (const MetricSeries& series : incident.metrics) {
    if (std::find(pods.begin(), pods.end(), series.pod) == pods.end()) continue;
    std::string key =
        multi_pod ? series.metric + "@" + series.pod.name : series.metric;

    std::vector<std::vector<double>> buckets(window_count);
    for (const MetricSample& s : series.samples) {
      if (s.time_us < profile.anchor_us) continue;
      auto idx = static_cast<std::size_t>((s.time_us - profile.anchor_us) / window_us);
      if (idx >= window_count) continue;
      buckets[idx].push_back(s.value);
    }

    std::vector<ProfileRow> rows(window_count);
    for (std::size_t i = 0; i < window_count; ++i) {
      ProfileRow& row = rows[i];
      row.window_start_us = profile.anchor_us + static_cast<Micros>(i) * window_us;
      row.count = buckets[i].size();
      if (row.count == 0) continue;
      double sum = 0.0;
      double mx = buckets[i][0];
      for (double v : buckets[i]) {
        sum += v;
        mx = std::max(mx, v);
      }
      row.mean = sum / static_cast<double>(row.count);
      row.max = mx;
      row.p95 = nearest_rank_p95(buckets[i]);
    }
    profile.per_metric[key] = std::move(rows);
  }
  return profile;
}

}  // namespace

ProfileAggregate aggregate_profile(const IncidentCase& incident, const PodId& pod,
                                   int window_s) {
  if (!pod_known(incident, pod))
    throw DataError("pod '" + pod.name + "' appears nowhere in case '" +
                    incident.case_id + "'");
  return aggregate_over(incident, pod.name, {pod}, window_s);
}

ProfileAggregate aggregate_service_profile(const IncidentCase& incident,
                                           const ServiceId& service, int window_s) {
  return aggregate_over(incident, service.name, incident.pods_of(service), window_s);
}

std::string render_profile_table(const ProfileAggregate& profile) {
  std::ostringstream os;
  os << "performance profile for " << profile.label << " (" << profile.window_s
     << "s windows)\n";
  if (profile.per_metric.empty()) {
    os << "  no metric series\n";
    return os.str();
  }
  for (const auto& [metric, rows] : profile.per_metric) {
    os << "metric " << metric << "\n";
    os << "  window_start_us count mean max p95\n";
    for (const ProfileRow& row : rows) {
      os << "  " << row.window_start_us << " ";
      if (row.count == 0) {
        os << "0 no samples\n";
      } else {
        os << row.count << " " << ingest::format_double(row.mean) << " "
           << ingest::format_double(row.max) << " " << ingest::format_double(row.p95)
           << "\n";
      }
    }
  }
  return os.str();
}

std::optional<std::vector<std::uint8_t>> render_profile_chart(
    const ProfileAggregate& profile) {
  std::vector<std::pair<std::string, const std::vector<ProfileRow>*>> panels;
  for (const auto& [metric, rows] : profile.per_metric) {
    bool has_data = std::any_of(rows.begin(), rows.end(),
                                [](const ProfileRow& r) { return r.count > 0; });
    if (has_data) panels.emplace_back(metric, &rows);
  }
  if (panels.empty()) return std::nullopt;

  constexpr int kPanelW = 900;
  constexpr int kPanelH = 300;
  constexpr int kLeft = 70, kRight = 12, kTop = 22, kBottom = 18;
  const chart::Color kBg{255, 255, 255};
  const chart::Color kAxis{70, 70, 70};
  const chart::Color kText{40, 40, 40};
  const chart::Color kMean{31, 119, 180};
  const chart::Color kMax{214, 39, 40};
  const chart::Color kP95{255, 127, 14};

  chart::Canvas canvas(kPanelW, kPanelH * static_cast<int>(panels.size()), kBg);

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& [metric, rows_ptr] = panels[p];
    const std::vector<ProfileRow>& rows = *rows_ptr;
    int top = static_cast<int>(p) * kPanelH;
    int plot_x0 = kLeft, plot_x1 = kPanelW - kRight;
    int plot_y0 = top + kTop, plot_y1 = top + kPanelH - kBottom;

    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const ProfileRow& r : rows) {
      if (r.count == 0) continue;
      for (double v : {r.mean, r.max, r.p95}) {
        if (first) {
          lo = hi = v;
          first = false;
        } else {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
    if (hi - lo < 1e-12) {
      lo -= 1.0;
      hi += 1.0;
    } else {
      double pad = 0.05 * (hi - lo);
      lo -= pad;
      hi += pad;
    }

    canvas.rect(plot_x0, plot_y0, plot_x1, plot_y1, kAxis);
    canvas.text(6, top + 6, metric, kText);
    canvas.text(plot_x1 - 3 * 6 * 6, top + 6, "mean", kMean);
    canvas.text(plot_x1 - 2 * 6 * 6 + 12, top + 6, "max", kMax);
    canvas.text(plot_x1 - 6 * 6 + 6, top + 6, "p95", kP95);
    canvas.text(6, plot_y0 - 3, ingest::format_double(hi), kText);
    canvas.text(6, plot_y1 - 4, ingest::format_double(lo), kText);

    auto x_of = [&](std::size_t i) {
      double t = rows.size() == 1
                     ? 0.5
                     : static_cast<double>(i) / static_cast<double>(rows.size() - 1);
      return plot_x0 + static_cast<int>(std::lround(
                           t * static_cast<double>(plot_x1 - plot_x0)));
    };
    auto y_of = [&](double v) {
      double t = (v - lo) / (hi - lo);
      return plot_y1 - static_cast<int>(std::lround(
                           t * static_cast<double>(plot_y1 - plot_y0)));
    };

    struct Line {
      double ProfileRow::* field;
      chart::Color color;
    };
    const Line lines[] = {{&ProfileRow::mean, kMean},
                          {&ProfileRow::max, kMax},
                          {&ProfileRow::p95, kP95}};
    for (const Line& line : lines) {
      bool have_prev = false;
      int px = 0, py = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].count == 0) {
          have_prev = false;  // empty window breaks the polyline
          continue;
        }
        int x = x_of(i), y = y_of(rows[i].*(line.field));
        if (have_prev) canvas.line(px, py, x, y, line.color);
        canvas.set(x, y, line.color);
        px = x;
        py = y;
        have_prev = true;
      }
    }
  }
  return chart::encode_png(canvas);
}

DependencySubgraph extract_subgraph(const IncidentCase& incident,
                                    const ServiceId& service) {
  DependencySubgraph graph;
  graph.center = service;

  for (const Trace& trace : group_spans_into_traces(incident.spans)) {
    std::map<std::string, const Span*> by_id;
    for (const Span& s : trace.spans) by_id[s.span_id] = &s;
    for (const Span& s : trace.spans) {
      if (!s.parent_span_id) continue;
      auto it = by_id.find(*s.parent_span_id);
      if (it == by_id.end()) continue;
      const Span& parent = *it->second;
      if (parent.service == s.service) continue;
      if (s.service == service) ++graph.callers[parent.service];
      if (parent.service == service) ++graph.callees[s.service];
    }
  }
  return graph;
}

std::string render_subgraph_text(const DependencySubgraph& graph) {
  std::ostringstream os;
  os << "dependency subgraph for " << graph.center.name << "\n";
  os << "  callers:";
  if (graph.callers.empty()) {
    os << " (none)";
  } else {
    bool first = true;
    for (const auto& [svc, count] : graph.callers) {
      os << (first ? " " : ", ") << svc.name << " (x" << count << ")";
      first = false;
    }
  }
  os << "\n  callees:";
  if (graph.callees.empty()) {
    os << " (none)";
  } else {
    bool first = true;
    for (const auto& [svc, count] : graph.callees) {
      os << (first ? " " : ", ") << svc.name << " (x" << count << ")";
      first = false;
    }
  }
  os << "\n";
  return os.str();
}

namespace {

bool contains_ci(const std::string& haystack, const std::string& lowered_needle) {
  if (lowered_needle.size() > haystack.size()) return false;
  auto it = std::search(haystack.begin(), haystack.end(), lowered_needle.begin(),
                        lowered_needle.end(), [](char a, char b) {
                          return std::tolower(static_cast<unsigned char>(a)) == b;
                        });
  return it != haystack.end();
}

bool is_error_like(const LogEntry& entry) {
  if (entry.severity == Severity::kError || entry.severity == Severity::kFatal)
    return true;
  static const std::string kPatterns[] = {"exception", "traceback", "panic", "fatal"};
  for (const std::string& p : kPatterns)
    if (contains_ci(entry.message, p)) return true;
  return false;
}

// Leading ISO-8601 or epoch timestamps (with up to two framing punctuation
// characters) are stripped before dedup so retried lines that differ only
// by time collapse.
const std::regex& iso_prefix() {
  static const std::regex re(
      R"(^[^A-Za-z0-9]{0,2}\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}:\d{2}([.,]\d{1,9})?(Z|[+-]\d{2}:?\d{2})?[^A-Za-z0-9]{0,2}\s*)",
      std::regex::optimize);
  return re;
}

const std::regex& epoch_prefix() {
  static const std::regex re(R"(^[^A-Za-z0-9]{0,2}\d{10,16}(\.\d{1,9})?[^A-Za-z0-9]{0,2}\s*)",
                             std::regex::optimize);
  return re;
}

std::string strip_timestamp_prefixes(const std::string& message) {
  std::string text = message;
  for (int i = 0; i < 3; ++i) {
    std::smatch m;
    if (std::regex_search(text, m, iso_prefix()) && m.position(0) == 0 &&
        m.length(0) > 0) {
      text.erase(0, static_cast<std::size_t>(m.length(0)));
      continue;
    }
    if (std::regex_search(text, m, epoch_prefix()) && m.position(0) == 0 &&
        m.length(0) > 0) {
      text.erase(0, static_cast<std::size_t>(m.length(0)));
      continue;
    }
    break;
  }
  return text;
}

}  // namespace

RefinedLogCorpus abstract_logs(const std::vector<LogEntry>& source, int cap,
                               std::uint64_t seed) {
  RefinedLogCorpus corpus;
  corpus.stats.total_in = source.size();
  if (source.empty()) {
    corpus.empty_marker = true;
    return corpus;
  }
  if (cap < 1) cap = 1;
  auto capacity = static_cast<std::size_t>(cap);

  struct Indexed {
    const LogEntry* entry;
    std::size_t original;
  };
  std::vector<Indexed> ordered;
  ordered.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) ordered.push_back({&source[i], i});
  std::sort(ordered.begin(), ordered.end(), [](const Indexed& a, const Indexed& b) {
    if (a.entry->time_us != b.entry->time_us) return a.entry->time_us < b.entry->time_us;
    return a.original < b.original;
  });

  std::vector<Indexed> errors;
  std::vector<Indexed> others;
  for (const Indexed& item : ordered) {
    if (is_error_like(*item.entry)) errors.push_back(item);
    else others.push_back(item);
  }
  corpus.stats.matched = errors.size();

  std::set<std::string> seen;
  std::vector<Indexed> kept;
  for (const Indexed& item : errors) {
    if (seen.insert(strip_timestamp_prefixes(item.entry->message)).second)
      kept.push_back(item);
  }
  corpus.stats.after_dedup = kept.size();

  if (kept.size() > capacity) {
    // Seeded partial Fisher-Yates keeps the selection stable per seed.
    Rng rng(seed);
    std::vector<std::size_t> pick(kept.size());
    for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
    for (std::size_t i = 0; i < capacity; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(pick.size() - i));
      std::swap(pick[i], pick[j]);
    }
    pick.resize(capacity);
    std::sort(pick.begin(), pick.end());
    std::vector<Indexed> sampled;
    sampled.reserve(capacity);
    for (std::size_t idx : pick) sampled.push_back(kept[idx]);
    kept = std::move(sampled);
    corpus.stats.sampled = true;
  } else if (kept.size() < capacity && !others.empty()) {
    std::size_t room = capacity - kept.size();
    std::size_t take = std::min(room, others.size());
    // Most recent non-error lines fill the remaining room.
    kept.insert(kept.end(), others.end() - static_cast<std::ptrdiff_t>(take),
                others.end());
    corpus.stats.backfilled = take;
    std::sort(kept.begin(), kept.end(), [](const Indexed& a, const Indexed& b) {
      if (a.entry->time_us != b.entry->time_us)
        return a.entry->time_us < b.entry->time_us;
      return a.original < b.original;
    });
  }

  corpus.entries.reserve(kept.size());
  for (const Indexed& item : kept) corpus.entries.push_back(*item.entry);
  return corpus;
}

RefinedLogCorpus abstract_logs(const IncidentCase& incident, const PodId& pod, int cap,
                               std::uint64_t seed) {
  std::vector<LogEntry> source;
  for (const LogEntry& entry : incident.logs)
    if (entry.pod == pod) source.push_back(entry);
  return abstract_logs(source, cap, seed);
}

std::string render_logs_text(const RefinedLogCorpus& corpus) {
  if (corpus.empty_marker) return std::string(kEmptyLogMarker) + "\n";
  std::ostringstream os;
  for (const LogEntry& entry : corpus.entries) {
    os << entry.time_us << " [" << to_string(entry.severity) << "] " << entry.message
       << "\n";
  }
  return os.str();
}

std::size_t estimate_tokens(const std::string& text) {
  return (text.size() + 3) / 4;
}

namespace {

std::string compose_text(const DiagnosticBundle& bundle) {
  std::ostringstream os;
  os << "== dependency subgraph ==\n" << render_subgraph_text(bundle.subgraph);
  os << "== performance profile ==\n" << render_profile_table(bundle.profile);
  os << "== refined logs (" << bundle.logs.entries.size() << " of "
     << bundle.logs.stats.total_in << " lines";
  if (bundle.logs.stats.sampled) os << ", sampled";
  if (bundle.logs.stats.backfilled > 0)
    os << ", " << bundle.logs.stats.backfilled << " backfilled";
  os << ") ==\n"
     << render_logs_text(bundle.logs);
  return os.str();
}

DiagnosticBundle assemble(const IncidentCase& incident, const ServiceId& service,
                          std::string profile_label, const std::vector<PodId>& pods,
                          const DiagConfig& config) {
  DiagnosticBundle bundle;
  bundle.service = service;
  bundle.pods = pods;
  bundle.profile = aggregate_over(incident, std::move(profile_label), pods,
                                  config.window_s);
  bundle.chart_png = render_profile_chart(bundle.profile);
  bundle.subgraph = extract_subgraph(incident, service);

  std::vector<LogEntry> source;
  for (const LogEntry& entry : incident.logs)
    if (std::find(pods.begin(), pods.end(), entry.pod) != pods.end())
      source.push_back(entry);
  bundle.logs = abstract_logs(source, config.log_cap, config.seed);

  // Budget enforcement drops the oldest log lines first, then the oldest
  // profile rows; the subgraph always survives.
  bundle.text = compose_text(bundle);
  auto budget = static_cast<std::size_t>(config.token_budget);
  while (estimate_tokens(bundle.text) > budget && !bundle.logs.entries.empty()) {
    bundle.logs.entries.erase(bundle.logs.entries.begin());
    ++bundle.stats.dropped_log_entries;
    bundle.text = compose_text(bundle);
  }
  while (estimate_tokens(bundle.text) > budget) {
    std::vector<ProfileRow>* victim_rows = nullptr;
    Micros oldest = 0;
    for (auto& [metric, rows] : bundle.profile.per_metric) {
      if (rows.empty()) continue;
      if (!victim_rows || rows.front().window_start_us < oldest) {
        victim_rows = &rows;
        oldest = rows.front().window_start_us;
      }
    }
    if (!victim_rows) break;
    victim_rows->erase(victim_rows->begin());
    ++bundle.stats.dropped_profile_rows;
    bundle.text = compose_text(bundle);
  }
  bundle.stats.estimated_tokens = estimate_tokens(bundle.text);
  return bundle;
}

}  // namespace

DiagnosticBundle build_bundle(const IncidentCase& incident, const PodId& pod,
                              const DiagConfig& config) {
  if (!pod_known(incident, pod))
    throw DataError("pod '" + pod.name + "' appears nowhere in case '" +
                    incident.case_id + "'");
  return assemble(incident, incident.service_of(pod), pod.name, {pod}, config);
}

DiagnosticBundle build_service_bundle(const IncidentCase& incident,
                                      const ServiceId& service,
                                      const DiagConfig& config) {
  std::vector<ServiceId> known = incident.services();
  if (!std::binary_search(known.begin(), known.end(), service))
    throw DataError("service '" + service.name + "' appears nowhere in case '" +
                    incident.case_id + "'");
  return assemble(incident, service, service.name, incident.pods_of(service), config);
}

nlohmann::json bundle_to_json(const DiagnosticBundle& bundle) {
  nlohmann::json profile = nlohmann::json::object();
  for (const auto& [metric, rows] : bundle.profile.per_metric) {
    nlohmann::json list = nlohmann::json::array();
    for (const ProfileRow& row : rows) {
      nlohmann::json r{{"window_start_us", row.window_start_us}, {"count", row.count}};
      if (row.count > 0) {
        r["mean"] = row.mean;
        r["max"] = row.max;
        r["p95"] = row.p95;
      } else {
        r["mean"] = nullptr;
        r["max"] = nullptr;
        r["p95"] = nullptr;
      }
      list.push_back(std::move(r));
    }
    profile[metric] = std::move(list);
  }

  nlohmann::json callers = nlohmann::json::object();
  for (const auto& [svc, count] : bundle.subgraph.callers) callers[svc.name] = count;
  nlohmann::json callees = nlohmann::json::object();
  for (const auto& [svc, count] : bundle.subgraph.callees) callees[svc.name] = count;

  nlohmann::json log_entries = nlohmann::json::array();
  for (const LogEntry& entry : bundle.logs.entries) {
    log_entries.push_back({{"time", entry.time_us},
                           {"pod", entry.pod.name},
                           {"severity", to_string(entry.severity)},
                           {"message", entry.message}});
  }

  nlohmann::json pods = nlohmann::json::array();
  for (const PodId& pod : bundle.pods) pods.push_back(pod.name);

  nlohmann::json chart_desc;
  if (bundle.chart_png) {
    chart_desc = {{"bytes", bundle.chart_png->size()},
                  {"crc32", ::crc32(0L, bundle.chart_png->data(),
                                    static_cast<uInt>(bundle.chart_png->size()))}};
  } else {
    chart_desc = nullptr;
  }

  return nlohmann::json{
      {"service", bundle.service.name},
      {"pods", std::move(pods)},
      {"window_s", bundle.profile.window_s},
      {"profile", std::move(profile)},
      {"chart_png", std::move(chart_desc)},
      {"subgraph", {{"callers", std::move(callers)}, {"callees", std::move(callees)}}},
      {"logs",
       {{"entries", std::move(log_entries)},
        {"stats",
         {{"total_in", bundle.logs.stats.total_in},
          {"matched", bundle.logs.stats.matched},
          {"after_dedup", bundle.logs.stats.after_dedup},
          {"backfilled", bundle.logs.stats.backfilled},
          {"sampled", bundle.logs.stats.sampled}}},
        {"empty", bundle.logs.empty_marker}}},
      {"stats",
       {{"estimated_tokens", bundle.stats.estimated_tokens},
        {"dropped_log_entries", bundle.stats.dropped_log_entries},
        {"dropped_profile_rows", bundle.stats.dropped_profile_rows}}},
      {"text_chars", bundle.text.size()}};
}

}  // namespace rca::diag
