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

#include "rca/fixtures.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

#include "rca/errors.hpp"
#include "rca/rng.hpp"

namespace rca::fixtures {

namespace {

// 2026-01-01T00:00:00Z. Fixed so identical seeds give identical bytes.
constexpr Micros kEpochUs = 1'767'225'600'000'000;
constexpr Micros kSecond = 1'000'000;

}  // namespace

std::size_t Topology::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < services.size(); ++i)
    if (services[i].name == name) return i;
  throw UsageError("unknown service '" + name + "' in topology");
}

Topology Topology::default_topology() {
  Topology t;
  t.services = {
      {"frontend", {"GET /", "GET /cart"}, 25.0, 2, {}},
      {"catalog", {"lookup"}, 45.0, 2, {}},
      {"checkout", {"place_order"}, 60.0, 1, {}},
      {"recommend", {"suggest"}, 35.0, 1, {}},
      {"adservice", {"serve_ads"}, 20.0, 1, {}},
      {"payment", {"charge"}, 50.0, 1, {}},
      {"currency", {"convert"}, 15.0, 1, {}},
      {"email", {"send"}, 30.0, 1, {}},
  };
  auto idx = [&](const char* name) { return t.index_of(name); };
  t.services[idx("frontend")].edges = {{idx("catalog"), 0.9},
                                       {idx("checkout"), 0.5},
                                       {idx("recommend"), 0.6},
                                       {idx("adservice"), 0.4}};
  t.services[idx("checkout")].edges = {{idx("payment"), 1.0},
                                       {idx("currency"), 1.0},
                                       {idx("email"), 0.7}};
  t.services[idx("recommend")].edges = {{idx("catalog"), 0.8}};
  return t;
}

std::string pick_target(FaultType fault, std::uint64_t seed, const Topology& topology) {
  // Eligible targets are services somebody calls.
  std::set<std::size_t> called;
  for (const ServiceSpec& svc : topology.services)
    for (const CallEdge& edge : svc.edges) called.insert(edge.callee);
  std::vector<std::string> eligible;
  for (std::size_t i = 0; i < topology.services.size(); ++i)
    if (called.count(i)) eligible.push_back(topology.services[i].name);
  if (eligible.empty()) throw UsageError("topology has no callable services");
  std::sort(eligible.begin(), eligible.end());
  std::size_t offset =
      (seed + static_cast<std::uint64_t>(fault) * 7919) % eligible.size();
  return eligible[offset];
}

namespace {

struct MetricShape {
  const char* name;
  double base;
  double noise;
};

constexpr MetricShape kMetricShapes[] = {
    {"cpu", 30.0, 2.0},
    {"memory", 55.0, 1.0},
    {"disk_io", 8.0, 1.5},
};

double exponential(Rng& rng, double rate) {
  // uniform01 never returns 1.0, so the log argument stays positive.
  return -std::log(1.0 - rng.uniform01()) / rate;
}

std::string base36_suffix(Rng& rng) {
  static const char* kDigits = "0123456789abcdefghijklmnopqrstuvwxyz";
  std::string s;
  for (int i = 0; i < 5; ++i) s += kDigits[rng.below(36)];
  return s;
}

struct TraceBuilder {
  const Topology& topology;
  FaultType fault;
  std::size_t target_idx;
  Micros onset_us;
  Rng& rng;
  std::vector<Span>* out;
  int next_span = 0;

  Micros fault_inflation_us(Micros start_us) {
    if (start_us < onset_us) return 0;
    double u = rng.uniform01();
    switch (fault) {
      case FaultType::kDelay:
        return llround(300000.0 * (1.15 + 0.15 * u));
      case FaultType::kCpu:
        return llround(120000.0 * (0.8 + 0.4 * u));
      case FaultType::kDisk:
        return llround(90000.0 * (0.8 + 0.4 * u));
      case FaultType::kMem:
        return llround(60000.0 * (0.8 + 0.4 * u));
      case FaultType::kLoss:
        return u < 0.35 ? llround(400000.0 * (0.8 + 0.4 * rng.uniform01())) : 0;
      case FaultType::kSocket:
        return u < 0.5 ? llround(250000.0 * (0.8 + 0.4 * rng.uniform01())) : 0;
    }
    return 0;
  }

  Micros emit(std::size_t service_idx, const std::optional<std::string>& parent_id,
              const std::string& trace_id, Micros start_us) {
    const ServiceSpec& svc = topology.services[service_idx];
    std::string span_id = "s" + std::to_string(next_span++);

    Micros own_us = llround(svc.own_work_ms * 1000.0 * (0.85 + 0.3 * rng.uniform01()));
    if (service_idx == target_idx) own_us += fault_inflation_us(start_us);

    // Children run sequentially inside the parent's interval; the parent's
    // duration therefore inherits every child delay.
    Micros cursor = start_us + llround(static_cast<double>(own_us) * 0.2);
    Micros child_total = 0;
    for (const CallEdge& edge : svc.edges) {
      if (rng.uniform01() >= edge.probability) continue;
      Micros gap = 1000 + llround(2000.0 * rng.uniform01());
      Micros child_duration = emit(edge.callee, span_id, trace_id, cursor);
      child_total += child_duration + gap;
      cursor += child_duration + gap;
    }

    Micros duration = own_us + child_total;
    const std::string& op =
        svc.operations[svc.operations.size() > 1 ? rng.below(svc.operations.size()) : 0];
    out->push_back(Span{trace_id, span_id, parent_id, ServiceId{svc.name}, op,
                        start_us, duration});
    return duration;
  }
};

}  // namespace

IncidentCase generate_case(FaultType fault, const std::string& target_service,
                           std::uint64_t seed, const GenOptions& options) {
  const Topology& topology = options.topology;
  std::size_t target_idx = topology.index_of(target_service);
  if (target_idx == 0)
    throw UsageError("fault target must not be the entry-point service");
  if (options.baseline_s <= 0 || options.incident_s <= 0 || options.trace_rate_hz <= 0)
    throw UsageError("fixture durations and trace rate must be positive");

  // Independent streams per stage so a change in one stage cannot shift the
  // draws of another.
  Rng master(seed);
  Rng pods_rng(master.next_u64());
  Rng metrics_rng(master.next_u64());
  Rng logs_rng(master.next_u64());
  Rng traces_rng(master.next_u64());

  const Micros t0 = kEpochUs;
  const Micros onset = t0 + llround(options.baseline_s * 1e6);
  const Micros end = onset + llround(options.incident_s * 1e6);
  const int total_s = static_cast<int>((end - t0) / kSecond);
  const int onset_s = static_cast<int>((onset - t0) / kSecond);

  IncidentCase incident;
  {
    std::string fault_name = to_string(fault);
    std::transform(fault_name.begin(), fault_name.end(), fault_name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    incident.case_id =
        "case-" + fault_name + "-" + target_service + "-s" + std::to_string(seed);
  }
  incident.window = TimeWindow{onset, end};
  incident.ground_truth = GroundTruth{ServiceId{target_service}, fault};

  std::vector<std::vector<PodId>> pods(topology.services.size());
  for (std::size_t i = 0; i < topology.services.size(); ++i)
    for (int p = 0; p < topology.services[i].pods; ++p)
      pods[i].push_back(PodId{topology.services[i].name + "-" + base36_suffix(pods_rng)});

  std::set<std::size_t> callers_of_target;
  for (std::size_t i = 0; i < topology.services.size(); ++i)
    for (const CallEdge& edge : topology.services[i].edges)
      if (edge.callee == target_idx) callers_of_target.insert(i);

  // Shared per-second fault signal; callers see it attenuated and two
  // seconds late, which is what the causal ranker keys on. The per-second
  // jitter is the part of the signal that is predictable across services
  // but not from a series' own history.
  std::vector<double> fault_signal(total_s, 0.0);
  double echo = 0.0;
  const char* fault_metric = nullptr;
  switch (fault) {
    case FaultType::kCpu: echo = 0.35; fault_metric = "cpu"; break;
    case FaultType::kDisk: echo = 0.35; fault_metric = "disk_io"; break;
    case FaultType::kMem: echo = 0.3; fault_metric = "memory"; break;
    default: break;
  }
  if (fault_metric) {
    for (int i = onset_s; i < total_s; ++i) {
      double jitter = 2.0 * metrics_rng.uniform01();
      switch (fault) {
        case FaultType::kCpu: fault_signal[i] = 45.0 + jitter; break;
        case FaultType::kDisk: fault_signal[i] = 25.0 + jitter; break;
        case FaultType::kMem:
          fault_signal[i] = 1.2 * (i - onset_s + 1) + 1.5 * jitter;
          break;
        default: break;
      }
    }
  }

  for (std::size_t si = 0; si < topology.services.size(); ++si) {
    for (const PodId& pod : pods[si]) {
      for (const MetricShape& shape : kMetricShapes) {
        MetricSeries series;
        series.pod = pod;
        series.metric = shape.name;
        double value = shape.base;
        for (int i = 0; i < total_s; ++i) {
          value = shape.base + 0.8 * (value - shape.base) + shape.noise * metrics_rng.normal();
          double v = value;
          if (fault_metric && series.metric == fault_metric) {
            if (si == target_idx) v += fault_signal[i];
            else if (callers_of_target.count(si) && i >= 2) v += echo * fault_signal[i - 2];
          }
          series.samples.push_back({t0 + static_cast<Micros>(i) * kSecond,
                                    std::max(0.0, v)});
        }
        incident.metrics.push_back(std::move(series));
      }
    }
  }

  // Routine log chatter for every pod, plus a fault-specific burst on the
  // target's pods after onset.
  for (std::size_t si = 0; si < topology.services.size(); ++si) {
    for (const PodId& pod : pods[si]) {
      double t = static_cast<double>(t0);
      int line = 0;
      while (true) {
        t += exponential(logs_rng, 0.2) * 1e6;
        if (t >= static_cast<double>(end)) break;
        LogEntry entry;
        entry.time_us = static_cast<Micros>(t);
        entry.pod = pod;
        if (logs_rng.uniform01() < 0.1) {
          entry.severity = Severity::kWarn;
          entry.message = "upstream latency elevated: " +
                          std::to_string(40 + logs_rng.below(200)) + " ms";
        } else {
          entry.severity = Severity::kInfo;
          switch (line % 3) {
            case 0:
              entry.message = "request completed in " +
                              std::to_string(5 + logs_rng.below(120)) + " ms";
              break;
            case 1: entry.message = "health check ok"; break;
            default:
              entry.message = "cache refresh finished in " +
                              std::to_string(3 + logs_rng.below(40)) + " ms";
          }
        }
        ++line;
        incident.logs.push_back(std::move(entry));
      }

      if (si != target_idx) continue;
      std::vector<std::string> burst;
      switch (fault) {
        case FaultType::kLoss:
          burst = {"connection reset by peer on upstream call",
                   "request dropped after %d retries: suspected packet loss",
                   "upstream unreachable: i/o timeout"};
          break;
        case FaultType::kSocket:
          burst = {"socket timeout after 5000 ms connecting to peer",
                   "failed to bind socket: address already in use",
                   "accept failed: too many open files"};
          break;
        case FaultType::kMem:
          burst = {"memory usage at %d%% of limit"};
          break;
        case FaultType::kDisk:
          burst = {"disk iowait climbing: %d ms per request"};
          break;
        default:
          break;
      }
      if (burst.empty()) continue;
      bool error_burst = fault == FaultType::kLoss || fault == FaultType::kSocket;
      double rate = error_burst ? 1.5 : 0.5;
      double bt = static_cast<double>(onset);
      int bi = 0;
      while (true) {
        bt += exponential(logs_rng, rate) * 1e6;
        if (bt >= static_cast<double>(end)) break;
        LogEntry entry;
        entry.time_us = static_cast<Micros>(bt);
        entry.pod = pod;
        entry.severity = error_burst ? Severity::kError : Severity::kWarn;
        std::string text = burst[bi % burst.size()];
        auto pos = text.find("%d");
        if (pos != std::string::npos) {
          int number = error_burst ? 1 + static_cast<int>(logs_rng.below(5))
                                   : 60 + static_cast<int>(logs_rng.below(35));
          text = text.substr(0, pos) + std::to_string(number) + text.substr(pos + 2);
        }
        entry.message = std::move(text);
        ++bi;
        incident.logs.push_back(std::move(entry));
      }
    }
  }
  std::stable_sort(incident.logs.begin(), incident.logs.end(),
                   [](const LogEntry& a, const LogEntry& b) { return a.time_us < b.time_us; });

  TraceBuilder builder{topology, fault, target_idx, onset, traces_rng,
                       &incident.spans};
  double arrival = static_cast<double>(t0);
  int trace_no = 0;
  while (true) {
    arrival += exponential(traces_rng, options.trace_rate_hz) * 1e6;
    if (arrival >= static_cast<double>(end)) break;
    char trace_id[16];
    std::snprintf(trace_id, sizeof(trace_id), "t%04d", trace_no++);
    builder.next_span = 0;
    builder.emit(0, std::nullopt, trace_id, static_cast<Micros>(arrival));
  }

  return incident;
}

}  // namespace rca::fixtures
