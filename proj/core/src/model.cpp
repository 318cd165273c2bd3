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

#include "rca/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "rca/errors.hpp"

namespace rca {

namespace {

std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::string to_string(Severity s) {
  switch (s) {
    case Severity::kDebug: return "DEBUG";
    case Severity::kInfo: return "INFO";
    case Severity::kWarn: return "WARN";
    case Severity::kError: return "ERROR";
    case Severity::kFatal: return "FATAL";
    case Severity::kUnknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

Severity parse_severity(const std::string& text) {
  std::string t = to_lower(text);
  if (t == "debug" || t == "trace") return Severity::kDebug;
  if (t == "info") return Severity::kInfo;
  if (t == "warn" || t == "warning") return Severity::kWarn;
  if (t == "error" || t == "err") return Severity::kError;
  if (t == "fatal" || t == "critical") return Severity::kFatal;
  return Severity::kUnknown;
}

std::string to_string(FaultType f) {
  switch (f) {
    case FaultType::kCpu: return "CPU";
    case FaultType::kDelay: return "DELAY";
    case FaultType::kDisk: return "DISK";
    case FaultType::kLoss: return "LOSS";
    case FaultType::kMem: return "MEM";
    case FaultType::kSocket: return "SOCKET";
  }
  return "CPU";
}

std::optional<FaultType> parse_fault_type(const std::string& text) {
  std::string t = to_lower(text);
  if (t == "cpu") return FaultType::kCpu;
  if (t == "delay") return FaultType::kDelay;
  if (t == "disk") return FaultType::kDisk;
  if (t == "loss") return FaultType::kLoss;
  if (t == "mem") return FaultType::kMem;
  if (t == "socket") return FaultType::kSocket;
  return std::nullopt;
}

std::vector<FaultType> all_fault_types() {
  return {FaultType::kCpu,  FaultType::kDelay, FaultType::kDisk,
          FaultType::kLoss, FaultType::kMem,   FaultType::kSocket};
}

const char* NameNormalizer::default_pattern() {
  // Matches, in order: statefulset ordinals ("-0"), replica-set hashes
  // ("-6f4f7d5b6b"), and short alphanumeric pod suffixes ("-x2v9k").
  return "-(\\d+|[0-9a-f]{6,10}|[0-9a-z]{4,5})$";
}

NameNormalizer::NameNormalizer() : NameNormalizer(default_pattern()) {}

NameNormalizer::NameNormalizer(std::string suffix_pattern)
    : pattern_(std::move(suffix_pattern)) {
  try {
    regex_ = std::regex(pattern_, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw UsageError("invalid pod suffix pattern '" + pattern_ + "': " + e.what());
  }
}

ServiceId NameNormalizer::service_of(const PodId& pod) const {
  std::string name = to_lower(pod.name);
  // Generated segments stack (deployment hash + replica suffix), so strip
  // until the pattern stops matching. Never strip down to an empty name.
  for (int i = 0; i < 8; ++i) {
    std::smatch m;
    if (!std::regex_search(name, m, regex_)) break;
    if (m.position(0) == 0) break;
    name.erase(static_cast<std::size_t>(m.position(0)));
  }
  return ServiceId{name};
}

std::vector<ServiceId> IncidentCase::services() const {
  std::set<ServiceId> out;
  for (const Span& s : spans) out.insert(s.service);
  for (const MetricSeries& m : metrics) out.insert(service_of(m.pod));
  for (const LogEntry& l : logs) out.insert(service_of(l.pod));
  return {out.begin(), out.end()};
}

std::vector<PodId> IncidentCase::pods_of(const ServiceId& service) const {
  std::set<PodId> out;
  for (const MetricSeries& m : metrics)
    if (service_of(m.pod) == service) out.insert(m.pod);
  for (const LogEntry& l : logs)
    if (service_of(l.pod) == service) out.insert(l.pod);
  return {out.begin(), out.end()};
}

const Span* Trace::root() const {
  if (spans.empty()) return nullptr;
  for (const Span& s : spans)
    if (!s.parent_span_id.has_value()) return &s;
  return &spans.front();
}

std::vector<Trace> group_spans_into_traces(const std::vector<Span>& spans) {
  std::map<std::string, std::vector<Span>> by_trace;
  for (const Span& s : spans) by_trace[s.trace_id].push_back(s);

  std::vector<std::string> duplicate_ids;
  std::vector<Trace> traces;
  traces.reserve(by_trace.size());
  for (auto& [trace_id, members] : by_trace) {
    std::set<std::string> ids;
    for (const Span& s : members) {
      if (!ids.insert(s.span_id).second)
        duplicate_ids.push_back(trace_id + "/" + s.span_id);
    }
    Trace t;
    t.trace_id = trace_id;
    t.spans = std::move(members);
    std::sort(t.spans.begin(), t.spans.end(), [](const Span& a, const Span& b) {
      if (a.start_us != b.start_us) return a.start_us < b.start_us;
      return a.span_id < b.span_id;
    });
    for (const Span& s : t.spans) {
      if (s.parent_span_id && !ids.count(*s.parent_span_id))
        t.dangling.push_back(s.span_id);
    }
    traces.push_back(std::move(t));
  }

  if (!duplicate_ids.empty()) {
    std::sort(duplicate_ids.begin(), duplicate_ids.end());
    std::string msg = "duplicate span ids within a trace:";
    for (const std::string& id : duplicate_ids) msg += " " + id;
    throw DataError(msg);
  }
  return traces;
}

std::optional<std::size_t> Ranking::position_of(const ServiceId& candidate) const {
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].candidate == candidate) return i;
  return std::nullopt;
}

std::vector<std::string> Ranking::violations() const {
  std::vector<std::string> out;
  std::set<ServiceId> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    if (e.candidate.name.empty())
      out.push_back("entry " + std::to_string(i) + ": empty candidate name");
    if (!seen.insert(e.candidate).second)
      out.push_back("duplicate candidate '" + e.candidate.name + "'");
    if (!std::isfinite(e.score) || e.score < 0.0 || e.score > 1.0)
      out.push_back("entry " + std::to_string(i) + " ('" + e.candidate.name +
                    "'): score " + std::to_string(e.score) + " outside [0, 1]");
    if (i > 0 && entries[i - 1].score < e.score)
      out.push_back("scores increase between positions " + std::to_string(i - 1) +
                    " and " + std::to_string(i));
  }
  return out;
}

void sort_ranking(Ranking& ranking) {
  std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                   [](const Ranking::Entry& a, const Ranking::Entry& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.candidate.name < b.candidate.name;
                   });
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const Violation& v : violations) os << v.location << ": " << v.message << "\n";
  return os.str();
}

ValidationReport validate_case(const IncidentCase& incident) {
  ValidationReport report;
  auto add = [&](std::string location, std::string message) {
    report.violations.push_back({std::move(location), std::move(message)});
  };

  if (incident.case_id.empty() || is_blank(incident.case_id))
    add("case_id", "empty case id");
  if (incident.window.start_us >= incident.window.end_us)
    add("window", "start_us " + std::to_string(incident.window.start_us) +
                      " not before end_us " + std::to_string(incident.window.end_us));

  for (const MetricSeries& series : incident.metrics) {
    std::string loc = "metrics[" + series.pod.name + "/" + series.metric + "]";
    if (series.pod.name.empty() || is_blank(series.pod.name))
      add(loc, "empty pod name");
    else if (incident.service_of(series.pod).name.empty())
      add(loc, "pod name normalizes to an empty service");
    if (series.metric.empty() || is_blank(series.metric)) add(loc, "empty metric name");
    for (std::size_t i = 0; i < series.samples.size(); ++i) {
      if (!std::isfinite(series.samples[i].value)) {
        add(loc, "non-finite value at sample " + std::to_string(i));
        break;
      }
    }
    for (std::size_t i = 1; i < series.samples.size(); ++i) {
      if (series.samples[i].time_us <= series.samples[i - 1].time_us) {
        add(loc, "timestamps not strictly increasing at sample " + std::to_string(i));
        break;
      }
    }
  }

  for (std::size_t i = 0; i < incident.logs.size(); ++i) {
    const LogEntry& entry = incident.logs[i];
    if (entry.pod.name.empty() || is_blank(entry.pod.name))
      add("logs[" + std::to_string(i) + "]", "empty pod name");
    else if (incident.service_of(entry.pod).name.empty())
      add("logs[" + std::to_string(i) + "]", "pod name normalizes to an empty service");
  }

  std::map<std::string, std::set<std::string>> span_ids;
  for (std::size_t i = 0; i < incident.spans.size(); ++i) {
    const Span& s = incident.spans[i];
    std::string loc = "spans[" + s.trace_id + "/" + s.span_id + "]";
    if (s.trace_id.empty()) add("spans[" + std::to_string(i) + "]", "empty trace id");
    if (s.span_id.empty()) add("spans[" + std::to_string(i) + "]", "empty span id");
    if (s.parent_span_id && *s.parent_span_id == s.span_id)
      add(loc, "span is its own parent");
    if (s.service.name.empty() || is_blank(s.service.name)) add(loc, "empty service name");
    if (s.operation.empty() || is_blank(s.operation)) add(loc, "empty operation name");
    if (s.duration_us < 0)
      add(loc, "negative duration " + std::to_string(s.duration_us));
    if (!s.trace_id.empty() && !s.span_id.empty() &&
        !span_ids[s.trace_id].insert(s.span_id).second)
      add(loc, "duplicate span id within trace");
  }

  if (incident.ground_truth && incident.ground_truth->service.name.empty())
    add("ground_truth", "empty service name");

  return report;
}

}  // namespace rca
