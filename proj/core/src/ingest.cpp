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

#include "rca/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "json_util.hpp"
#include "rca/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rca::ingest {

namespace {

std::string loc(const std::string& file, std::size_t line) {
  return file + ":" + std::to_string(line);
}

Micros parse_micros(const std::string& file, std::size_t line, const std::string& column,
                    const std::string& text) {
  Micros v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size())
    throw DataError(loc(file, line) + ": column '" + column + "': '" + text +
                    "' is not an integer timestamp");
  return v;
}

double parse_value(const std::string& file, std::size_t line, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw DataError(loc(file, line) + ": column 'value': '" + text + "' is not numeric");
  if (!std::isfinite(v))
    throw DataError(loc(file, line) + ": column 'value': '" + text + "' is not finite");
  return v;
}

void check_header(const std::string& file, const std::vector<std::string>& header,
                  const std::vector<std::string>& expected) {
  for (const std::string& name : expected) {
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw DataError(file + ":1: missing required column '" + name + "'");
  }
  if (header != expected) {
    throw DataError(file + ":1: expected header '" +
                    csv::join_record(expected) + "', got '" + csv::join_record(header) + "'");
  }
}

bool blank_record(const std::vector<std::string>& record) {
  return record.size() == 1 && record[0].empty();
}

std::vector<MetricSeries> load_metrics(const std::string& path, LoadCounts& counts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  csv::Reader reader(in);

  auto header = reader.next();
  if (!header) throw DataError(path + ": empty file, expected a header row");
  check_header(path, *header, {"time", "pod", "metric", "value"});

  struct Row {
    Micros time_us;
    double value;
    std::size_t line;
  };
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<std::pair<std::pair<std::string, std::string>, std::vector<Row>>> groups;

  while (auto record = reader.next()) {
    if (blank_record(*record)) continue;
    std::size_t line = reader.line();
    if (record->size() != 4)
      throw DataError(loc(path, line) + ": expected 4 fields, got " +
                      std::to_string(record->size()));
    const std::string& pod = (*record)[1];
    const std::string& metric = (*record)[2];
    if (pod.empty()) throw DataError(loc(path, line) + ": column 'pod' is empty");
    if (metric.empty()) throw DataError(loc(path, line) + ": column 'metric' is empty");
    Row row{parse_micros(path, line, "time", (*record)[0]),
            parse_value(path, line, (*record)[3]), line};
    auto key = std::make_pair(pod, metric);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, groups.size());
      groups.push_back({key, {row}});
    } else {
      groups[it->second].second.push_back(row);
    }
    ++counts.metric_rows;
  }

  std::vector<MetricSeries> out;
  out.reserve(groups.size());
  for (auto& [key, rows] : groups) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.time_us < b.time_us; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].time_us == rows[i - 1].time_us)
        throw DataError(loc(path, rows[i].line) + ": duplicate timestamp " +
                        std::to_string(rows[i].time_us) + " for series " + key.first +
                        "/" + key.second + " (first at line " +
                        std::to_string(rows[i - 1].line) + ")");
    }
    MetricSeries series;
    series.pod = PodId{key.first};
    series.metric = key.second;
    series.samples.reserve(rows.size());
    for (const Row& r : rows) series.samples.push_back({r.time_us, r.value});
    out.push_back(std::move(series));
  }
  counts.metric_series = out.size();
  return out;
}

std::vector<LogEntry> load_logs(const std::string& path, LoadCounts& counts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::vector<LogEntry> out;
  std::string line_text;
  std::size_t line_no = 0;
  while (std::getline(in, line_text)) {
    ++line_no;
    if (!line_text.empty() && line_text.back() == '\r') line_text.pop_back();
    if (line_text.empty()) continue;
    json record;
    try {
      record = json::parse(line_text);
    } catch (const json::parse_error& e) {
      throw DataError(loc(path, line_no) + ": " + e.what());
    }
    std::string ctx = loc(path, line_no);
    if (!record.is_object()) throw DataError(ctx + ": expected a JSON object");
    for (const auto& [key, value] : record.items()) {
      if (key != "time" && key != "pod" && key != "severity" && key != "message")
        throw DataError(ctx + ": unknown key '" + key + "'");
    }
    LogEntry entry;
    entry.time_us = jsonutil::require_int(record, ctx, "time");
    entry.pod = PodId{jsonutil::require_string(record, ctx, "pod")};
    if (entry.pod.name.empty()) throw DataError(ctx + ": key 'pod' is empty");
    entry.severity = parse_severity(jsonutil::require_string(record, ctx, "severity"));
    entry.message = jsonutil::require_string(record, ctx, "message");
    out.push_back(std::move(entry));
    ++counts.log_rows;
  }
  return out;
}

std::vector<Span> load_traces(const std::string& path, LoadCounts& counts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  csv::Reader reader(in);

  auto header = reader.next();
  if (!header) throw DataError(path + ": empty file, expected a header row");
  check_header(path, *header,
               {"trace_id", "span_id", "parent_span_id", "service", "operation",
                "start_us", "duration_us"});

  std::vector<Span> out;
  while (auto record = reader.next()) {
    if (blank_record(*record)) continue;
    std::size_t line = reader.line();
    if (record->size() != 7)
      throw DataError(loc(path, line) + ": expected 7 fields, got " +
                      std::to_string(record->size()));
    Span span;
    span.trace_id = (*record)[0];
    span.span_id = (*record)[1];
    if (span.trace_id.empty()) throw DataError(loc(path, line) + ": column 'trace_id' is empty");
    if (span.span_id.empty()) throw DataError(loc(path, line) + ": column 'span_id' is empty");
    if (!(*record)[2].empty()) span.parent_span_id = (*record)[2];
    span.service = ServiceId{(*record)[3]};
    span.operation = (*record)[4];
    if (span.service.name.empty()) throw DataError(loc(path, line) + ": column 'service' is empty");
    if (span.operation.empty()) throw DataError(loc(path, line) + ": column 'operation' is empty");
    span.start_us = parse_micros(path, line, "start_us", (*record)[5]);
    span.duration_us = parse_micros(path, line, "duration_us", (*record)[6]);
    if (span.duration_us < 0)
      throw DataError(loc(path, line) + ": negative duration " +
                      std::to_string(span.duration_us));
    out.push_back(std::move(span));
    ++counts.span_rows;
  }
  return out;
}

}  // namespace

CaseManifest load_manifest(const std::string& path) {
  fs::path p(path);
  std::error_code ec;
  if (fs::is_directory(p, ec)) p /= "manifest.json";
  json doc = jsonutil::read_json_file(p.string());
  std::string ctx = p.string();
  if (!doc.is_object()) throw DataError(ctx + ": expected a JSON object");

  CaseManifest m;
  m.case_id = jsonutil::require_string(doc, ctx, "case_id");
  if (m.case_id.empty()) throw DataError(ctx + ": key 'case_id' is empty");
  m.window_start_us = jsonutil::require_int(doc, ctx, "window_start_us");
  m.window_end_us = jsonutil::require_int(doc, ctx, "window_end_us");
  if (m.window_start_us >= m.window_end_us)
    throw DataError(ctx + ": window_start_us must be before window_end_us");
  m.metrics_file = jsonutil::require_string(doc, ctx, "metrics");
  m.logs_file = jsonutil::require_string(doc, ctx, "logs");
  m.traces_file = jsonutil::require_string(doc, ctx, "traces");
  if (doc.contains("ground_truth_service"))
    m.ground_truth_service = jsonutil::require_string(doc, ctx, "ground_truth_service");
  if (doc.contains("ground_truth_fault"))
    m.ground_truth_fault = jsonutil::require_string(doc, ctx, "ground_truth_fault");
  if (m.ground_truth_service.has_value() != m.ground_truth_fault.has_value())
    throw DataError(ctx + ": ground_truth_service and ground_truth_fault must appear together");
  m.dir = p.parent_path().string();

  for (const std::string& file : {m.metrics_file, m.logs_file, m.traces_file}) {
    fs::path full = fs::path(m.dir) / file;
    if (!fs::exists(full, ec))
      throw DataError(ctx + ": referenced file '" + full.string() + "' does not exist");
  }
  return m;
}

LoadedCase load_case(const std::string& path, const NameNormalizer& normalizer) {
  CaseManifest manifest = load_manifest(path);

  LoadedCase loaded;
  IncidentCase& incident = loaded.incident;
  incident.case_id = manifest.case_id;
  incident.window = TimeWindow{manifest.window_start_us, manifest.window_end_us};
  incident.normalizer = normalizer;
  incident.metrics =
      load_metrics((fs::path(manifest.dir) / manifest.metrics_file).string(), loaded.counts);
  incident.logs =
      load_logs((fs::path(manifest.dir) / manifest.logs_file).string(), loaded.counts);
  incident.spans =
      load_traces((fs::path(manifest.dir) / manifest.traces_file).string(), loaded.counts);

  if (manifest.ground_truth_service) {
    auto fault = parse_fault_type(*manifest.ground_truth_fault);
    if (!fault)
      throw DataError(manifest.dir + "/manifest.json: unknown ground_truth_fault '" +
                      *manifest.ground_truth_fault + "'");
    incident.ground_truth = GroundTruth{ServiceId{*manifest.ground_truth_service}, *fault};
  }

  group_spans_into_traces(incident.spans);

  ValidationReport report = validate_case(incident);
  if (!report.ok())
    throw DataError("case '" + incident.case_id + "' failed validation:\n" +
                    report.to_string());
  return loaded;
}

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

void write_case(const IncidentCase& incident, const std::string& dir) {
  fs::create_directories(dir);

  {
    std::ofstream out(fs::path(dir) / "metrics.csv", std::ios::binary);
    out << "time,pod,metric,value\n";
    for (const MetricSeries& series : incident.metrics) {
      for (const MetricSample& s : series.samples) {
        out << csv::join_record({std::to_string(s.time_us), series.pod.name,
                                 series.metric, format_double(s.value)})
            << "\n";
      }
    }
  }
  {
    std::ofstream out(fs::path(dir) / "logs.jsonl", std::ios::binary);
    for (const LogEntry& entry : incident.logs) {
      json record{{"time", entry.time_us},
                  {"pod", entry.pod.name},
                  {"severity", to_string(entry.severity)},
                  {"message", entry.message}};
      out << record.dump() << "\n";
    }
  }
  {
    std::ofstream out(fs::path(dir) / "traces.csv", std::ios::binary);
    out << "trace_id,span_id,parent_span_id,service,operation,start_us,duration_us\n";
    for (const Span& s : incident.spans) {
      out << csv::join_record({s.trace_id, s.span_id, s.parent_span_id.value_or(""),
                               s.service.name, s.operation, std::to_string(s.start_us),
                               std::to_string(s.duration_us)})
          << "\n";
    }
  }
  {
    json manifest{{"case_id", incident.case_id},
                  {"window_start_us", incident.window.start_us},
                  {"window_end_us", incident.window.end_us},
                  {"metrics", "metrics.csv"},
                  {"logs", "logs.jsonl"},
                  {"traces", "traces.csv"}};
    if (incident.ground_truth) {
      manifest["ground_truth_service"] = incident.ground_truth->service.name;
      manifest["ground_truth_fault"] = to_string(incident.ground_truth->fault);
    }
    std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
  }
}

Ranking load_external_ranking(const std::string& path) {
  json doc = jsonutil::read_json_file(path);
  if (!doc.is_array()) throw DataError(path + ": expected a JSON array");
  if (doc.empty()) throw DataError(path + ": ranking is empty");

  Ranking ranking;
  double max_score = 0.0;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    std::string ctx = path + ": entry " + std::to_string(i);
    const json& item = doc[i];
    if (!item.is_object()) throw DataError(ctx + ": expected an object");
    for (const auto& [key, value] : item.items()) {
      if (key != "candidate" && key != "score" && key != "rationale")
        throw DataError(ctx + ": unknown key '" + key + "'");
    }
    Ranking::Entry entry;
    entry.candidate = ServiceId{jsonutil::require_string(item, ctx, "candidate")};
    if (entry.candidate.name.empty()) throw DataError(ctx + ": key 'candidate' is empty");
    entry.score = jsonutil::require_number(item, ctx, "score");
    if (item.contains("rationale"))
      entry.rationale = jsonutil::require_string(item, ctx, "rationale");
    max_score = std::max(max_score, entry.score);
    ranking.entries.push_back(std::move(entry));
  }

  // Scores from tools that emit unnormalized magnitudes are rescaled by the
  // maximum; lists already inside [0, 1] pass through untouched.
  if (max_score > 1.0) {
    for (auto& entry : ranking.entries) entry.score /= max_score;
  }

  std::vector<std::string> problems = ranking.violations();
  if (!problems.empty()) {
    std::string msg = path + ": invalid ranking:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }
  return ranking;
}

}  // namespace rca::ingest
