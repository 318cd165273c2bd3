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

#include <optional>
#include <string>

#include "rca/model.hpp"

namespace rca::ingest {

// Parsed manifest.json. `dir` is the directory the manifest lives in; the
// three telemetry paths are relative to it.
struct CaseManifest {
  std::string case_id;
  Micros window_start_us = 0;
  Micros window_end_us = 0;
  std::string metrics_file;
  std::string logs_file;
  std::string traces_file;
  std::optional<std::string> ground_truth_service;
  std::optional<std::string> ground_truth_fault;
  std::string dir;
};

struct LoadCounts {
  std::size_t metric_rows = 0;
  std::size_t metric_series = 0;
  std::size_t log_rows = 0;
  std::size_t span_rows = 0;
};

struct LoadedCase {
  IncidentCase incident;
  LoadCounts counts;
};

// `path` is either a manifest.json or a directory containing one. Throws
// DataError naming file, line, and reason on any malformed content.
CaseManifest load_manifest(const std::string& path);

// Loads and fully validates one case. Every row of the referenced files is
// either represented in the returned case or reported as an error; the
// returned case passes validate_case.
LoadedCase load_case(const std::string& path, const NameNormalizer& normalizer = {});

// Writes manifest.json, metrics.csv, logs.jsonl, and traces.csv under `dir`
// (created if absent). Output is byte-deterministic for a given case;
// load_case(write_case(c)) reproduces c field for field.
void write_case(const IncidentCase& incident, const std::string& dir);

// Reads a ranking produced by an external tool: a JSON array of
// {candidate, score} objects, best first. When any score exceeds 1 the whole
// list is rescaled by the maximum score. Duplicate candidates, unsorted
// scores, or an empty list raise DataError.
Ranking load_external_ranking(const std::string& path);

// Serialization helpers shared by the CLI and tests.
std::string format_double(double v);

}  // namespace rca::ingest
