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

#include "rca/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rca/errors.hpp"

namespace rca {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    throw UsageError("config key '" + key + "': '" + value + "' is not a finite number");
  return v;
}

long long parse_int(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw UsageError("config key '" + key + "': '" + value + "' is not an integer");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  if (!value.empty() && value[0] == '-')
    throw UsageError("config key '" + key + "': '" + value + "' is negative");
  const char* begin = value.c_str();
  char* end = nullptr;
  unsigned long long v = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw UsageError("config key '" + key + "': '" + value + "' is not an unsigned integer");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw UsageError("config key '" + key + "': expected true or false, got '" + value + "'");
}

}  // namespace

std::string to_string(RankMode mode) {
  return mode == RankMode::kPagerank ? "pagerank" : "random_walk";
}

void Config::apply(const std::string& key, const std::string& value) {
  if (key == "twist.k_mad") {
    twist.k_mad = parse_double(key, value);
  } else if (key == "twist.fallback_ratio") {
    twist.fallback_ratio = parse_double(key, value);
  } else if (key == "twist.w1") {
    twist.weights[0] = parse_double(key, value);
  } else if (key == "twist.w2") {
    twist.weights[1] = parse_double(key, value);
  } else if (key == "twist.w3") {
    twist.weights[2] = parse_double(key, value);
  } else if (key == "twist.w4") {
    twist.weights[3] = parse_double(key, value);
  } else if (key == "metrics.lag") {
    metrics.lag = static_cast<int>(parse_int(key, value));
  } else if (key == "metrics.alpha") {
    metrics.alpha = parse_double(key, value);
  } else if (key == "metrics.damping") {
    metrics.damping = parse_double(key, value);
  } else if (key == "metrics.mode") {
    if (value == "pagerank") {
      metrics.mode = RankMode::kPagerank;
    } else if (value == "random_walk") {
      metrics.mode = RankMode::kRandomWalk;
    } else {
      throw UsageError("config key 'metrics.mode': expected pagerank or random_walk, got '" +
                       value + "'");
    }
  } else if (key == "metrics.resample_step_s") {
    metrics.resample_step_s = parse_double(key, value);
  } else if (key == "diag.window_s") {
    diag.window_s = static_cast<int>(parse_int(key, value));
  } else if (key == "diag.log_cap") {
    diag.log_cap = static_cast<int>(parse_int(key, value));
  } else if (key == "diag.seed") {
    diag.seed = parse_u64(key, value);
  } else if (key == "diag.token_budget") {
    diag.token_budget = static_cast<int>(parse_int(key, value));
  } else if (key == "agents.max_iterations") {
    agents.max_iterations = static_cast<int>(parse_int(key, value));
  } else if (key == "agents.model") {
    agents.model = value;
  } else if (key == "agents.endpoint") {
    agents.endpoint = value;
  } else if (key == "agents.vision") {
    agents.vision = parse_bool(key, value);
  } else if (key == "agents.temperature") {
    agents.temperature = parse_double(key, value);
  } else if (key == "model.pod_suffix_regex") {
    NameNormalizer probe(value);  // reject bad patterns at parse time
    pod_suffix_regex = value;
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

void Config::validate() const {
  if (twist.k_mad <= 0.0) throw UsageError("twist.k_mad must be positive");
  if (twist.fallback_ratio < 0.0) throw UsageError("twist.fallback_ratio must be non-negative");
  double sum = 0.0;
  for (double w : twist.weights) {
    if (w < 0.0) throw UsageError("twist weights must be non-negative");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw UsageError("twist weights must sum to 1, got " + std::to_string(sum));
  if (metrics.lag < 1) throw UsageError("metrics.lag must be at least 1");
  if (metrics.alpha <= 0.0 || metrics.alpha >= 1.0)
    throw UsageError("metrics.alpha must lie in (0, 1)");
  if (metrics.damping <= 0.0 || metrics.damping >= 1.0)
    throw UsageError("metrics.damping must lie in (0, 1)");
  if (metrics.resample_step_s <= 0.0)
    throw UsageError("metrics.resample_step_s must be positive");
  if (diag.window_s < 1) throw UsageError("diag.window_s must be at least 1");
  if (diag.log_cap < 1) throw UsageError("diag.log_cap must be at least 1");
  if (diag.token_budget < 1) throw UsageError("diag.token_budget must be at least 1");
  if (agents.max_iterations < 1) throw UsageError("agents.max_iterations must be at least 1");
  if (agents.temperature < 0.0) throw UsageError("agents.temperature must be non-negative");
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");

  Config config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (!value.empty() && value.front() == '"') {
      std::size_t close = value.find('"', 1);
      if (close == std::string::npos)
        throw UsageError(path + ":" + std::to_string(line_no) + ": unterminated quote");
      value = value.substr(1, close - 1);
    } else {
      std::size_t hash = value.find('#');
      if (hash != std::string::npos) value = trim(value.substr(0, hash));
    }
    try {
      config.apply(key, value);
    } catch (const UsageError& e) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

}  // namespace rca
