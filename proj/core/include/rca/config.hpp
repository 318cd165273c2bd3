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

#include <array>
#include <cstdint>
#include <string>

#include "rca/model.hpp"

namespace rca {

enum class RankMode { kPagerank, kRandomWalk };

// Trace-side composite scorer parameters.
struct TwistConfig {
  // Threshold: median + k_mad * 1.4826 * MAD over the baseline population.
  double k_mad = 3.0;
  // When MAD is zero the threshold degrades to median * (1 + fallback_ratio).
  double fallback_ratio = 0.2;
  // Weights for self-anomaly, trace impact, blast radius, delay severity.
  // Must be non-negative and sum to 1.
  std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};
};

// Metrics-side causal ranker parameters.
struct MetricsConfig {
  int lag = 2;
  double alpha = 0.05;
  double damping = 0.85;
  RankMode mode = RankMode::kPagerank;
  double resample_step_s = 1.0;
};

// Diagnostic bundle parameters.
struct DiagConfig {
  int window_s = 300;
  int log_cap = 200;
  std::uint64_t seed = 0;
  int token_budget = 8000;
};

// Agent workflow and backend parameters.
struct AgentConfig {
  int max_iterations = 6;
  std::string model = "gpt-4o-mini";
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  bool vision = false;
  double temperature = 1.0;
};

struct Config {
  TwistConfig twist;
  MetricsConfig metrics;
  DiagConfig diag;
  AgentConfig agents;
  std::string pod_suffix_regex = NameNormalizer::default_pattern();

  // Applies one `section.key = value` override. Throws UsageError on an
  // unknown key or an unparseable value.
  void apply(const std::string& key, const std::string& value);

  // Range checks that span several fields (weight sum, probability bounds).
  // Throws UsageError on the first violation.
  void validate() const;

  // Parses a flat key=value file. `#` starts a comment outside quoted
  // values; blank lines are ignored. The result has been validated.
  static Config from_file(const std::string& path);
};

std::string to_string(RankMode mode);

}  // namespace rca
