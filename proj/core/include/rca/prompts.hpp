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
#include <vector>

#include "rca/agents.hpp"
#include "rca/diagnostics.hpp"
#include "rca/model.hpp"

// Prompt templates for the three agents, embedded as versioned constants so
// a transcript can always be tied to the exact wording that produced it.
namespace rca::agents::prompts {

inline constexpr const char* kPromptVersion = "v1";

// Shared definitions of the six fault classes the agents reason about.
std::string fault_type_glossary();

// Reply contracts quoted inside prompts and repair messages.
std::string rerank_schema();
std::string remediation_schema();

std::vector<ChatTurn> build_rerank_prompt(const WorkflowState& state,
                                          const diag::DependencySubgraph& context);

std::vector<ChatTurn> build_deep_dive_prompt(const ServiceId& target,
                                             const std::string& bundle_text,
                                             const std::optional<ImagePart>& chart);

std::vector<ChatTurn> build_remediation_prompt(const WorkflowState& state,
                                               const std::string& case_id);

// Original turns + the unparseable assistant reply + one corrective user
// turn quoting the schema.
std::vector<ChatTurn> build_repair_prompt(const std::vector<ChatTurn>& original,
                                          const std::string& bad_reply,
                                          const std::string& schema);

}  // namespace rca::agents::prompts
