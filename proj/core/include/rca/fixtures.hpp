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

#include <cstdint>
#include <string>
#include <vector>

#include "rca/model.hpp"

namespace rca::fixtures {

struct CallEdge {
  std::size_t callee = 0;  // index into Topology::services
  double probability = 1.0;
};

struct ServiceSpec {
  std::string name;
  std::vector<std::string> operations;  // one picked per request
  double own_work_ms = 20.0;
  int pods = 1;
  std::vector<CallEdge> edges;
};

struct Topology {
  std::vector<ServiceSpec> services;  // index 0 is the entry point
  std::size_t index_of(const std::string& name) const;  // throws UsageError
  // Eight services, three call tiers, entry point "frontend".
  static Topology default_topology();
};

struct GenOptions {
  double baseline_s = 120.0;
  double incident_s = 60.0;
  double trace_rate_hz = 3.0;
  Topology topology = Topology::default_topology();
};

// Deterministic choice of a fault target for (fault, seed); never the entry
// point, which would make localization trivial.
std::string pick_target(FaultType fault, std::uint64_t seed, const Topology& topology);

// Fully synthetic labeled case, byte-identical for identical arguments.
// `target_service` must name a non-entry service in the topology.
IncidentCase generate_case(FaultType fault, const std::string& target_service,
                           std::uint64_t seed, const GenOptions& options = {});

}  // namespace rca::fixtures
