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

#include <stdexcept>
#include <string>

namespace rca {

// Invalid invocation: unknown flags, malformed config values, parameters out
// of range. Maps to process exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or internally inconsistent input data: telemetry files, case
// manifests, external rankings. Maps to process exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure to obtain a usable reply from an LLM backend. Maps to process
// exit code 3.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Network or protocol-level backend failure. Call sites retry a transport
// failure once before letting it surface.
class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace rca
