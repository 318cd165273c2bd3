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

#include <nlohmann/json.hpp>

#include "rca/errors.hpp"

namespace rca::jsonutil {

// Parses a JSON file; DataError names the path on open or parse failure.
nlohmann::json read_json_file(const std::string& path);

// Field accessors that throw DataError with `ctx` (file or record label)
// prefixed, so load-time messages always say where the bad value lives.
const nlohmann::json& require_key(const nlohmann::json& obj, const std::string& ctx,
                                  const std::string& key);
std::string require_string(const nlohmann::json& obj, const std::string& ctx,
                           const std::string& key);
std::int64_t require_int(const nlohmann::json& obj, const std::string& ctx,
                         const std::string& key);
double require_number(const nlohmann::json& obj, const std::string& ctx,
                      const std::string& key);

}  // namespace rca::jsonutil
