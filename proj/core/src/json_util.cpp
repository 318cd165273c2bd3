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

#include "json_util.hpp"

#include <cmath>
#include <fstream>

namespace rca::jsonutil {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

const nlohmann::json& require_key(const nlohmann::json& obj, const std::string& ctx,
                                  const std::string& key) {
  if (!obj.is_object()) throw DataError(ctx + ": expected a JSON object");
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(ctx + ": missing required key '" + key + "'");
  return *it;
}

std::string require_string(const nlohmann::json& obj, const std::string& ctx,
                           const std::string& key) {
  const nlohmann::json& v = require_key(obj, ctx, key);
  if (!v.is_string()) throw DataError(ctx + ": key '" + key + "' must be a string");
  return v.get<std::string>();
}

std::int64_t require_int(const nlohmann::json& obj, const std::string& ctx,
                         const std::string& key) {
  const nlohmann::json& v = require_key(obj, ctx, key);
  if (!v.is_number_integer())
    throw DataError(ctx + ": key '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

double require_number(const nlohmann::json& obj, const std::string& ctx,
                      const std::string& key) {
  const nlohmann::json& v = require_key(obj, ctx, key);
  if (!v.is_number()) throw DataError(ctx + ": key '" + key + "' must be a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw DataError(ctx + ": key '" + key + "' must be finite");
  return d;
}

}  // namespace rca::jsonutil
