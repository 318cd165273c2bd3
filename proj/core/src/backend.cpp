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

#include "rca/backend.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include <httplib.h>

#include "rca/errors.hpp"

using nlohmann::json;

namespace rca::agents {

std::string to_string(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path,
                                                            bool vision) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open script file '" + path + "'");

  std::vector<std::string> responses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (doc.is_string()) {
      responses.push_back(doc.get<std::string>());
    } else if (doc.is_object() && doc.contains("response") && doc["response"].is_string()) {
      responses.push_back(doc["response"].get<std::string>());
    } else {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected a JSON string or an object with a 'response' key");
    }
  }
  return std::make_unique<ScriptedBackend>(std::move(responses), vision);
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> responses, bool vision)
    : responses_(std::move(responses)), vision_(vision) {}

std::string ScriptedBackend::complete(const std::vector<ChatTurn>& turns) {
  (void)turns;
  std::size_t index = next_.fetch_add(1);
  if (index >= responses_.size())
    throw TransportError("scripted backend exhausted after " +
                         std::to_string(responses_.size()) + " responses");
  return responses_[index];
}

std::string base64_encode(const std::uint8_t* data, std::size_t size) {
  static const char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve(((size + 2) / 3) * 4);
  std::size_t i = 0;
  for (; i + 2 < size; i += 3) {
    std::uint32_t v = (static_cast<std::uint32_t>(data[i]) << 16) |
                      (static_cast<std::uint32_t>(data[i + 1]) << 8) | data[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == size) {
    std::uint32_t v = static_cast<std::uint32_t>(data[i]) << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == size) {
    std::uint32_t v = (static_cast<std::uint32_t>(data[i]) << 16) |
                      (static_cast<std::uint32_t>(data[i + 1]) << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

HttpChatBackend::HttpChatBackend(AgentConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty())
    throw UsageError("http-chat backend requires agents.endpoint");
  const char* key = std::getenv("RCA_LLM_API_KEY");
  if (!key || *key == '\0')
    throw UsageError("http-chat backend requires the RCA_LLM_API_KEY environment variable");
  api_key_ = key;
}

std::string HttpChatBackend::complete(const std::vector<ChatTurn>& turns) {
  // Split the endpoint into origin and path for httplib.
  std::size_t scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw UsageError("agents.endpoint must start with http:// or https://");
  std::size_t path_start = config_.endpoint.find('/', scheme_end + 3);
  std::string origin = path_start == std::string::npos
                           ? config_.endpoint
                           : config_.endpoint.substr(0, path_start);
  std::string path = path_start == std::string::npos
                         ? std::string("/")
                         : config_.endpoint.substr(path_start);

  json messages = json::array();
  for (const ChatTurn& turn : turns) {
    json message{{"role", to_string(turn.role)}};
    if (turn.images.empty()) {
      message["content"] = turn.text;
    } else {
      json parts = json::array();
      parts.push_back({{"type", "text"}, {"text", turn.text}});
      for (const ImagePart& image : turn.images) {
        parts.push_back(
            {{"type", "image_url"},
             {"image_url", {{"url", "data:" + image.mime + ";base64," + image.base64}}}});
      }
      message["content"] = std::move(parts);
    }
    messages.push_back(std::move(message));
  }
  json body{{"model", config_.model},
            {"temperature", config_.temperature},
            {"messages", std::move(messages)}};

  httplib::Client client(origin);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(120, 0);
  client.set_write_timeout(30, 0);
  httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

  httplib::Result result = client.Post(path, headers, body.dump(), "application/json");
  if (!result)
    throw TransportError("http-chat: " + httplib::to_string(result.error()));
  if (result->status != 200) {
    std::string snippet = result->body.substr(0, 200);
    throw TransportError("http-chat: status " + std::to_string(result->status) + ": " +
                         snippet);
  }

  json reply;
  try {
    reply = json::parse(result->body);
  } catch (const json::parse_error& e) {
    throw TransportError(std::string("http-chat: unparseable reply: ") + e.what());
  }
  if (!reply.contains("choices") || !reply["choices"].is_array() ||
      reply["choices"].empty())
    throw TransportError("http-chat: reply has no choices");
  const json& message = reply["choices"][0].value("message", json::object());
  const json& content = message.value("content", json());
  if (content.is_string()) return content.get<std::string>();
  if (content.is_array()) {
    // Some gateways return content as a part list; concatenate text parts.
    std::string text;
    for (const json& part : content) {
      if (part.is_object() && part.value("type", "") == "text")
        text += part.value("text", "");
    }
    return text;
  }
  throw TransportError("http-chat: reply content is neither string nor part list");
}

std::unique_ptr<LlmBackend> make_backend(const std::string& kind, const AgentConfig& config,
                                         const std::string& script_path) {
  if (kind == "scripted") {
    if (script_path.empty())
      throw UsageError("scripted backend requires --script <file>");
    return ScriptedBackend::from_file(script_path, config.vision);
  }
  if (kind == "http-chat") return std::make_unique<HttpChatBackend>(config);
  throw UsageError("unknown backend '" + kind + "' (expected scripted or http-chat)");
}

}  // namespace rca::agents
