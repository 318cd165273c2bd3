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

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rca/config.hpp"

namespace rca::agents {

enum class Role { kSystem, kUser, kAssistant };

std::string to_string(Role role);

struct ImagePart {
  std::string mime;    // e.g. "image/png"
  std::string base64;  // payload without the data: prefix
};

struct ChatTurn {
  Role role = Role::kUser;
  std::string text;
  std::vector<ImagePart> images;
};

struct Capabilities {
  bool vision = false;
};

// Completion provider contract. Implementations must be safe to call from
// one thread at a time; complete() throws TransportError on network or
// protocol failure so call sites can retry once.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string id() const = 0;
  virtual Capabilities capabilities() const = 0;
  virtual std::string complete(const std::vector<ChatTurn>& turns) = 0;
};

// Replays canned responses strictly by call index; the request content is
// ignored. Exhausting the script raises TransportError, which exercises the
// same failure paths a flaky network would.
class ScriptedBackend final : public LlmBackend {
 public:
  // JSONL file: each line is either a bare JSON string or an object with a
  // "response" key.
  static std::unique_ptr<ScriptedBackend> from_file(const std::string& path,
                                                    bool vision = false);
  explicit ScriptedBackend(std::vector<std::string> responses, bool vision = false);

  std::string id() const override { return "scripted"; }
  Capabilities capabilities() const override { return {vision_}; }
  std::string complete(const std::vector<ChatTurn>& turns) override;

  std::size_t calls_made() const { return next_.load(); }

 private:
  std::vector<std::string> responses_;
  std::atomic<std::size_t> next_{0};
  bool vision_;
};

// OpenAI-compatible chat completions endpoint. The bearer token is read
// from RCA_LLM_API_KEY when the backend is constructed. Images are sent as
// data: URLs only when the configured model is marked vision-capable.
class HttpChatBackend final : public LlmBackend {
 public:
  explicit HttpChatBackend(AgentConfig config);

  std::string id() const override { return "http-chat"; }
  Capabilities capabilities() const override { return {config_.vision}; }
  std::string complete(const std::vector<ChatTurn>& turns) override;

 private:
  AgentConfig config_;
  std::string api_key_;
};

std::string base64_encode(const std::uint8_t* data, std::size_t size);

// kind is "scripted" (script_path required) or "http-chat" (endpoint and
// RCA_LLM_API_KEY required). Unknown kinds raise UsageError.
std::unique_ptr<LlmBackend> make_backend(const std::string& kind, const AgentConfig& config,
                                         const std::string& script_path = "");

}  // namespace rca::agents
