#include <rca/backend.hpp>

#include <atomic>
#include <cstdlib>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <rca/config.hpp>
#include <rca/errors.hpp>

#include "testutil.hpp"

namespace {

using namespace rca::agents;
using nlohmann::json;

// Scoped RCA_LLM_API_KEY override; restores the previous value on exit.
class ApiKeyGuard {
 public:
  explicit ApiKeyGuard(const char* value) {
    const char* old = std::getenv("RCA_LLM_API_KEY");
    if (old) saved_ = old;
    if (value)
      ::setenv("RCA_LLM_API_KEY", value, 1);
    else
      ::unsetenv("RCA_LLM_API_KEY");
  }
  ~ApiKeyGuard() {
    if (saved_)
      ::setenv("RCA_LLM_API_KEY", saved_->c_str(), 1);
    else
      ::unsetenv("RCA_LLM_API_KEY");
  }

 private:
  std::optional<std::string> saved_;
};

TEST(Role, Names) {
  EXPECT_EQ(to_string(Role::kSystem), "system");
  EXPECT_EQ(to_string(Role::kUser), "user");
  EXPECT_EQ(to_string(Role::kAssistant), "assistant");
}

TEST(ScriptedBackend, ReplaysByCallIndex) {
  ScriptedBackend backend({"one", "two", "three"});
  EXPECT_EQ(backend.id(), "scripted");
  EXPECT_FALSE(backend.capabilities().vision);
  EXPECT_EQ(backend.calls_made(), 0u);

  std::vector<ChatTurn> turns{{Role::kUser, "ignored", {}}};
  EXPECT_EQ(backend.complete(turns), "one");
  EXPECT_EQ(backend.complete({}), "two");  // request content is irrelevant
  EXPECT_EQ(backend.complete(turns), "three");
  EXPECT_EQ(backend.calls_made(), 3u);
}

TEST(ScriptedBackend, ExhaustionIsATransportError) {
  ScriptedBackend backend({"only"});
  EXPECT_EQ(backend.complete({}), "only");
  try {
    backend.complete({});
    FAIL();
  } catch (const rca::TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("exhausted after 1 responses"),
              std::string::npos);
  }
  // Failed attempts still count.
  EXPECT_EQ(backend.calls_made(), 2u);
}

TEST(ScriptedBackend, FromFileAcceptsStringsAndResponseObjects) {
  testutil::TempDir dir("script");
  testutil::write_file(dir.str("replies.jsonl"),
                       "\"plain string reply\"\n"
                       "\n"
                       "{\"response\": \"object reply\"}\r\n"
                       "\"last\"");
  auto backend = ScriptedBackend::from_file(dir.str("replies.jsonl"));
  EXPECT_EQ(backend->complete({}), "plain string reply");
  EXPECT_EQ(backend->complete({}), "object reply");
  EXPECT_EQ(backend->complete({}), "last");
  EXPECT_THROW(backend->complete({}), rca::TransportError);
}

TEST(ScriptedBackend, FromFileRejectsMalformedLines) {
  testutil::TempDir dir("script-bad");
  testutil::write_file(dir.str("broken.jsonl"), "\"fine\"\nnot json at all\n");
  try {
    ScriptedBackend::from_file(dir.str("broken.jsonl"));
    FAIL();
  } catch (const rca::DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
  }

  testutil::write_file(dir.str("wrong-shape.jsonl"), "{\"reply\": \"x\"}\n");
  try {
    ScriptedBackend::from_file(dir.str("wrong-shape.jsonl"));
    FAIL();
  } catch (const rca::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("'response'"), std::string::npos);
  }

  EXPECT_THROW(ScriptedBackend::from_file(dir.str("missing.jsonl")), rca::DataError);
}

TEST(ScriptedBackend, VisionFlagFlowsIntoCapabilities) {
  ScriptedBackend plain({"x"});
  EXPECT_FALSE(plain.capabilities().vision);
  ScriptedBackend seeing({"x"}, true);
  EXPECT_TRUE(seeing.capabilities().vision);

  testutil::TempDir dir("script-vision");
  testutil::write_file(dir.str("r.jsonl"), "\"x\"\n");
  EXPECT_TRUE(ScriptedBackend::from_file(dir.str("r.jsonl"), true)
                  ->capabilities()
                  .vision);
}

TEST(Base64, ReferenceVectors) {
  auto enc = [](const std::string& s) {
    return base64_encode(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
  };
  EXPECT_EQ(enc(""), "");
  EXPECT_EQ(enc("f"), "Zg==");
  EXPECT_EQ(enc("fo"), "Zm8=");
  EXPECT_EQ(enc("foo"), "Zm9v");
  EXPECT_EQ(enc("foob"), "Zm9vYg==");
  EXPECT_EQ(enc("fooba"), "Zm9vYmE=");
  EXPECT_EQ(enc("foobar"), "Zm9vYmFy");

  const std::uint8_t raw[] = {0x00, 0xff, 0x10};
  EXPECT_EQ(base64_encode(raw, 3), "AP8Q");
}

TEST(MakeBackend, ScriptedRequiresAScriptPath) {
  rca::AgentConfig config;
  EXPECT_THROW(make_backend("scripted", config), rca::UsageError);

  testutil::TempDir dir("mk");
  testutil::write_file(dir.str("r.jsonl"), "\"x\"\n");
  auto backend = make_backend("scripted", config, dir.str("r.jsonl"));
  EXPECT_EQ(backend->id(), "scripted");
}

TEST(MakeBackend, UnknownKindIsAUsageError) {
  rca::AgentConfig config;
  try {
    make_backend("telepathy", config);
    FAIL();
  } catch (const rca::UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown backend 'telepathy'"),
              std::string::npos);
  }
}

TEST(MakeBackend, HttpChatRequiresTheApiKeyAtConstruction) {
  ApiKeyGuard guard(nullptr);
  rca::AgentConfig config;
  try {
    make_backend("http-chat", config);
    FAIL();
  } catch (const rca::UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("RCA_LLM_API_KEY"), std::string::npos);
  }
}

TEST(HttpChatBackend, ConstructsOnceKeyAndEndpointArePresent) {
  ApiKeyGuard guard("test-key-123");
  rca::AgentConfig config;
  auto backend = make_backend("http-chat", config);
  EXPECT_EQ(backend->id(), "http-chat");
  EXPECT_FALSE(backend->capabilities().vision);

  config.vision = true;
  HttpChatBackend seeing(config);
  EXPECT_TRUE(seeing.capabilities().vision);

  config.endpoint.clear();
  EXPECT_THROW(HttpChatBackend{config}, rca::UsageError);
}

// Loopback chat-completions stub; each test installs its own handler.
class LocalChatServer {
 public:
  LocalChatServer() {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   handler_(req, res);
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalChatServer() {
    server_.stop();
    thread_.join();
  }

  void handle(std::function<void(const httplib::Request&, httplib::Response&)> h) {
    handler_ = std::move(h);
  }
  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }

 private:
  httplib::Server server_;
  std::function<void(const httplib::Request&, httplib::Response&)> handler_ =
      [](const httplib::Request&, httplib::Response& res) { res.status = 500; };
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpChatBackend, SendsChatRequestAndReadsStringContent) {
  ApiKeyGuard guard("test-key-123");
  LocalChatServer server;

  json seen_body;
  std::string seen_auth;
  server.handle([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = json::parse(req.body);
    res.set_content(
        json{{"choices", {{{"message", {{"content", "hello back"}}}}}}}.dump(),
        "application/json");
  });

  rca::AgentConfig config;
  config.endpoint = server.endpoint();
  config.model = "test-model";
  HttpChatBackend backend(config);

  std::vector<ChatTurn> turns{{Role::kSystem, "be terse", {}},
                              {Role::kUser, "what broke?", {}}};
  EXPECT_EQ(backend.complete(turns), "hello back");

  EXPECT_EQ(seen_auth, "Bearer test-key-123");
  EXPECT_EQ(seen_body.at("model"), "test-model");
  ASSERT_EQ(seen_body.at("messages").size(), 2u);
  EXPECT_EQ(seen_body["messages"][0].at("role"), "system");
  EXPECT_EQ(seen_body["messages"][0].at("content"), "be terse");
  EXPECT_EQ(seen_body["messages"][1].at("role"), "user");
}

TEST(HttpChatBackend, ConcatenatesTextPartsFromPartListContent) {
  ApiKeyGuard guard("k");
  LocalChatServer server;
  server.handle([](const httplib::Request&, httplib::Response& res) {
    json content = json::array({{{"type", "text"}, {"text", "part one "}},
                                {{"type", "refusal"}, {"refusal", "n/a"}},
                                {{"type", "text"}, {"text", "and two"}}});
    res.set_content(
        json{{"choices", {{{"message", {{"content", content}}}}}}}.dump(),
        "application/json");
  });

  rca::AgentConfig config;
  config.endpoint = server.endpoint();
  HttpChatBackend backend(config);
  EXPECT_EQ(backend.complete({{Role::kUser, "q", {}}}), "part one and two");
}

TEST(HttpChatBackend, ImagesBecomeDataUrlsInThePayload) {
  ApiKeyGuard guard("k");
  LocalChatServer server;
  json seen_body;
  server.handle([&](const httplib::Request& req, httplib::Response& res) {
    seen_body = json::parse(req.body);
    res.set_content(json{{"choices", {{{"message", {{"content", "ok"}}}}}}}.dump(),
                    "application/json");
  });

  rca::AgentConfig config;
  config.endpoint = server.endpoint();
  config.vision = true;
  HttpChatBackend backend(config);

  ChatTurn turn{Role::kUser, "see this", {ImagePart{"image/png", "QUJD"}}};
  EXPECT_EQ(backend.complete({turn}), "ok");

  const json& content = seen_body.at("messages").at(0).at("content");
  ASSERT_TRUE(content.is_array());
  ASSERT_EQ(content.size(), 2u);
  EXPECT_EQ(content[0].at("type"), "text");
  EXPECT_EQ(content[1].at("type"), "image_url");
  EXPECT_EQ(content[1].at("image_url").at("url"), "data:image/png;base64,QUJD");
}

TEST(HttpChatBackend, NonOkStatusIsATransportError) {
  ApiKeyGuard guard("k");
  LocalChatServer server;
  server.handle([](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
    res.set_content("overloaded", "text/plain");
  });

  rca::AgentConfig config;
  config.endpoint = server.endpoint();
  HttpChatBackend backend(config);
  try {
    backend.complete({{Role::kUser, "q", {}}});
    FAIL();
  } catch (const rca::TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("status 503"), std::string::npos);
  }
}

TEST(HttpChatBackend, MalformedRepliesAreTransportErrors) {
  ApiKeyGuard guard("k");
  LocalChatServer server;

  rca::AgentConfig config;
  config.endpoint = server.endpoint();
  HttpChatBackend backend(config);

  server.handle([](const httplib::Request&, httplib::Response& res) {
    res.set_content("this is not json", "text/plain");
  });
  EXPECT_THROW(backend.complete({{Role::kUser, "q", {}}}), rca::TransportError);

  server.handle([](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"choices", json::array()}}.dump(), "application/json");
  });
  EXPECT_THROW(backend.complete({{Role::kUser, "q", {}}}), rca::TransportError);

  server.handle([](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"choices", {{{"message", {{"content", 42}}}}}}}.dump(),
                    "application/json");
  });
  EXPECT_THROW(backend.complete({{Role::kUser, "q", {}}}), rca::TransportError);
}

TEST(HttpChatBackend, UnreachableEndpointIsATransportError) {
  ApiKeyGuard guard("k");
  rca::AgentConfig config;
  // Bound-then-closed port: connection refused, not a hang.
  config.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  HttpChatBackend backend(config);
  EXPECT_THROW(backend.complete({{Role::kUser, "q", {}}}), rca::TransportError);
}

}  // namespace
