#include "chaoscycle/gateway.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "chaoscycle/schema.hpp"
#include "scripted_backend.hpp"
#include "support/fixtures.hpp"

using namespace chaoscycle;
using chaoscycle::testing::make_gateway;

namespace {

std::string temp_transcript(const std::string& name, const std::vector<Json>& entries) {
  const auto path =
      std::filesystem::temp_directory_path() / ("chaoscycle-" + name + ".jsonl");
  std::ofstream out(path, std::ios::binary);
  for (const auto& e : entries) out << e.dump() << "\n";
  return path.string();
}

Json entry(AgentRole role, int attempt, const std::string& digest, Json output) {
  return Json{{"role", to_string(role)},
              {"attempt", attempt},
              {"context_digest", digest},
              {"output", std::move(output)}};
}

AgentCall guess_call(const std::string& hint) {
  AgentCall call;
  call.role = AgentRole::AppGuesser;
  call.prompt_context = {{"resources", hint}};
  call.output_schema = schema_id_for(call.role);
  return call;
}

}  // namespace

// --- schema checker -----------------------------------------------------------

TEST(Schema, ViolationsNameTheOffendingPath) {
  const Json schema{{"type", "object"},
                    {"required", Json::array({"name", "count"})},
                    {"properties",
                     Json{{"name", Json{{"type", "string"}, {"minLength", 1}}},
                          {"count", Json{{"type", "integer"}, {"minimum", 1}}},
                          {"mode", Json{{"type", "string"},
                                        {"enum", Json::array({"one", "all"})}}}}}};

  EXPECT_TRUE(schema_violations(schema, Json{{"name", "x"}, {"count", 2}}).empty());

  auto v = schema_violations(schema, Json{{"count", 0}});
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NE(v[0].find("name"), std::string::npos);
  EXPECT_NE(v[1].find("minimum"), std::string::npos);

  v = schema_violations(schema, Json{{"name", "x"}, {"count", 1}, {"mode", "some"}});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("$.mode"), std::string::npos);

  v = schema_violations(schema, Json::array());
  ASSERT_EQ(v.size(), 1u);  // type mismatch reported at the root
}

TEST(Schema, ArrayItemChecks) {
  const Json schema{{"type", "array"},
                    {"minItems", 1},
                    {"items", Json{{"type", "string"}}}};
  EXPECT_FALSE(schema_violations(schema, Json::array()).empty());
  EXPECT_FALSE(schema_violations(schema, Json::array({1})).empty());
  EXPECT_TRUE(schema_violations(schema, Json::array({"ok"})).empty());
}

TEST(Schema, EveryRoleHasARegisteredSchema) {
  for (int r = 0; r <= static_cast<int>(AgentRole::Summarizer); ++r) {
    const auto role = static_cast<AgentRole>(r);
    EXPECT_NO_THROW(registered_schema(schema_id_for(role))) << to_string(role);
  }
  EXPECT_THROW(registered_schema("not-a-schema"), CycleError);
}

// --- digests --------------------------------------------------------------------

TEST(Digest, SensitiveToRoleAndContext) {
  const std::map<std::string, std::string> ctx{{"a", "1"}, {"b", "2"}};
  const auto d1 = context_digest(AgentRole::StateDrafter, ctx);
  EXPECT_EQ(context_digest(AgentRole::StateDrafter, ctx), d1);  // stable
  EXPECT_NE(context_digest(AgentRole::ThresholdSetter, ctx), d1);
  auto changed = ctx;
  changed["b"] = "3";
  EXPECT_NE(context_digest(AgentRole::StateDrafter, changed), d1);
  EXPECT_EQ(d1.size(), 16u);
}

// --- replay backend ---------------------------------------------------------------

TEST(Replay, ServesRecordedOutputDeterministically) {
  auto call = guess_call("[]");
  const auto digest = context_digest(call.role, call.prompt_context);
  const auto path = temp_transcript(
      "replay-basic", {entry(call.role, 1, digest, Json{{"application", "web server"}})});

  auto gateway = make_gateway(make_replay_backend(path));
  const auto first = gateway.complete_structured(call, Phase::Pre);
  const auto second = gateway.complete_structured(call, Phase::Pre);
  EXPECT_EQ(first.parsed.dump(), second.parsed.dump());  // byte-identical
  EXPECT_EQ(first.parsed.at("application"), "web server");
  EXPECT_EQ(first.attempts, 1);
  EXPECT_GT(first.usage.input_tokens, 0);
}

TEST(Replay, MissingEntryFailsLoudly) {
  const auto path = temp_transcript("replay-miss", {});
  auto gateway = make_gateway(make_replay_backend(path));
  auto call = guess_call("[]");
  try {
    gateway.complete_structured(call, Phase::Pre);
    FAIL();
  } catch (const CycleError& e) {
    EXPECT_EQ(e.code(), ErrorCode::TranscriptMiss);
  }
}

TEST(Replay, SchemaViolationRetriedAcrossAttempts) {
  auto call = guess_call("[]");
  const auto digest = context_digest(call.role, call.prompt_context);
  const auto path = temp_transcript(
      "replay-retry",
      {entry(call.role, 1, digest, Json{{"wrong_key", true}}),
       entry(call.role, 2, digest, Json{{"application", "fixed on retry"}})});

  auto recorder = std::make_shared<UsageRecorder>();
  auto gateway = make_gateway(make_replay_backend(path), recorder);
  const auto reply = gateway.complete_structured(call, Phase::Hyp);
  EXPECT_EQ(reply.attempts, 2);
  EXPECT_EQ(reply.parsed.at("application"), "fixed on retry");
  // both attempts' tokens are billed
  EXPECT_EQ(recorder->ledger().rows[static_cast<int>(Phase::Hyp)].input_tokens,
            reply.usage.input_tokens);
}

TEST(Replay, ThreeViolationsExhaust) {
  auto call = guess_call("[]");
  const auto digest = context_digest(call.role, call.prompt_context);
  std::vector<Json> entries;
  for (int attempt = 1; attempt <= 3; ++attempt)
    entries.push_back(entry(call.role, attempt, digest, Json{{"nope", attempt}}));
  auto gateway = make_gateway(make_replay_backend(temp_transcript("replay-exhaust", entries)));
  try {
    gateway.complete_structured(call, Phase::Pre);
    FAIL();
  } catch (const CycleError& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaViolationExhausted);
    EXPECT_NE(std::string(e.what()).find("nope"), std::string::npos);  // last output kept
  }
}

TEST(Replay, PolicyFilterRejectionSurfacesAsPolicyRejected) {
  AgentCall call;
  call.role = AgentRole::PolicyFilter;
  call.prompt_context = {{"instructions", "do harm"}};
  call.output_schema = schema_id_for(call.role);
  const auto digest = context_digest(call.role, call.prompt_context);
  const auto path = temp_transcript(
      "replay-policy",
      {entry(call.role, 1, digest,
             Json{{"allowed", false}, {"reason", "harmful"}, {"sanitized_instructions", ""}})});
  auto gateway = make_gateway(make_replay_backend(path));
  try {
    gateway.complete_structured(call, Phase::Pre);
    FAIL();
  } catch (const CycleError& e) {
    EXPECT_EQ(e.code(), ErrorCode::PolicyRejected);
  }
}

// --- recording ---------------------------------------------------------------------

TEST(Recording, RecordThenReplayReproducesOutputs) {
  const auto path = (std::filesystem::temp_directory_path() / "chaoscycle-rec.jsonl").string();
  std::filesystem::remove(path);

  auto recording = make_recording_backend(make_scripted_backend(), path);
  auto rec_gateway = make_gateway(std::move(recording));
  auto call = guess_call(R"([{"kind":"Pod","name":"nginx","namespace":"default"}])");
  const auto live = rec_gateway.complete_structured(call, Phase::Pre);

  auto replay_gateway = make_gateway(make_replay_backend(path));
  const auto replayed = replay_gateway.complete_structured(call, Phase::Pre);
  EXPECT_EQ(live.parsed.dump(), replayed.parsed.dump());
  EXPECT_EQ(live.usage.input_tokens, replayed.usage.input_tokens);
  EXPECT_EQ(live.usage.output_tokens, replayed.usage.output_tokens);
}

// --- http backend ---------------------------------------------------------------------

namespace {

struct LocalServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  Json last_request;
  std::string auth_header;

  explicit LocalServer(std::function<std::string(const Json&)> body_for, int status = 200) {
    server.Post("/v1/chat/completions", [this, body_for, status](const httplib::Request& req,
                                                                 httplib::Response& res) {
      last_request = Json::parse(req.body);
      auth_header = req.get_header_value("Authorization");
      res.status = status;
      res.set_content(body_for(last_request), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LocalServer() {
    server.stop();
    thread.join();
  }
};

std::string ok_completion(const std::string& content, int in_tokens, int out_tokens) {
  return Json{{"choices",
               Json::array({Json{{"message", Json{{"role", "assistant"},
                                                  {"content", content}}}}})},
              {"usage", Json{{"prompt_tokens", in_tokens},
                             {"completion_tokens", out_tokens}}}}
      .dump();
}

}  // namespace

TEST(HttpBackend, SendsChatRequestAndParsesUsage) {
  LocalServer server([](const Json&) {
    return ok_completion(R"({"application": "from http"})", 120, 8);
  });
  HttpBackendConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(server.port) + "/v1";
  config.api_key = "test-key";
  config.model = "test-model";

  auto recorder = std::make_shared<UsageRecorder>();
  auto gateway = make_gateway(make_http_backend(config), recorder);
  auto call = guess_call("[]");
  const auto reply = gateway.complete_structured(call, Phase::Anlys);

  EXPECT_EQ(reply.parsed.at("application"), "from http");
  EXPECT_EQ(reply.usage.input_tokens, 120);
  EXPECT_EQ(reply.usage.output_tokens, 8);
  // cost from configured prices: 120/1000*0.0025 + 8/1000*0.01
  EXPECT_NEAR(reply.usage.cost_usd, 0.0003 + 0.00008, 1e-12);

  EXPECT_EQ(server.auth_header, "Bearer test-key");
  EXPECT_EQ(server.last_request.at("model"), "test-model");
  EXPECT_EQ(server.last_request.at("temperature"), 0.0);
  ASSERT_EQ(server.last_request.at("messages").size(), 2u);
  EXPECT_EQ(server.last_request.at("messages")[0].at("role"), "system");
  EXPECT_EQ(server.last_request.at("messages")[1].at("role"), "user");

  const auto& row = recorder->ledger().rows[static_cast<int>(Phase::Anlys)];
  EXPECT_EQ(row.input_tokens, 120);
  EXPECT_EQ(row.output_tokens, 8);
}

TEST(HttpBackend, MarkdownFencedJsonAccepted) {
  LocalServer server([](const Json&) {
    return ok_completion("```json\n{\"application\": \"fenced\"}\n```", 10, 5);
  });
  HttpBackendConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(server.port) + "/v1";
  auto gateway = make_gateway(make_http_backend(config));
  auto call = guess_call("[]");
  EXPECT_EQ(gateway.complete_structured(call, Phase::Pre).parsed.at("application"),
            "fenced");
}

TEST(HttpBackend, RetryAppendsViolationFeedback) {
  int hits = 0;
  LocalServer server([&hits](const Json& request) {
    ++hits;
    if (hits == 1) return ok_completion(R"({"bogus": 1})", 10, 5);
    // second attempt must carry the violation note in the user prompt
    const auto user = request.at("messages")[1].at("content").get<std::string>();
    EXPECT_NE(user.find("previous attempt rejected"), std::string::npos);
    return ok_completion(R"({"application": "better"})", 10, 5);
  });
  HttpBackendConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(server.port) + "/v1";
  auto gateway = make_gateway(make_http_backend(config));
  auto call = guess_call("[]");
  const auto reply = gateway.complete_structured(call, Phase::Pre);
  EXPECT_EQ(reply.attempts, 2);
  EXPECT_EQ(hits, 2);
  EXPECT_EQ(reply.usage.input_tokens, 20);  // both attempts billed
}

TEST(HttpBackend, Non200IsBackendUnavailable) {
  LocalServer server([](const Json&) { return std::string("boom"); }, 500);
  HttpBackendConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(server.port) + "/v1";
  auto gateway = make_gateway(make_http_backend(config));
  auto call = guess_call("[]");
  try {
    gateway.complete_structured(call, Phase::Pre);
    FAIL();
  } catch (const CycleError& e) {
    EXPECT_EQ(e.code(), ErrorCode::BackendUnavailable);
  }
}

TEST(HttpBackend, ConnectionRefusedIsBackendUnavailable) {
  HttpBackendConfig config;
  config.base_url = "http://127.0.0.1:9/v1";  // discard port, nothing listens
  config.timeout_s = 2;
  auto gateway = make_gateway(make_http_backend(config));
  auto call = guess_call("[]");
  try {
    gateway.complete_structured(call, Phase::Pre);
    FAIL();
  } catch (const CycleError& e) {
    EXPECT_EQ(e.code(), ErrorCode::BackendUnavailable);
  }
}
