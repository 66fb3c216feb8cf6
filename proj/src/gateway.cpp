#include "chaoscycle/gateway.hpp"

#include <httplib.h>

#include <chrono>
#include <fstream>

#include "chaoscycle/schema.hpp"

namespace chaoscycle {

std::string to_string(AgentRole role) {
  switch (role) {
    case AgentRole::ContextSummarizer: return "ContextSummarizer";
    case AgentRole::IssueSpotter: return "IssueSpotter";
    case AgentRole::AppGuesser: return "AppGuesser";
    case AgentRole::PolicyFilter: return "PolicyFilter";
    case AgentRole::StateDrafter: return "StateDrafter";
    case AgentRole::ProbeWriter: return "ProbeWriter";
    case AgentRole::ThresholdSetter: return "ThresholdSetter";
    case AgentRole::VaCBuilder: return "VaCBuilder";
    case AgentRole::SufficiencyJudge: return "SufficiencyJudge";
    case AgentRole::ScenarioDrafter: return "ScenarioDrafter";
    case AgentRole::FaultRefiner: return "FaultRefiner";
    case AgentRole::StagePlanner: return "StagePlanner";
    case AgentRole::ItemScheduler: return "ItemScheduler";
    case AgentRole::TimelineWriter: return "TimelineWriter";
    case AgentRole::Replanner: return "Replanner";
    case AgentRole::FailureAnalyst: return "FailureAnalyst";
    case AgentRole::Reconfigurer: return "Reconfigurer";
    case AgentRole::Summarizer: return "Summarizer";
  }
  return "ContextSummarizer";
}

AgentRole agent_role_from(const std::string& s) {
  static const std::map<std::string, AgentRole> lookup = {
      {"ContextSummarizer", AgentRole::ContextSummarizer},
      {"IssueSpotter", AgentRole::IssueSpotter},
      {"AppGuesser", AgentRole::AppGuesser},
      {"PolicyFilter", AgentRole::PolicyFilter},
      {"StateDrafter", AgentRole::StateDrafter},
      {"ProbeWriter", AgentRole::ProbeWriter},
      {"ThresholdSetter", AgentRole::ThresholdSetter},
      {"VaCBuilder", AgentRole::VaCBuilder},
      {"SufficiencyJudge", AgentRole::SufficiencyJudge},
      {"ScenarioDrafter", AgentRole::ScenarioDrafter},
      {"FaultRefiner", AgentRole::FaultRefiner},
      {"StagePlanner", AgentRole::StagePlanner},
      {"ItemScheduler", AgentRole::ItemScheduler},
      {"TimelineWriter", AgentRole::TimelineWriter},
      {"Replanner", AgentRole::Replanner},
      {"FailureAnalyst", AgentRole::FailureAnalyst},
      {"Reconfigurer", AgentRole::Reconfigurer},
      {"Summarizer", AgentRole::Summarizer},
  };
  auto it = lookup.find(s);
  if (it == lookup.end())
    fail(ErrorCode::InvalidValue, "unknown agent role '" + s + "'");
  return it->second;
}

// ---------------------------------------------------------------------------
// prompt rendering and digests

std::string render_user_prompt(const std::map<std::string, std::string>& context) {
  std::string out;
  for (const auto& [key, text] : context) {
    out += "## " + key + "\n" + text + "\n\n";
  }
  return out;
}

namespace {

void fnv1a_mix(unsigned long long& hash, const std::string& data) {
  constexpr unsigned long long prime = 1099511628211ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= prime;
  }
  hash ^= 0x1e;  // field separator
  hash *= prime;
}

}  // namespace

std::string context_digest(AgentRole role, const std::map<std::string, std::string>& context) {
  unsigned long long hash = 14695981039346656037ULL;
  fnv1a_mix(hash, to_string(role));
  fnv1a_mix(hash, prompt_template(role).version);
  for (const auto& [key, text] : context) {
    fnv1a_mix(hash, key);
    fnv1a_mix(hash, text);
  }
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx", hash);
  return buf;
}

long long estimate_tokens(const std::string& text) {
  return static_cast<long long>((text.size() + 3) / 4);
}

// ---------------------------------------------------------------------------
// HTTP backend

namespace {

class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    auto rest = config_.base_url;
    const auto scheme_end = rest.find("://");
    if (scheme_end == std::string::npos)
      fail(ErrorCode::InvalidValue, "http backend base_url needs a scheme");
    const auto path_start = rest.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      origin_ = rest;
    } else {
      origin_ = rest.substr(0, path_start);
      path_prefix_ = rest.substr(path_start);
      while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
  }

  BackendResult complete(const BackendRequest& request) override {
    Json body{{"model", config_.model},
              {"messages",
               Json::array({Json{{"role", "system"}, {"content", request.system_prompt}},
                            Json{{"role", "user"}, {"content", request.user_prompt}}})},
              {"temperature", request.temperature}};

    httplib::Client client(origin_);
    client.set_read_timeout(config_.timeout_s, 0);
    client.set_connection_timeout(config_.timeout_s, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                           "application/json");
    if (!res)
      fail(ErrorCode::BackendUnavailable,
           "no response from " + origin_ + " (" + httplib::to_string(res.error()) + ")");
    if (res->status != 200)
      fail(ErrorCode::BackendUnavailable,
           "backend returned HTTP " + std::to_string(res->status) + ": " + res->body);

    Json reply;
    try {
      reply = Json::parse(res->body);
    } catch (const Json::parse_error& e) {
      fail(ErrorCode::BackendUnavailable, std::string("unparseable backend body: ") + e.what());
    }
    BackendResult result;
    try {
      result.output_text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception& e) {
      fail(ErrorCode::BackendUnavailable, std::string("unexpected backend body: ") + e.what());
    }
    const Json usage = reply.value("usage", Json::object());
    result.input_tokens = usage.value("prompt_tokens", 0LL);
    result.output_tokens = usage.value("completion_tokens", 0LL);
    return result;
  }

  std::string name() const override { return "http"; }

 private:
  HttpBackendConfig config_;
  std::string origin_;
  std::string path_prefix_;
};

// ---------------------------------------------------------------------------
// replay backend

std::string entry_key(const std::string& role, int attempt, const std::string& digest) {
  return role + "#" + std::to_string(attempt) + "#" + digest;
}

class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(const std::string& path) {
    std::ifstream in(path);
    if (!in)
      fail(ErrorCode::BackendUnavailable, "cannot open transcript '" + path + "'");
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      Json entry;
      try {
        entry = Json::parse(line);
      } catch (const Json::parse_error& e) {
        fail(ErrorCode::BackendUnavailable,
             path + ":" + std::to_string(line_no) + ": " + e.what());
      }
      const auto key = entry_key(entry.at("role").get<std::string>(),
                                 entry.at("attempt").get<int>(),
                                 entry.at("context_digest").get<std::string>());
      entries_.emplace(key, entry.at("output"));
    }
  }

  BackendResult complete(const BackendRequest& request) override {
    const auto key = entry_key(to_string(request.role), request.attempt, request.digest);
    auto it = entries_.find(key);
    if (it == entries_.end())
      fail(ErrorCode::TranscriptMiss,
           "no transcript entry for " + key + " (prompt drift or missing recording)");
    BackendResult result;
    result.output_text = it->second.dump();
    result.input_tokens =
        estimate_tokens(request.system_prompt) + estimate_tokens(request.user_prompt);
    result.output_tokens = estimate_tokens(result.output_text);
    return result;
  }

  std::string name() const override { return "replay"; }

 private:
  std::map<std::string, Json> entries_;
};

// ---------------------------------------------------------------------------
// recording wrapper

class RecordingBackend final : public Backend {
 public:
  RecordingBackend(std::unique_ptr<Backend> inner, const std::string& path)
      : inner_(std::move(inner)), out_(path, std::ios::binary) {
    if (!out_) fail(ErrorCode::IoError, "cannot write transcript '" + path + "'");
  }

  BackendResult complete(const BackendRequest& request) override {
    BackendResult result = inner_->complete(request);
    Json output;
    try {
      output = Json::parse(result.output_text);
    } catch (const Json::parse_error&) {
      output = result.output_text;  // preserved verbatim; replay serves it back
    }
    const auto key = entry_key(to_string(request.role), request.attempt, request.digest);
    auto it = seen_.find(key);
    if (it != seen_.end()) {
      if (it->second != output)
        throw std::logic_error("conflicting transcript outputs for " + key);
      return result;  // identical repeat, already recorded
    }
    seen_.emplace(key, output);
    const Json entry{{"role", to_string(request.role)},
                     {"attempt", request.attempt},
                     {"context_digest", request.digest},
                     {"output", output}};
    out_ << entry.dump() << "\n";
    out_.flush();
    return result;
  }

  std::string name() const override { return "recording(" + inner_->name() + ")"; }

 private:
  std::unique_ptr<Backend> inner_;
  std::ofstream out_;
  std::map<std::string, Json> seen_;
};

}  // namespace

std::unique_ptr<Backend> make_http_backend(const HttpBackendConfig& config) {
  return std::make_unique<HttpBackend>(config);
}

std::unique_ptr<Backend> make_replay_backend(const std::string& transcript_path) {
  return std::make_unique<ReplayBackend>(transcript_path);
}

std::unique_ptr<Backend> make_recording_backend(std::unique_ptr<Backend> inner,
                                                const std::string& transcript_path) {
  return std::make_unique<RecordingBackend>(std::move(inner), transcript_path);
}

// ---------------------------------------------------------------------------
// usage recording

void UsageRecorder::record(Phase phase, const Usage& usage) {
  std::lock_guard lock(mutex_);
  ledger_ = record_usage(ledger_, phase, usage);
}

CostLedger UsageRecorder::ledger() const {
  std::lock_guard lock(mutex_);
  return ledger_;
}

// ---------------------------------------------------------------------------
// gateway

namespace {

// Models sometimes wrap JSON in markdown fences; strip them before parsing.
std::string extract_json_text(const std::string& text) {
  auto start = text.find("```");
  if (start == std::string::npos) return text;
  start = text.find('\n', start);
  if (start == std::string::npos) return text;
  const auto end = text.rfind("```");
  if (end <= start) return text;
  return text.substr(start + 1, end - start - 1);
}

}  // namespace

Gateway::Gateway(std::shared_ptr<Backend> backend, PriceConfig prices,
                 std::shared_ptr<UsageRecorder> recorder)
    : backend_(std::move(backend)), prices_(prices), recorder_(std::move(recorder)) {}

AgentReply Gateway::complete_structured(const AgentCall& call, Phase phase) {
  const Json& schema = registered_schema(call.output_schema);
  const PromptTemplate& tmpl = prompt_template(call.role);
  const std::string digest = context_digest(call.role, call.prompt_context);
  const std::string base_prompt = render_user_prompt(call.prompt_context);

  Usage total;
  std::string violation_note;
  std::string last_output;

  auto flush_usage = [&]() {
    if (recorder_) recorder_->record(phase, total);
  };

  for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
    BackendRequest request;
    request.role = call.role;
    request.attempt = attempt;
    request.digest = digest;
    request.system_prompt = tmpl.system_text;
    request.user_prompt = base_prompt + violation_note;
    request.temperature = call.temperature;
    request.context = call.prompt_context;

    const auto t0 = std::chrono::steady_clock::now();
    BackendResult result;
    try {
      result = backend_->complete(request);
    } catch (...) {
      flush_usage();
      throw;
    }
    const auto t1 = std::chrono::steady_clock::now();

    total.input_tokens += result.input_tokens;
    total.output_tokens += result.output_tokens;
    total.wall_time_s += std::chrono::duration<double>(t1 - t0).count();
    total.cost_usd += static_cast<double>(result.input_tokens) / 1000.0 * prices_.price_in_per_1k +
                      static_cast<double>(result.output_tokens) / 1000.0 * prices_.price_out_per_1k;
    last_output = result.output_text;

    std::vector<std::string> violations;
    Json parsed;
    try {
      parsed = Json::parse(extract_json_text(result.output_text));
    } catch (const Json::parse_error& e) {
      violations.push_back(std::string("output was not valid JSON: ") + e.what());
    }
    if (violations.empty()) violations = schema_violations(schema, parsed);

    if (violations.empty()) {
      flush_usage();
      if (call.role == AgentRole::PolicyFilter && parsed.contains("allowed") &&
          parsed.at("allowed").is_boolean() && !parsed.at("allowed").get<bool>()) {
        fail(ErrorCode::PolicyRejected, parsed.value("reason", std::string("instructions rejected")));
      }
      AgentReply reply;
      reply.parsed = std::move(parsed);
      reply.usage = total;
      reply.attempts = attempt;
      return reply;
    }

    violation_note = "\n## previous attempt rejected\n";
    for (const auto& v : violations) violation_note += "- " + v + "\n";
    violation_note += "Return corrected JSON only.\n";
  }

  flush_usage();
  fail(ErrorCode::SchemaViolationExhausted,
       to_string(call.role) + " output failed schema '" + call.output_schema + "' after " +
           std::to_string(kMaxAttempts) + " attempts; last output: " + last_output);
}

}  // namespace chaoscycle
