#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "chaoscycle/model.hpp"

// Uniform LLM-agent invocation: schema-constrained structured output with
// bounded retries, token/cost accounting, and two backends (HTTP
// chat-completions and deterministic transcript replay).

namespace chaoscycle {

enum class AgentRole {
  ContextSummarizer,
  IssueSpotter,
  AppGuesser,
  PolicyFilter,
  StateDrafter,
  ProbeWriter,
  ThresholdSetter,
  VaCBuilder,
  SufficiencyJudge,
  ScenarioDrafter,
  FaultRefiner,
  StagePlanner,
  ItemScheduler,
  TimelineWriter,
  Replanner,
  FailureAnalyst,
  Reconfigurer,
  Summarizer,
};

std::string to_string(AgentRole role);
AgentRole agent_role_from(const std::string& s);

struct AgentCall {
  AgentRole role = AgentRole::ContextSummarizer;
  std::map<std::string, std::string> prompt_context;  // key -> text
  std::string output_schema;                          // registered schema id
  double temperature = 0.0;
};

struct AgentReply {
  Json parsed;
  Usage usage;       // summed over attempts
  int attempts = 1;  // <= kMaxAttempts
};

inline constexpr int kMaxAttempts = 3;

// --- prompt registry --------------------------------------------------------

struct PromptTemplate {
  std::string version;      // folded into the transcript digest
  std::string system_text;  // role instructions
};

const PromptTemplate& prompt_template(AgentRole role);

// Output schema for a role, plus the id it is registered under. Throws on
// unknown ids.
const Json& registered_schema(const std::string& id);
std::string schema_id_for(AgentRole role);

// Renders the user prompt from the context map (sorted keys, stable form).
std::string render_user_prompt(const std::map<std::string, std::string>& context);

// FNV-1a 64-bit digest over role, template version and the context map;
// pins the transcript entries to the exact prompts.
std::string context_digest(AgentRole role, const std::map<std::string, std::string>& context);

// --- backends ----------------------------------------------------------------

struct BackendRequest {
  AgentRole role;
  int attempt = 1;
  std::string digest;
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.0;
  // Structured view of the prompt for deterministic stand-in backends; the
  // HTTP and replay backends only read the rendered prompts above.
  std::map<std::string, std::string> context;
};

struct BackendResult {
  std::string output_text;
  long long input_tokens = 0;
  long long output_tokens = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendResult complete(const BackendRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct HttpBackendConfig {
  std::string base_url;     // e.g. http://localhost:8080/v1
  std::string api_key;      // resolved from the configured environment variable
  std::string model;
  int timeout_s = 120;
};

// Chat-completions-style client. Sends system+user messages, expects a JSON
// body in choices[0].message.content and token counts under usage.
std::unique_ptr<Backend> make_http_backend(const HttpBackendConfig& config);

// Deterministic replay backend over a JSON-lines transcript; one object per
// line: {"role": ..., "attempt": N, "context_digest": ..., "output": <json>}.
// Token counts are deterministic size estimates.
std::unique_ptr<Backend> make_replay_backend(const std::string& transcript_path);

// Wraps another backend and appends every served entry to a transcript file
// in replay format.
std::unique_ptr<Backend> make_recording_backend(std::unique_ptr<Backend> inner,
                                                const std::string& transcript_path);

// Deterministic token estimate used by the replay backend (ceil len/4).
long long estimate_tokens(const std::string& text);

// --- usage recording -----------------------------------------------------------

struct PriceConfig {
  double price_in_per_1k = 0.0;   // USD per 1000 input tokens
  double price_out_per_1k = 0.0;  // USD per 1000 output tokens
};

// Serialized single-writer ledger recorder; phase attribution is supplied by
// the caller, never ambient.
class UsageRecorder {
 public:
  void record(Phase phase, const Usage& usage);
  CostLedger ledger() const;

 private:
  mutable std::mutex mutex_;
  CostLedger ledger_;
};

// --- gateway ---------------------------------------------------------------------

class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, PriceConfig prices,
          std::shared_ptr<UsageRecorder> recorder);

  // Runs the call with up to kMaxAttempts schema-validation retries, records
  // usage under the given phase, and returns the conforming reply. Throws
  // SchemaViolationExhausted, BackendUnavailable, TranscriptMiss, or
  // PolicyRejected (PolicyFilter role answering allowed=false).
  AgentReply complete_structured(const AgentCall& call, Phase phase);

  const std::shared_ptr<UsageRecorder>& recorder() const { return recorder_; }

 private:
  std::shared_ptr<Backend> backend_;
  PriceConfig prices_;
  std::shared_ptr<UsageRecorder> recorder_;
};

}  // namespace chaoscycle
