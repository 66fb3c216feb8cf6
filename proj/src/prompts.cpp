#include "chaoscycle/gateway.hpp"

namespace chaoscycle {

namespace {

const char* kJsonOnly = " Respond with a single JSON object and nothing else.";

std::map<AgentRole, PromptTemplate> build_templates() {
  std::map<AgentRole, PromptTemplate> t;
  t[AgentRole::ContextSummarizer] = {
      "v1",
      std::string("You review Kubernetes manifests ahead of a chaos-engineering cycle. "
                  "Write one short summary per resource, in the given order, covering kind, "
                  "name, and the settings that matter for resilience.") +
          kJsonOnly + " Shape: {\"summaries\": [\"...\"]}"};
  t[AgentRole::IssueSpotter] = {
      "v1",
      std::string("You audit Kubernetes manifests for resilience and redundancy risks "
                  "(restart policies, replica counts, missing controllers, selector gaps). "
                  "List each potential issue as one sentence.") +
          kJsonOnly + " Shape: {\"issues\": [\"...\"]}"};
  t[AgentRole::AppGuesser] = {
      "v1",
      std::string("Given Kubernetes manifests, name the most likely application they "
                  "implement, in a few words.") +
          kJsonOnly + " Shape: {\"application\": \"...\"}"};
  t[AgentRole::PolicyFilter] = {
      "v1",
      std::string("You screen user instructions for a chaos-engineering tool that runs in "
                  "development environments only. Reject instructions that ask for "
                  "destructive actions outside the experiment scope, data exfiltration, "
                  "credential access, or targeting production systems. Otherwise return the "
                  "instructions with unsafe fragments removed.") +
          kJsonOnly +
          " Shape: {\"allowed\": true|false, \"reason\": \"...\", "
          "\"sanitized_instructions\": \"...\"}"};
  t[AgentRole::StateDrafter] = {
      "v1",
      std::string("Define one measurable steady state critical to the deployed system, not "
                  "duplicating the existing ones. Measure via the cluster API (pod_count or "
                  "ready_replica_count over a label selector) or via HTTP load "
                  "(success_rate or latency_p95_ms against a URL).") +
          kJsonOnly +
          " Shape: {\"name\": \"...\", \"description\": \"...\", \"probe\": {\"tool\": "
          "\"cluster_api\"|\"http_load\", \"selector\": {..}, \"namespace\": \"...\", "
          "\"url\": \"...\", \"virtual_users\": n, \"quantity\": \"...\", "
          "\"sample_interval_s\": n, \"duration_s\": n}}"};
  t[AgentRole::ProbeWriter] = {
      "v1",
      std::string("Write the inspection script that measures the given steady-state probe "
                  "(Python against the Kubernetes API, or a k6 JavaScript load script). The "
                  "script only measures and prints; it asserts nothing yet.") +
          kJsonOnly + " Shape: {\"script\": \"...\"}"};
  t[AgentRole::ThresholdSetter] = {
      "v1",
      std::string("Choose a threshold for the steady state from its baseline measurement. "
                  "The threshold must hold for the baseline itself. Comparators: eq, ge, "
                  "le, lt, gt. Aggregations: every_sample, final_sample, p95.") +
          kJsonOnly +
          " Shape: {\"comparator\": \"...\", \"value\": n, \"aggregation\": \"...\"}"};
  t[AgentRole::VaCBuilder] = {
      "v1",
      std::string("Extend the inspection script with threshold assertions so it becomes a "
                  "unit test that fails when the steady state is violated.") +
          kJsonOnly + " Shape: {\"script\": \"...\"}"};
  t[AgentRole::SufficiencyJudge] = {
      "v1",
      std::string("Decide whether the defined steady states already cover the system's "
                  "critical behavior or another one is needed.") +
          kJsonOnly + " Shape: {\"enough\": true|false, \"reason\": \"...\"}"};
  t[AgentRole::ScenarioDrafter] = {
      "v1",
      std::string("Propose a realistic failure scenario for this system (e.g. a traffic "
                  "surge or a cyberattack) and draft the fault sequence that simulates it. "
                  "Faults: PodChaos (pod-kill, pod-failure), NetworkChaos (delay, loss), "
                  "StressChaos (cpu).") +
          kJsonOnly +
          " Shape: {\"narrative\": \"...\", \"faults\": [{\"name\": \"...\", \"kind\": "
          "\"...\", \"subtype\": \"...\"}]}"};
  t[AgentRole::FaultRefiner] = {
      "v1",
      std::string("Refine each drafted fault with concrete parameters: a label selector "
                  "and namespace that match deployed resources, an injection mode (one, "
                  "all, fixed), and subtype parameters (kill_grace_s, delay_ms, loss_pct, "
                  "cpu_workers).") +
          kJsonOnly +
          " Shape: {\"faults\": [{\"name\": \"...\", \"kind\": \"...\", \"subtype\": "
          "\"...\", \"selector\": {\"labels\": {..}, \"namespace\": \"...\", \"mode\": "
          "\"...\", \"count\": n}, \"params\": {..}}]}"};
  t[AgentRole::StagePlanner] = {
      "v1",
      std::string("Split the chaos experiment into pre-validation, fault-injection, and "
                  "post-validation stages and set the duration of each in seconds, "
                  "honoring any total-duration constraint.") +
          kJsonOnly + " Shape: {\"pre_s\": n, \"fault_s\": n, \"post_s\": n}"};
  t[AgentRole::ItemScheduler] = {
      "v1",
      std::string("Schedule the VaC runs and fault injections inside the stages: every "
                  "steady state is validated in pre and post (and optionally during the "
                  "fault stage), every fault runs exactly once in the fault stage. Offsets "
                  "and durations are seconds within the stage.") +
          kJsonOnly +
          " Shape: {\"items\": [{\"stage\": \"pre\"|\"fault\"|\"post\", \"task\": "
          "\"run_vac\"|\"inject_fault\", \"ref\": \"...\", \"start_offset_s\": n, "
          "\"duration_s\": n}]}"};
  t[AgentRole::TimelineWriter] = {
      "v1",
      std::string("Write a concise prose summary of the experiment timeline for later "
                  "failure analysis.") +
          kJsonOnly + " Shape: {\"summary\": \"...\"}"};
  t[AgentRole::Replanner] = {
      "v1",
      std::string("The manifests changed after reconfiguration. Update only the probe "
                  "targets of the VaC scripts and the fault selectors so they resolve "
                  "against the new manifests. Keep everything else exactly as before.") +
          kJsonOnly +
          " Shape: {\"probes\": [{\"steady_state\": \"...\", \"probe\": {..}}], "
          "\"faults\": [{\"name\": \"...\", \"kind\": \"...\", \"subtype\": \"...\", "
          "\"selector\": {..}, \"params\": {..}}]}"};
  t[AgentRole::FailureAnalyst] = {
      "v1",
      std::string("Given the manifests, the experiment timeline, and the failed "
                  "validations with their logs, identify the causes and propose "
                  "countermeasures.") +
          kJsonOnly + " Shape: {\"causes\": [\"...\"], \"countermeasures\": [\"...\"]}"};
  t[AgentRole::Reconfigurer] = {
      "v1",
      std::string("Reconfigure the Kubernetes manifests so every VaC script passes during "
                  "the experiment. Increase redundancy gradually; do not repeat a "
                  "reconfiguration already tried in the history. Ops: replace or create "
                  "carry the full new file text, delete carries only the path.") +
          kJsonOnly +
          " Shape: {\"ops\": [{\"op\": \"replace\"|\"create\"|\"delete\", \"path\": "
          "\"...\", \"text\": \"...\"}], \"rationale\": \"...\"}"};
  t[AgentRole::Summarizer] = {
      "v1",
      std::string("Summarize the completed chaos-engineering cycle for the user: the "
                  "input system, every steady state by name, the failure scenario, the "
                  "experiment outcome, and the number of improvement loops.") +
          kJsonOnly + " Shape: {\"summary\": \"...\"}"};
  return t;
}

Json probe_schema() {
  return Json{
      {"type", "object"},
      {"required", Json::array({"tool", "quantity", "sample_interval_s", "duration_s"})},
      {"properties",
       Json{{"tool", Json{{"type", "string"}, {"enum", Json::array({"cluster_api", "http_load"})}}},
            {"selector", Json{{"type", "object"}}},
            {"namespace", Json{{"type", "string"}}},
            {"url", Json{{"type", "string"}}},
            {"virtual_users", Json{{"type", "integer"}, {"minimum", 1}}},
            {"quantity",
             Json{{"type", "string"},
                  {"enum", Json::array({"pod_count", "ready_replica_count", "success_rate",
                                        "latency_p95_ms"})}}},
            {"sample_interval_s", Json{{"type", "integer"}, {"minimum", 1}}},
            {"duration_s", Json{{"type", "integer"}, {"minimum", 1}}}}}};
}

Json fault_schema() {
  return Json{
      {"type", "object"},
      {"required", Json::array({"name", "kind", "subtype", "selector", "params"})},
      {"properties",
       Json{{"name", Json{{"type", "string"}, {"minLength", 1}}},
            {"kind",
             Json{{"type", "string"},
                  {"enum", Json::array({"PodChaos", "NetworkChaos", "StressChaos"})}}},
            {"subtype",
             Json{{"type", "string"},
                  {"enum", Json::array({"pod-kill", "pod-failure", "delay", "loss", "cpu"})}}},
            {"selector",
             Json{{"type", "object"},
                  {"required", Json::array({"labels", "namespace", "mode"})},
                  {"properties",
                   Json{{"labels", Json{{"type", "object"}}},
                        {"namespace", Json{{"type", "string"}}},
                        {"mode",
                         Json{{"type", "string"}, {"enum", Json::array({"one", "all", "fixed"})}}},
                        {"count", Json{{"type", "integer"}, {"minimum", 1}}}}}}},
            {"params", Json{{"type", "object"}}}}}};
}

std::map<std::string, Json> build_schemas() {
  std::map<std::string, Json> s;
  const Json string_array{{"type", "array"}, {"items", Json{{"type", "string"}}}};
  Json nonempty_string_array = string_array;
  nonempty_string_array["minItems"] = 1;
  const Json plain_string{{"type", "string"}};
  Json nonempty_string = plain_string;
  nonempty_string["minLength"] = 1;

  s["context_summaries.v1"] = Json{{"type", "object"},
                                   {"required", Json::array({"summaries"})},
                                   {"properties", Json{{"summaries", nonempty_string_array}}}};
  s["issue_list.v1"] = Json{{"type", "object"},
                            {"required", Json::array({"issues"})},
                            {"properties", Json{{"issues", string_array}}}};
  s["application_guess.v1"] = Json{{"type", "object"},
                                   {"required", Json::array({"application"})},
                                   {"properties", Json{{"application", nonempty_string}}}};
  s["policy_verdict.v1"] =
      Json{{"type", "object"},
           {"required", Json::array({"allowed", "reason", "sanitized_instructions"})},
           {"properties", Json{{"allowed", Json{{"type", "boolean"}}},
                               {"reason", plain_string},
                               {"sanitized_instructions", plain_string}}}};
  s["steady_state_draft.v1"] =
      Json{{"type", "object"},
           {"required", Json::array({"name", "description", "probe"})},
           {"properties", Json{{"name", nonempty_string},
                               {"description", plain_string},
                               {"probe", probe_schema()}}}};
  s["probe_script.v1"] = Json{{"type", "object"},
                              {"required", Json::array({"script"})},
                              {"properties", Json{{"script", nonempty_string}}}};
  s["threshold.v1"] =
      Json{{"type", "object"},
           {"required", Json::array({"comparator", "value", "aggregation"})},
           {"properties",
            Json{{"comparator",
                  Json{{"type", "string"}, {"enum", Json::array({"eq", "ge", "le", "lt", "gt"})}}},
                 {"value", Json{{"type", "number"}}},
                 {"aggregation",
                  Json{{"type", "string"},
                       {"enum", Json::array({"every_sample", "final_sample", "p95"})}}}}}};
  s["vac_script.v1"] = s["probe_script.v1"];
  s["sufficiency.v1"] = Json{{"type", "object"},
                             {"required", Json::array({"enough", "reason"})},
                             {"properties", Json{{"enough", Json{{"type", "boolean"}}},
                                                 {"reason", plain_string}}}};
  s["scenario_draft.v1"] =
      Json{{"type", "object"},
           {"required", Json::array({"narrative", "faults"})},
           {"properties",
            Json{{"narrative", nonempty_string},
                 {"faults",
                  Json{{"type", "array"},
                       {"minItems", 1},
                       {"items",
                        Json{{"type", "object"},
                             {"required", Json::array({"name", "kind", "subtype"})},
                             {"properties",
                              Json{{"name", nonempty_string},
                                   {"kind",
                                    Json{{"type", "string"},
                                         {"enum", Json::array({"PodChaos", "NetworkChaos",
                                                               "StressChaos"})}}},
                                   {"subtype", nonempty_string}}}}}}}}}};
  s["refined_faults.v1"] = Json{{"type", "object"},
                                {"required", Json::array({"faults"})},
                                {"properties", Json{{"faults", Json{{"type", "array"},
                                                                    {"minItems", 1},
                                                                    {"items", fault_schema()}}}}}};
  s["stage_durations.v1"] =
      Json{{"type", "object"},
           {"required", Json::array({"pre_s", "fault_s", "post_s"})},
           {"properties", Json{{"pre_s", Json{{"type", "integer"}, {"minimum", 1}}},
                               {"fault_s", Json{{"type", "integer"}, {"minimum", 1}}},
                               {"post_s", Json{{"type", "integer"}, {"minimum", 1}}}}}};
  s["schedule_items.v1"] =
      Json{{"type", "object"},
           {"required", Json::array({"items"})},
           {"properties",
            Json{{"items",
                  Json{{"type", "array"},
                       {"minItems", 1},
                       {"items",
                        Json{{"type", "object"},
                             {"required", Json::array({"stage", "task", "ref", "start_offset_s",
                                                       "duration_s"})},
                             {"properties",
                              Json{{"stage",
                                    Json{{"type", "string"},
                                         {"enum", Json::array({"pre", "fault", "post"})}}},
                                   {"task",
                                    Json{{"type", "string"},
                                         {"enum", Json::array({"run_vac", "inject_fault"})}}},
                                   {"ref", nonempty_string},
                                   {"start_offset_s", Json{{"type", "integer"}, {"minimum", 0}}},
                                   {"duration_s", Json{{"type", "integer"}, {"minimum", 1}}}}}}}}}}}};
  s["timeline_summary.v1"] = Json{{"type", "object"},
                                  {"required", Json::array({"summary"})},
                                  {"properties", Json{{"summary", nonempty_string}}}};
  s["replan_targets.v1"] =
      Json{{"type", "object"},
           {"required", Json::array({"probes", "faults"})},
           {"properties",
            Json{{"probes",
                  Json{{"type", "array"},
                       {"items", Json{{"type", "object"},
                                      {"required", Json::array({"steady_state", "probe"})},
                                      {"properties", Json{{"steady_state", nonempty_string},
                                                          {"probe", probe_schema()}}}}}}},
                 {"faults", Json{{"type", "array"}, {"items", fault_schema()}}}}}};
  s["analysis_report.v1"] =
      Json{{"type", "object"},
           {"required", Json::array({"causes", "countermeasures"})},
           {"properties", Json{{"causes", nonempty_string_array},
                               {"countermeasures", nonempty_string_array}}}};
  s["reconfiguration.v1"] =
      Json{{"type", "object"},
           {"required", Json::array({"ops", "rationale"})},
           {"properties",
            Json{{"ops",
                  Json{{"type", "array"},
                       {"minItems", 1},
                       {"items",
                        Json{{"type", "object"},
                             {"required", Json::array({"op", "path"})},
                             {"properties",
                              Json{{"op",
                                    Json{{"type", "string"},
                                         {"enum", Json::array({"replace", "create", "delete"})}}},
                                   {"path", nonempty_string},
                                   {"text", plain_string}}}}}}},
                 {"rationale", plain_string}}}};
  s["cycle_summary.v1"] = Json{{"type", "object"},
                               {"required", Json::array({"summary"})},
                               {"properties", Json{{"summary", nonempty_string}}}};
  return s;
}

}  // namespace

const PromptTemplate& prompt_template(AgentRole role) {
  static const auto templates = build_templates();
  return templates.at(role);
}

const Json& registered_schema(const std::string& id) {
  static const auto schemas = build_schemas();
  auto it = schemas.find(id);
  if (it == schemas.end())
    fail(ErrorCode::InvalidValue, "schema id '" + id + "' is not registered");
  return it->second;
}

std::string schema_id_for(AgentRole role) {
  switch (role) {
    case AgentRole::ContextSummarizer: return "context_summaries.v1";
    case AgentRole::IssueSpotter: return "issue_list.v1";
    case AgentRole::AppGuesser: return "application_guess.v1";
    case AgentRole::PolicyFilter: return "policy_verdict.v1";
    case AgentRole::StateDrafter: return "steady_state_draft.v1";
    case AgentRole::ProbeWriter: return "probe_script.v1";
    case AgentRole::ThresholdSetter: return "threshold.v1";
    case AgentRole::VaCBuilder: return "vac_script.v1";
    case AgentRole::SufficiencyJudge: return "sufficiency.v1";
    case AgentRole::ScenarioDrafter: return "scenario_draft.v1";
    case AgentRole::FaultRefiner: return "refined_faults.v1";
    case AgentRole::StagePlanner: return "stage_durations.v1";
    case AgentRole::ItemScheduler: return "schedule_items.v1";
    case AgentRole::TimelineWriter: return "timeline_summary.v1";
    case AgentRole::Replanner: return "replan_targets.v1";
    case AgentRole::FailureAnalyst: return "analysis_report.v1";
    case AgentRole::Reconfigurer: return "reconfiguration.v1";
    case AgentRole::Summarizer: return "cycle_summary.v1";
  }
  fail(ErrorCode::InvalidValue, "unmapped agent role");
}

}  // namespace chaoscycle
