#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaoscycle/errors.hpp"

// Shared domain types for the chaos-engineering cycle. Everything here is an
// immutable value object: mutation means building a new value, and every
// public construction path validates the type's invariants.

namespace chaoscycle {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// project input

struct ManifestFile {
  std::string path;  // relative path inside the project folder
  std::string text;  // raw document text, possibly multi-document
};

struct ProjectInput {
  std::vector<ManifestFile> manifests;
  std::string deploy_config;  // Skaffold-format text naming the manifests
  std::string instructions;   // optional free text
};

// ---------------------------------------------------------------------------
// resources

enum class ResourceKind { Pod, Deployment, Service, Other };
enum class RestartPolicy { Always, OnFailure, Never };

struct Resource {
  ResourceKind kind = ResourceKind::Other;
  std::string kind_name;  // verbatim kind string, also set for modeled kinds
  std::string name;
  std::string ns = "default";
  std::map<std::string, std::string> labels;
  Json doc;  // full document tree

  // Pod
  std::optional<RestartPolicy> restart_policy;
  // Deployment
  std::optional<int> replicas;
  std::map<std::string, std::string> pod_template_labels;
  // Service
  std::map<std::string, std::string> selector;
  std::optional<int> port;

  std::string id() const { return kind_name + "/" + ns + "/" + name; }
};

struct ManifestSet {
  std::vector<Resource> resources;                  // deploy order
  std::map<std::string, std::string> source_paths;  // resource id -> file path
  std::vector<std::string> file_order;              // deploy-config order
  std::map<std::string, std::string> file_texts;    // path -> raw text
  std::string deploy_api_version;  // apiVersion line preserved from input

  const Resource* find(const std::string& id) const;
};

// ---------------------------------------------------------------------------
// pre-processed context

struct ProcessedContext {
  std::vector<std::string> summaries;  // one per resource, deploy order
  std::vector<std::string> potential_issues;
  std::string application_guess;
  std::string sanitized_instructions;
  std::optional<std::string> rejection;  // policy-violation reason
};

// ---------------------------------------------------------------------------
// steady states

enum class ProbeTool { ClusterApi, HttpLoad };
enum class ProbeQuantity { PodCount, ReadyReplicaCount, SuccessRate, LatencyP95Ms };

struct ProbeSpec {
  ProbeTool tool = ProbeTool::ClusterApi;
  // ClusterApi target
  std::map<std::string, std::string> selector;
  std::string ns = "default";
  // HttpLoad target
  std::string url;
  int virtual_users = 0;

  ProbeQuantity quantity = ProbeQuantity::PodCount;
  int sample_interval_s = 1;
  int duration_s = 1;

  bool operator==(const ProbeSpec&) const = default;
};

enum class Comparator { EQ, GE, LE, LT, GT };
enum class Aggregation { EverySample, FinalSample, P95 };

struct Threshold {
  Comparator comparator = Comparator::GE;
  double value = 0.0;
  Aggregation aggregation = Aggregation::EverySample;

  bool operator==(const Threshold&) const = default;
};

struct Sample {
  int offset_s = 0;
  double value = 0.0;

  bool operator==(const Sample&) const = default;
};

struct Measurement {
  std::vector<Sample> samples;  // offsets strictly increasing
  double aggregate = 0.0;

  bool operator==(const Measurement&) const = default;
};

struct VaCSpec {
  std::string steady_state_name;
  ProbeSpec probe;      // identical to the owning steady state's
  Threshold threshold;  // likewise
  std::string script_text;  // generated probe script, never interpreted here
};

struct SteadyState {
  std::string name;
  std::string description;
  ProbeSpec probe;
  Measurement baseline;
  Threshold threshold;
  VaCSpec vac;
};

// ---------------------------------------------------------------------------
// faults

enum class FaultKind { PodChaos, NetworkChaos, StressChaos };
enum class SelectorMode { One, All, FixedCount };

struct FaultSelector {
  std::map<std::string, std::string> labels;
  std::string ns = "default";
  SelectorMode mode = SelectorMode::One;
  int count = 0;  // FixedCount only

  bool operator==(const FaultSelector&) const = default;
};

struct FaultParams {
  std::optional<int> delay_ms;      // NetworkChaos/delay
  std::optional<double> loss_pct;   // NetworkChaos/loss, [0,100]
  std::optional<int> cpu_workers;   // StressChaos/cpu
  std::optional<int> kill_grace_s;  // PodChaos/pod-kill

  bool operator==(const FaultParams&) const = default;
};

struct FaultSpec {
  FaultKind kind = FaultKind::PodChaos;
  std::string subtype;  // pod-kill | pod-failure | delay | loss | cpu
  FaultSelector selector;
  FaultParams params;
  std::string name;

  bool operator==(const FaultSpec&) const = default;
};

struct FailureScenario {
  std::string narrative;
  std::vector<FaultSpec> faults;  // ordered, non-empty
};

struct Hypothesis {
  std::vector<SteadyState> steady_states;
  FailureScenario scenario;
  std::string statement;  // references every steady-state name
};

// ---------------------------------------------------------------------------
// experiment plan

enum class Stage { Pre, Fault, Post };
enum class TaskType { RunVaC, InjectFault };

struct ScheduledItem {
  Stage stage = Stage::Pre;
  TaskType task = TaskType::RunVaC;
  std::string ref;  // steady-state name or fault name
  int start_offset_s = 0;
  int duration_s = 0;

  bool operator==(const ScheduledItem&) const = default;
};

struct ExperimentPlan {
  int pre_s = 0;
  int fault_s = 0;
  int post_s = 0;
  std::vector<ScheduledItem> items;
  // Resolved payloads the items refer to; replanning rewrites only the
  // probe targets / fault selectors inside these.
  std::map<std::string, VaCSpec> vac;
  std::map<std::string, FaultSpec> faults;
  std::string timeline_summary;

  int total_s() const { return pre_s + fault_s + post_s; }
  int stage_duration(Stage s) const {
    return s == Stage::Pre ? pre_s : s == Stage::Fault ? fault_s : post_s;
  }
};

struct WorkflowNode {
  std::string name;
  std::string template_type;  // Serial | Parallel | Suspend | PodChaos | ...
  int deadline_s = 0;
  std::vector<std::string> children;
  std::string payload_json;  // fault params or VaC reference, canonical JSON
};

struct WorkflowManifest {
  std::string entry;
  std::vector<WorkflowNode> templates;

  const WorkflowNode* find(const std::string& name) const;
};

// ---------------------------------------------------------------------------
// experiment results and analysis

struct ItemOutcome {
  ScheduledItem item;
  std::string node_name;
  bool passed = false;
  Measurement measurement;  // empty for InjectFault items
  std::string log;
};

struct ExperimentResult {
  std::vector<ItemOutcome> outcomes;  // one per scheduled item
  int started_s = 0;                  // simulated clock offsets
  int finished_s = 0;
};

struct AnalysisReport {
  std::vector<std::string> failed_items;
  std::vector<std::string> causes;
  std::vector<std::string> countermeasures;
};

// ---------------------------------------------------------------------------
// reconfiguration

enum class ReconfigOpKind { Replace, Create, Delete };

struct ReconfigOp {
  ReconfigOpKind op = ReconfigOpKind::Replace;
  std::string path;
  std::string text;  // unused for Delete

  bool operator==(const ReconfigOp&) const = default;
};

struct Reconfiguration {
  std::vector<ReconfigOp> ops;
  std::string rationale;
};

// ---------------------------------------------------------------------------
// cost ledger

enum class Phase { Pre, Hyp, Expt, Anlys, Imp, Post };
inline constexpr int kPhaseCount = 6;

struct Usage {
  long long input_tokens = 0;
  long long output_tokens = 0;
  double wall_time_s = 0.0;
  double cost_usd = 0.0;
};

struct LedgerRow {
  long long input_tokens = 0;
  long long output_tokens = 0;
  double api_cost_usd = 0.0;
  double wall_time_s = 0.0;
};

struct CostLedger {
  LedgerRow rows[kPhaseCount];

  LedgerRow totals() const;
};

CostLedger record_usage(const CostLedger& ledger, Phase phase, const Usage& usage);

// ---------------------------------------------------------------------------
// cycle record

enum class OutcomeKind { SatisfiedNoChange, SatisfiedAfterImprovement, Aborted };

struct CycleOutcome {
  OutcomeKind kind = OutcomeKind::SatisfiedNoChange;
  int loops = 0;       // SatisfiedAfterImprovement only
  std::string reason;  // Aborted only
};

struct LoopTrace {
  ExperimentPlan plan;
  WorkflowManifest workflow;
  ExperimentResult result;
  std::optional<AnalysisReport> report;
  std::optional<Reconfiguration> reconfiguration;
  ManifestSet set_after;
};

inline constexpr int kRecordSchemaVersion = 1;

struct CycleRecord {
  int schema_version = kRecordSchemaVersion;
  ProjectInput input;
  ProcessedContext context;
  std::optional<Hypothesis> hypothesis;
  std::vector<LoopTrace> loops;
  std::string summary;
  CostLedger ledger;
  CycleOutcome outcome;
};

// ---------------------------------------------------------------------------
// enum <-> string names (serialization and diagnostics)

std::string to_string(ResourceKind k);
std::string to_string(RestartPolicy p);
std::string to_string(ProbeTool t);
std::string to_string(ProbeQuantity q);
std::string to_string(Comparator c);
std::string to_string(Aggregation a);
std::string to_string(FaultKind k);
std::string to_string(SelectorMode m);
std::string to_string(Stage s);
std::string to_string(TaskType t);
std::string to_string(ReconfigOpKind k);
std::string to_string(Phase p);
std::string to_string(OutcomeKind k);

ResourceKind resource_kind_from(const std::string& s);
RestartPolicy restart_policy_from(const std::string& s);
ProbeTool probe_tool_from(const std::string& s);
ProbeQuantity probe_quantity_from(const std::string& s);
Comparator comparator_from(const std::string& s);
Aggregation aggregation_from(const std::string& s);
FaultKind fault_kind_from(const std::string& s);
SelectorMode selector_mode_from(const std::string& s);
Stage stage_from(const std::string& s);
TaskType task_type_from(const std::string& s);
ReconfigOpKind reconfig_op_kind_from(const std::string& s);
Phase phase_from(const std::string& s);
OutcomeKind outcome_kind_from(const std::string& s);

// ---------------------------------------------------------------------------
// validation. Each checks the spec'd invariants and throws
// CycleError(InvalidValue) on violation.

void validate(const ProbeSpec& probe);
void validate(const Threshold& threshold, ProbeQuantity quantity);
void validate(const Measurement& m, const Threshold& threshold);
void validate(const VaCSpec& vac, const SteadyState& owner);
void validate(const SteadyState& state);
void validate(const FaultSpec& fault);
void validate(const FailureScenario& scenario);
void validate(const Hypothesis& hypothesis);
void validate(const ScheduledItem& item, const ExperimentPlan& plan);
void validate(const ExperimentPlan& plan);
void validate(const WorkflowManifest& workflow);
void validate(const Reconfiguration& reconf, const ManifestSet& current);
void validate(const CostLedger& ledger);
void validate(const Resource& resource);
void validate(const ManifestSet& set);

// Threshold evaluation: true iff comparator(aggregate(samples), value) holds
// under the threshold's aggregation.
bool threshold_passes(const Threshold& threshold, const Measurement& m);

// Aggregate a sample series per the threshold's aggregation. EverySample
// reduces to the sample least favorable to the comparator so that comparing
// the aggregate is equivalent to comparing every sample.
double aggregate_samples(const std::vector<Sample>& samples, const Threshold& threshold);

bool compare(Comparator cmp, double lhs, double rhs);

// p95 by nearest-rank over the values (deterministic).
double percentile95(std::vector<double> values);

}  // namespace chaoscycle
