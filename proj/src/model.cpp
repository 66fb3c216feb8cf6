#include "chaoscycle/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace chaoscycle {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::DuplicateResourceId: return "DuplicateResourceId";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::PathNotFound: return "PathNotFound";
    case ErrorCode::PathExists: return "PathExists";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaViolationExhausted: return "SchemaViolationExhausted";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::TranscriptMiss: return "TranscriptMiss";
    case ErrorCode::PolicyRejected: return "PolicyRejected";
    case ErrorCode::DuplicateStateExhausted: return "DuplicateStateExhausted";
    case ErrorCode::ThresholdInconsistent: return "ThresholdInconsistent";
    case ErrorCode::SelectorUnresolvableExhausted: return "SelectorUnresolvableExhausted";
    case ErrorCode::PlanInvalidExhausted: return "PlanInvalidExhausted";
    case ErrorCode::IntentChanged: return "IntentChanged";
    case ErrorCode::WorkflowUnsound: return "WorkflowUnsound";
    case ErrorCode::SelectorMatchesNothing: return "SelectorMatchesNothing";
    case ErrorCode::UnknownService: return "UnknownService";
    case ErrorCode::DeployFailed: return "DeployFailed";
    case ErrorCode::ReconfigInvalidExhausted: return "ReconfigInvalidExhausted";
    case ErrorCode::RepeatedReconfiguration: return "RepeatedReconfiguration";
    case ErrorCode::SummaryIncompleteExhausted: return "SummaryIncompleteExhausted";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "UnknownError";
}

// ---------------------------------------------------------------------------
// enum names

namespace {

[[noreturn]] void bad_enum(const char* what, const std::string& s) {
  fail(ErrorCode::InvalidValue, std::string("unknown ") + what + ": '" + s + "'");
}

}  // namespace

std::string to_string(ResourceKind k) {
  switch (k) {
    case ResourceKind::Pod: return "Pod";
    case ResourceKind::Deployment: return "Deployment";
    case ResourceKind::Service: return "Service";
    case ResourceKind::Other: return "Other";
  }
  return "Other";
}

ResourceKind resource_kind_from(const std::string& s) {
  if (s == "Pod") return ResourceKind::Pod;
  if (s == "Deployment") return ResourceKind::Deployment;
  if (s == "Service") return ResourceKind::Service;
  return ResourceKind::Other;
}

std::string to_string(RestartPolicy p) {
  switch (p) {
    case RestartPolicy::Always: return "Always";
    case RestartPolicy::OnFailure: return "OnFailure";
    case RestartPolicy::Never: return "Never";
  }
  return "Always";
}

RestartPolicy restart_policy_from(const std::string& s) {
  if (s == "Always") return RestartPolicy::Always;
  if (s == "OnFailure") return RestartPolicy::OnFailure;
  if (s == "Never") return RestartPolicy::Never;
  bad_enum("restartPolicy", s);
}

std::string to_string(ProbeTool t) {
  return t == ProbeTool::ClusterApi ? "cluster_api" : "http_load";
}

ProbeTool probe_tool_from(const std::string& s) {
  if (s == "cluster_api") return ProbeTool::ClusterApi;
  if (s == "http_load") return ProbeTool::HttpLoad;
  bad_enum("probe tool", s);
}

std::string to_string(ProbeQuantity q) {
  switch (q) {
    case ProbeQuantity::PodCount: return "pod_count";
    case ProbeQuantity::ReadyReplicaCount: return "ready_replica_count";
    case ProbeQuantity::SuccessRate: return "success_rate";
    case ProbeQuantity::LatencyP95Ms: return "latency_p95_ms";
  }
  return "pod_count";
}

ProbeQuantity probe_quantity_from(const std::string& s) {
  if (s == "pod_count") return ProbeQuantity::PodCount;
  if (s == "ready_replica_count") return ProbeQuantity::ReadyReplicaCount;
  if (s == "success_rate") return ProbeQuantity::SuccessRate;
  if (s == "latency_p95_ms") return ProbeQuantity::LatencyP95Ms;
  bad_enum("probe quantity", s);
}

std::string to_string(Comparator c) {
  switch (c) {
    case Comparator::EQ: return "eq";
    case Comparator::GE: return "ge";
    case Comparator::LE: return "le";
    case Comparator::LT: return "lt";
    case Comparator::GT: return "gt";
  }
  return "eq";
}

Comparator comparator_from(const std::string& s) {
  if (s == "eq") return Comparator::EQ;
  if (s == "ge") return Comparator::GE;
  if (s == "le") return Comparator::LE;
  if (s == "lt") return Comparator::LT;
  if (s == "gt") return Comparator::GT;
  bad_enum("comparator", s);
}

std::string to_string(Aggregation a) {
  switch (a) {
    case Aggregation::EverySample: return "every_sample";
    case Aggregation::FinalSample: return "final_sample";
    case Aggregation::P95: return "p95";
  }
  return "every_sample";
}

Aggregation aggregation_from(const std::string& s) {
  if (s == "every_sample") return Aggregation::EverySample;
  if (s == "final_sample") return Aggregation::FinalSample;
  if (s == "p95") return Aggregation::P95;
  bad_enum("aggregation", s);
}

std::string to_string(FaultKind k) {
  switch (k) {
    case FaultKind::PodChaos: return "PodChaos";
    case FaultKind::NetworkChaos: return "NetworkChaos";
    case FaultKind::StressChaos: return "StressChaos";
  }
  return "PodChaos";
}

FaultKind fault_kind_from(const std::string& s) {
  if (s == "PodChaos") return FaultKind::PodChaos;
  if (s == "NetworkChaos") return FaultKind::NetworkChaos;
  if (s == "StressChaos") return FaultKind::StressChaos;
  bad_enum("fault kind", s);
}

std::string to_string(SelectorMode m) {
  switch (m) {
    case SelectorMode::One: return "one";
    case SelectorMode::All: return "all";
    case SelectorMode::FixedCount: return "fixed";
  }
  return "one";
}

SelectorMode selector_mode_from(const std::string& s) {
  if (s == "one") return SelectorMode::One;
  if (s == "all") return SelectorMode::All;
  if (s == "fixed") return SelectorMode::FixedCount;
  bad_enum("selector mode", s);
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::Pre: return "pre";
    case Stage::Fault: return "fault";
    case Stage::Post: return "post";
  }
  return "pre";
}

Stage stage_from(const std::string& s) {
  if (s == "pre") return Stage::Pre;
  if (s == "fault") return Stage::Fault;
  if (s == "post") return Stage::Post;
  bad_enum("stage", s);
}

std::string to_string(TaskType t) {
  return t == TaskType::RunVaC ? "run_vac" : "inject_fault";
}

TaskType task_type_from(const std::string& s) {
  if (s == "run_vac") return TaskType::RunVaC;
  if (s == "inject_fault") return TaskType::InjectFault;
  bad_enum("task type", s);
}

std::string to_string(ReconfigOpKind k) {
  switch (k) {
    case ReconfigOpKind::Replace: return "replace";
    case ReconfigOpKind::Create: return "create";
    case ReconfigOpKind::Delete: return "delete";
  }
  return "replace";
}

ReconfigOpKind reconfig_op_kind_from(const std::string& s) {
  if (s == "replace") return ReconfigOpKind::Replace;
  if (s == "create") return ReconfigOpKind::Create;
  if (s == "delete") return ReconfigOpKind::Delete;
  bad_enum("reconfiguration op", s);
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::Pre: return "pre";
    case Phase::Hyp: return "hyp";
    case Phase::Expt: return "expt";
    case Phase::Anlys: return "anlys";
    case Phase::Imp: return "imp";
    case Phase::Post: return "post";
  }
  return "pre";
}

Phase phase_from(const std::string& s) {
  if (s == "pre") return Phase::Pre;
  if (s == "hyp") return Phase::Hyp;
  if (s == "expt") return Phase::Expt;
  if (s == "anlys") return Phase::Anlys;
  if (s == "imp") return Phase::Imp;
  if (s == "post") return Phase::Post;
  bad_enum("phase", s);
}

std::string to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::SatisfiedNoChange: return "satisfied_no_change";
    case OutcomeKind::SatisfiedAfterImprovement: return "satisfied_after_improvement";
    case OutcomeKind::Aborted: return "aborted";
  }
  return "aborted";
}

OutcomeKind outcome_kind_from(const std::string& s) {
  if (s == "satisfied_no_change") return OutcomeKind::SatisfiedNoChange;
  if (s == "satisfied_after_improvement") return OutcomeKind::SatisfiedAfterImprovement;
  if (s == "aborted") return OutcomeKind::Aborted;
  bad_enum("outcome", s);
}

// ---------------------------------------------------------------------------
// lookup helpers

const Resource* ManifestSet::find(const std::string& id) const {
  for (const auto& r : resources) {
    if (r.id() == id) return &r;
  }
  return nullptr;
}

const WorkflowNode* WorkflowManifest::find(const std::string& name) const {
  for (const auto& n : templates) {
    if (n.name == name) return &n;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// threshold evaluation

bool compare(Comparator cmp, double lhs, double rhs) {
  switch (cmp) {
    case Comparator::EQ: return lhs == rhs;
    case Comparator::GE: return lhs >= rhs;
    case Comparator::LE: return lhs <= rhs;
    case Comparator::LT: return lhs < rhs;
    case Comparator::GT: return lhs > rhs;
  }
  return false;
}

double percentile95(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::InvalidValue, "p95 of empty series");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<size_t>(std::ceil(0.95 * static_cast<double>(values.size())));
  return values[rank - 1];
}

double aggregate_samples(const std::vector<Sample>& samples, const Threshold& threshold) {
  if (samples.empty()) fail(ErrorCode::InvalidValue, "aggregate of empty measurement");
  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& s : samples) values.push_back(s.value);

  switch (threshold.aggregation) {
    case Aggregation::FinalSample:
      return values.back();
    case Aggregation::P95:
      return percentile95(values);
    case Aggregation::EverySample:
      break;
  }

  // Least favorable sample for the comparator, so that compare(aggregate)
  // is equivalent to comparing every sample.
  switch (threshold.comparator) {
    case Comparator::GE:
    case Comparator::GT:
      return *std::min_element(values.begin(), values.end());
    case Comparator::LE:
    case Comparator::LT:
      return *std::max_element(values.begin(), values.end());
    case Comparator::EQ: {
      double worst = values.front();
      double dist = -1.0;
      for (double v : values) {
        const double d = std::fabs(v - threshold.value);
        if (d > dist) {
          dist = d;
          worst = v;
        }
      }
      return worst;
    }
  }
  return values.front();
}

bool threshold_passes(const Threshold& threshold, const Measurement& m) {
  return compare(threshold.comparator, aggregate_samples(m.samples, threshold),
                 threshold.value);
}

// ---------------------------------------------------------------------------
// validation

namespace {

void check(bool ok, const std::string& message) {
  if (!ok) fail(ErrorCode::InvalidValue, message);
}

}  // namespace

void validate(const ProbeSpec& probe) {
  check(probe.sample_interval_s > 0, "probe sample_interval_s must be positive");
  check(probe.duration_s > 0, "probe duration_s must be positive");
  check(probe.duration_s >= probe.sample_interval_s,
        "probe duration_s must be >= sample_interval_s");
  if (probe.tool == ProbeTool::ClusterApi) {
    check(probe.quantity == ProbeQuantity::PodCount ||
              probe.quantity == ProbeQuantity::ReadyReplicaCount,
          "cluster_api probe measures pod_count or ready_replica_count");
    check(!probe.selector.empty(), "cluster_api probe needs a label selector");
    check(!probe.ns.empty(), "cluster_api probe needs a namespace");
  } else {
    check(probe.quantity == ProbeQuantity::SuccessRate ||
              probe.quantity == ProbeQuantity::LatencyP95Ms,
          "http_load probe measures success_rate or latency_p95_ms");
    check(!probe.url.empty(), "http_load probe needs a URL");
    check(probe.virtual_users >= 1, "http_load probe needs virtual_users >= 1");
  }
  for (const auto& [k, v] : probe.selector) {
    (void)v;
    check(!k.empty(), "selector label keys must be non-empty");
  }
}

void validate(const Threshold& threshold, ProbeQuantity quantity) {
  switch (quantity) {
    case ProbeQuantity::PodCount:
    case ProbeQuantity::ReadyReplicaCount:
      check(threshold.value >= 0.0, "count threshold must be >= 0");
      check(threshold.value == std::floor(threshold.value),
            "count threshold must be an integer value");
      break;
    case ProbeQuantity::SuccessRate:
      check(threshold.value >= 0.0 && threshold.value <= 1.0,
            "success-rate threshold must lie in [0,1]");
      break;
    case ProbeQuantity::LatencyP95Ms:
      check(threshold.value > 0.0, "latency threshold must be positive milliseconds");
      break;
  }
}

void validate(const Measurement& m, const Threshold& threshold) {
  check(!m.samples.empty(), "measurement must contain samples");
  for (size_t i = 1; i < m.samples.size(); ++i) {
    check(m.samples[i].offset_s > m.samples[i - 1].offset_s,
          "measurement offsets must be strictly increasing");
  }
  const double expected = aggregate_samples(m.samples, threshold);
  check(m.aggregate == expected,
        "measurement aggregate inconsistent with declared aggregation");
}

void validate(const VaCSpec& vac, const SteadyState& owner) {
  check(vac.steady_state_name == owner.name, "VaC must name its owning steady state");
  check(vac.probe == owner.probe, "VaC probe must equal the owning steady state's");
  check(vac.threshold == owner.threshold,
        "VaC threshold must equal the owning steady state's");
}

void validate(const SteadyState& state) {
  check(!state.name.empty(), "steady state needs a name");
  validate(state.probe);
  validate(state.threshold, state.probe.quantity);
  validate(state.baseline, state.threshold);
  check(threshold_passes(state.threshold, state.baseline),
        "steady state '" + state.name + "' threshold fails against its baseline");
  validate(state.vac, state);
}

void validate(const FaultSpec& fault) {
  check(!fault.name.empty(), "fault needs a name");
  for (const auto& [k, v] : fault.selector.labels) {
    (void)v;
    check(!k.empty(), "fault selector label keys must be non-empty");
  }
  check(!fault.selector.ns.empty(), "fault selector needs a namespace");
  if (fault.selector.mode == SelectorMode::FixedCount) {
    check(fault.selector.count >= 1, "fixed-count selector needs count >= 1");
  }
  switch (fault.kind) {
    case FaultKind::PodChaos:
      check(fault.subtype == "pod-kill" || fault.subtype == "pod-failure",
            "PodChaos subtype must be pod-kill or pod-failure");
      if (fault.params.kill_grace_s)
        check(*fault.params.kill_grace_s >= 0, "kill_grace_s must be >= 0");
      break;
    case FaultKind::NetworkChaos:
      check(fault.subtype == "delay" || fault.subtype == "loss",
            "NetworkChaos subtype must be delay or loss");
      if (fault.subtype == "delay") {
        check(fault.params.delay_ms.has_value() && *fault.params.delay_ms > 0,
              "delay fault needs delay_ms > 0");
      } else {
        check(fault.params.loss_pct.has_value() && *fault.params.loss_pct >= 0.0 &&
                  *fault.params.loss_pct <= 100.0,
              "loss fault needs loss_pct in [0,100]");
      }
      break;
    case FaultKind::StressChaos:
      check(fault.subtype == "cpu", "StressChaos subtype must be cpu");
      check(fault.params.cpu_workers.has_value() && *fault.params.cpu_workers >= 1,
            "cpu stress fault needs cpu_workers >= 1");
      break;
  }
}

void validate(const FailureScenario& scenario) {
  check(!scenario.faults.empty(), "failure scenario needs at least one fault");
  std::set<std::string> names;
  for (const auto& f : scenario.faults) {
    validate(f);
    check(names.insert(f.name).second, "duplicate fault name '" + f.name + "'");
  }
}

void validate(const Hypothesis& hypothesis) {
  check(!hypothesis.steady_states.empty(), "hypothesis needs steady states");
  std::set<std::string> names;
  for (const auto& s : hypothesis.steady_states) {
    validate(s);
    check(names.insert(s.name).second, "duplicate steady-state name '" + s.name + "'");
    check(hypothesis.statement.find(s.name) != std::string::npos,
          "hypothesis statement must reference steady state '" + s.name + "'");
  }
  validate(hypothesis.scenario);
}

void validate(const ScheduledItem& item, const ExperimentPlan& plan) {
  check(item.duration_s > 0, "scheduled item duration must be positive");
  check(item.start_offset_s >= 0, "scheduled item offset must be >= 0");
  const int stage_s = plan.stage_duration(item.stage);
  check(item.start_offset_s + item.duration_s <= stage_s,
        "scheduled item exceeds its stage duration");
  if (item.task == TaskType::RunVaC) {
    check(plan.vac.count(item.ref) == 1,
          "item references unknown steady state '" + item.ref + "'");
  } else {
    check(plan.faults.count(item.ref) == 1,
          "item references unknown fault '" + item.ref + "'");
    check(item.stage == Stage::Fault, "faults may only run in the fault stage");
  }
}

void validate(const ExperimentPlan& plan) {
  check(plan.pre_s > 0 && plan.fault_s > 0 && plan.post_s > 0,
        "stage durations must be positive");
  check(!plan.timeline_summary.empty(), "plan needs a timeline summary");

  std::map<std::string, int> fault_uses;
  std::set<std::string> pre_vac;
  std::set<std::string> post_vac;
  for (const auto& item : plan.items) {
    validate(item, plan);
    if (item.task == TaskType::InjectFault) {
      fault_uses[item.ref] += 1;
    } else if (item.stage == Stage::Pre) {
      pre_vac.insert(item.ref);
    } else if (item.stage == Stage::Post) {
      post_vac.insert(item.ref);
    }
  }
  for (const auto& [name, vac] : plan.vac) {
    (void)vac;
    check(pre_vac.count(name) == 1,
          "steady state '" + name + "' needs a pre-stage VaC item");
    check(post_vac.count(name) == 1,
          "steady state '" + name + "' needs a post-stage VaC item");
  }
  for (const auto& [name, fault] : plan.faults) {
    (void)fault;
    check(fault_uses[name] == 1,
          "fault '" + name + "' must appear exactly once in the fault stage");
  }

  // Offset groups must be serializable: under Serial+Suspend scheduling a
  // group may only start after the previous group has finished.
  for (Stage stage : {Stage::Pre, Stage::Fault, Stage::Post}) {
    std::map<int, int> group_end;  // offset -> max end
    for (const auto& item : plan.items) {
      if (item.stage != stage) continue;
      auto& end = group_end[item.start_offset_s];
      end = std::max(end, item.start_offset_s + item.duration_s);
    }
    int cursor = 0;
    for (const auto& [offset, end] : group_end) {
      check(offset >= cursor, "overlapping offset groups cannot be scheduled");
      cursor = end;
    }
  }
}

void validate(const WorkflowManifest& workflow) {
  auto bad = [](const std::string& message) {
    fail(ErrorCode::WorkflowUnsound, message);
  };
  if (workflow.templates.empty()) bad("workflow has no templates");
  std::set<std::string> names;
  for (const auto& n : workflow.templates) {
    if (!names.insert(n.name).second) bad("duplicate node name '" + n.name + "'");
  }
  if (!workflow.find(workflow.entry)) bad("entry node '" + workflow.entry + "' missing");
  for (const auto& n : workflow.templates) {
    for (const auto& c : n.children) {
      if (!workflow.find(c)) bad("node '" + n.name + "' references missing child '" + c + "'");
    }
  }
  // acyclicity via DFS from entry
  std::set<std::string> visiting;
  std::set<std::string> done;
  auto dfs = [&](auto&& self, const std::string& name) -> void {
    if (done.count(name)) return;
    if (!visiting.insert(name).second) bad("workflow contains a cycle at '" + name + "'");
    for (const auto& c : workflow.find(name)->children) self(self, c);
    visiting.erase(name);
    done.insert(name);
  };
  dfs(dfs, workflow.entry);
}

void validate(const Reconfiguration& reconf, const ManifestSet& current) {
  std::set<std::string> existing;
  for (const auto& p : current.file_order) existing.insert(p);
  for (const auto& op : reconf.ops) {
    check(!op.path.empty(), "reconfiguration op needs a path");
    switch (op.op) {
      case ReconfigOpKind::Replace:
      case ReconfigOpKind::Delete:
        if (!existing.count(op.path))
          fail(ErrorCode::PathNotFound, "no manifest at '" + op.path + "'");
        break;
      case ReconfigOpKind::Create:
        if (existing.count(op.path))
          fail(ErrorCode::PathExists, "manifest already exists at '" + op.path + "'");
        existing.insert(op.path);
        break;
    }
  }
}

LedgerRow CostLedger::totals() const {
  LedgerRow t;
  for (const auto& row : rows) {
    t.input_tokens += row.input_tokens;
    t.output_tokens += row.output_tokens;
    t.api_cost_usd += row.api_cost_usd;
    t.wall_time_s += row.wall_time_s;
  }
  return t;
}

CostLedger record_usage(const CostLedger& ledger, Phase phase, const Usage& usage) {
  CostLedger next = ledger;
  auto& row = next.rows[static_cast<int>(phase)];
  row.input_tokens += usage.input_tokens;
  row.output_tokens += usage.output_tokens;
  row.api_cost_usd += usage.cost_usd;
  row.wall_time_s += usage.wall_time_s;
  return next;
}

void validate(const CostLedger& ledger) {
  for (const auto& row : ledger.rows) {
    check(row.input_tokens >= 0 && row.output_tokens >= 0, "negative token count");
    check(row.api_cost_usd >= 0.0 && row.wall_time_s >= 0.0, "negative cost or time");
  }
}

void validate(const Resource& resource) {
  check(!resource.name.empty(), "resource needs a name");
  check(!resource.ns.empty(), "resource needs a namespace");
  check(!resource.kind_name.empty(), "resource needs a kind");
  for (const auto& [k, v] : resource.labels) {
    (void)v;
    check(!k.empty(), "label keys must be non-empty");
  }
  switch (resource.kind) {
    case ResourceKind::Deployment:
      check(resource.replicas.has_value() && *resource.replicas >= 1,
            "Deployment '" + resource.name + "' needs replicas >= 1");
      break;
    case ResourceKind::Service:
      check(!resource.selector.empty(),
            "Service '" + resource.name + "' needs a non-empty selector");
      break;
    default:
      break;
  }
}

void validate(const ManifestSet& set) {
  check(!set.resources.empty(), "manifest set must contain resources");
  std::set<std::string> ids;
  for (const auto& r : set.resources) {
    validate(r);
    if (!ids.insert(r.id()).second)
      fail(ErrorCode::DuplicateResourceId, "duplicate resource id '" + r.id() + "'");
    check(set.source_paths.count(r.id()) == 1,
          "resource '" + r.id() + "' missing a source path");
  }
}

}  // namespace chaoscycle
