#include "chaoscycle/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "chaoscycle/model_json.hpp"
#include "chaoscycle/prompt_context.hpp"
#include "chaoscycle/yaml_doc.hpp"

namespace chaoscycle {

namespace {

AgentCall make_call(AgentRole role, std::map<std::string, std::string> context) {
  AgentCall call;
  call.role = role;
  call.prompt_context = std::move(context);
  call.output_schema = schema_id_for(role);
  return call;
}

std::string fmt_value(ProbeQuantity quantity, double value) {
  char buf[64];
  switch (quantity) {
    case ProbeQuantity::PodCount:
      snprintf(buf, sizeof(buf), "current pod count: %d", static_cast<int>(value));
      break;
    case ProbeQuantity::ReadyReplicaCount:
      snprintf(buf, sizeof(buf), "current ready replicas: %d", static_cast<int>(value));
      break;
    case ProbeQuantity::SuccessRate:
      snprintf(buf, sizeof(buf), "current success rate: %.2f", value);
      break;
    case ProbeQuantity::LatencyP95Ms:
      snprintf(buf, sizeof(buf), "current p95 latency: %.1f ms", value);
      break;
  }
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// planning

ExperimentPlan plan_experiment(const ProcessedContext& ctx, const Hypothesis& hypothesis,
                               std::optional<int> max_total_s, Gateway& gateway) {
  validate(hypothesis);

  const std::string constraint_text =
      max_total_s ? "total experiment duration must not exceed " +
                        std::to_string(*max_total_s) + " seconds"
                  : "none";

  ExperimentPlan plan;
  for (const auto& s : hypothesis.steady_states) plan.vac[s.name] = s.vac;
  for (const auto& f : hypothesis.scenario.faults) plan.faults[f.name] = f;

  // stage durations
  std::map<std::string, std::string> stage_context{
      {"hypothesis", hypothesis.statement},
      {"constraint", constraint_text},
      {"instructions", ctx.sanitized_instructions}};
  std::string problem;
  bool ok = false;
  for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
    auto call = make_call(AgentRole::StagePlanner, stage_context);
    const auto reply = gateway.complete_structured(call, Phase::Expt);
    plan.pre_s = reply.parsed.at("pre_s").get<int>();
    plan.fault_s = reply.parsed.at("fault_s").get<int>();
    plan.post_s = reply.parsed.at("post_s").get<int>();
    if (max_total_s && plan.total_s() > *max_total_s) {
      problem = "stage durations total " + std::to_string(plan.total_s()) +
                " s, above the " + std::to_string(*max_total_s) + " s constraint";
      stage_context["validation_feedback"] = problem;
    } else {
      ok = true;
    }
  }
  if (!ok) fail(ErrorCode::PlanInvalidExhausted, problem);

  // item schedule
  Json stages{{"pre_s", plan.pre_s}, {"fault_s", plan.fault_s}, {"post_s", plan.post_s}};
  Json probes = Json::object();
  for (const auto& [name, vac] : plan.vac) probes[name] = json_of(vac.probe);
  Json fault_names = Json::array();
  for (const auto& [name, fault] : plan.faults) {
    (void)fault;
    fault_names.push_back(name);
  }
  std::map<std::string, std::string> item_context{
      {"stages", stages.dump()},
      {"states", steady_states_brief(hypothesis.steady_states)},
      {"probes", probes.dump()},
      {"faults", fault_names.dump()}};
  ok = false;
  for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
    auto call = make_call(AgentRole::ItemScheduler, item_context);
    const auto reply = gateway.complete_structured(call, Phase::Expt);
    plan.items.clear();
    try {
      for (const auto& item : reply.parsed.at("items"))
        plan.items.push_back(scheduled_item_from_json(item));
      plan.timeline_summary = "pending";  // validated separately below
      validate(plan);
      ok = true;
    } catch (const std::exception& e) {
      problem = e.what();
      item_context["validation_feedback"] = problem;
    }
  }
  if (!ok) fail(ErrorCode::PlanInvalidExhausted, problem);

  // timeline summary
  Json items = Json::array();
  for (const auto& item : plan.items) items.push_back(json_of(item));
  auto timeline_call = make_call(AgentRole::TimelineWriter,
                                 {{"stages", stages.dump()}, {"items", items.dump()}});
  plan.timeline_summary = gateway.complete_structured(timeline_call, Phase::Expt)
                              .parsed.at("summary")
                              .get<std::string>();

  validate(plan);
  if (max_total_s && plan.total_s() > *max_total_s)
    fail(ErrorCode::PlanInvalidExhausted, "constraint violated after scheduling");
  return plan;
}

// ---------------------------------------------------------------------------
// compilation

namespace {

struct StageItems {
  Stage stage;
  std::string name;
  int duration_s = 0;
  std::vector<ScheduledItem> items;  // sorted by (offset, task, ref)
};

std::vector<StageItems> stage_split(const ExperimentPlan& plan) {
  std::vector<StageItems> stages{{Stage::Pre, "pre", plan.pre_s, {}},
                                 {Stage::Fault, "fault", plan.fault_s, {}},
                                 {Stage::Post, "post", plan.post_s, {}}};
  for (const auto& item : plan.items)
    stages[static_cast<int>(item.stage)].items.push_back(item);
  for (auto& stage : stages) {
    std::sort(stage.items.begin(), stage.items.end(),
              [](const ScheduledItem& a, const ScheduledItem& b) {
                return std::tuple(a.start_offset_s, static_cast<int>(a.task), a.ref) <
                       std::tuple(b.start_offset_s, static_cast<int>(b.task), b.ref);
              });
  }
  return stages;
}

std::string leaf_type(const ExperimentPlan& plan, const ScheduledItem& item) {
  if (item.task == TaskType::RunVaC) return "Task";
  return to_string(plan.faults.at(item.ref).kind);
}

}  // namespace

WorkflowManifest compile_workflow(const ExperimentPlan& plan) {
  validate(plan);
  WorkflowManifest workflow;
  workflow.entry = "entry";

  WorkflowNode entry{"entry", "Serial", plan.total_s(), {"pre", "fault", "post"}, ""};
  std::vector<WorkflowNode> nodes;

  for (const auto& stage : stage_split(plan)) {
    WorkflowNode stage_node{stage.name, "Serial", stage.duration_s, {}, ""};
    int cursor = 0;
    int suspend_index = 0;
    int group_index = 0;
    int leaf_index = 0;
    for (size_t i = 0; i < stage.items.size();) {
      const int offset = stage.items[i].start_offset_s;
      if (offset > cursor) {
        WorkflowNode suspend{stage.name + "-suspend-" + std::to_string(suspend_index++),
                             "Suspend", offset - cursor, {}, ""};
        stage_node.children.push_back(suspend.name);
        nodes.push_back(std::move(suspend));
        cursor = offset;
      }
      WorkflowNode group{stage.name + "-group-" + std::to_string(group_index++),
                         "Parallel", 0, {}, ""};
      int group_end = offset;
      while (i < stage.items.size() && stage.items[i].start_offset_s == offset) {
        const auto& item = stage.items[i];
        const std::string task_tag = item.task == TaskType::RunVaC ? "vac" : "inject";
        WorkflowNode leaf{stage.name + "-" + task_tag + "-" + std::to_string(leaf_index++),
                          leaf_type(plan, item), item.duration_s, {}, ""};
        if (item.task == TaskType::RunVaC) {
          leaf.payload_json = Json{{"vac", json_of(plan.vac.at(item.ref))}}.dump();
        } else {
          leaf.payload_json = Json{{"fault", json_of(plan.faults.at(item.ref))}}.dump();
        }
        group.children.push_back(leaf.name);
        group.deadline_s = std::max(group.deadline_s, item.duration_s);
        group_end = std::max(group_end, offset + item.duration_s);
        nodes.push_back(std::move(leaf));
        ++i;
      }
      stage_node.children.push_back(group.name);
      nodes.push_back(std::move(group));
      cursor = group_end;
    }
    workflow.templates.push_back(std::move(stage_node));
  }

  workflow.templates.insert(workflow.templates.begin(), std::move(entry));
  for (auto& node : nodes) workflow.templates.push_back(std::move(node));
  validate(workflow);
  return workflow;
}

namespace {

Json selector_doc(const FaultSelector& sel) {
  Json labels = Json::object();
  for (const auto& [k, v] : sel.labels) labels[k] = v;
  return Json{{"namespaces", Json::array({sel.ns})}, {"labelSelectors", labels}};
}

std::string chaos_mode(const FaultSelector& sel) {
  switch (sel.mode) {
    case SelectorMode::One: return "one";
    case SelectorMode::All: return "all";
    case SelectorMode::FixedCount: return "fixed";
  }
  return "one";
}

Json chaos_payload(const FaultSpec& fault) {
  Json doc{{"selector", selector_doc(fault.selector)}, {"mode", chaos_mode(fault.selector)}};
  if (fault.selector.mode == SelectorMode::FixedCount)
    doc["value"] = std::to_string(fault.selector.count);
  switch (fault.kind) {
    case FaultKind::PodChaos:
      doc["action"] = fault.subtype;
      if (fault.params.kill_grace_s) doc["gracePeriod"] = *fault.params.kill_grace_s;
      break;
    case FaultKind::NetworkChaos:
      doc["action"] = fault.subtype;
      if (fault.subtype == "delay")
        doc["delay"] = Json{{"latency", std::to_string(fault.params.delay_ms.value_or(0)) + "ms"}};
      else
        doc["loss"] = Json{{"loss", Json(*fault.params.loss_pct).dump()}};
      break;
    case FaultKind::StressChaos:
      doc["stressors"] =
          Json{{"cpu", Json{{"workers", fault.params.cpu_workers.value_or(1)}}}};
      break;
  }
  return doc;
}

}  // namespace

std::string workflow_to_chaos_mesh_yaml(const WorkflowManifest& workflow) {
  Json templates = Json::array();
  for (const auto& node : workflow.templates) {
    Json t{{"name", node.name},
           {"templateType", node.template_type},
           {"deadline", std::to_string(node.deadline_s) + "s"}};
    if (!node.children.empty()) t["children"] = node.children;
    if (!node.payload_json.empty()) {
      const Json payload = Json::parse(node.payload_json);
      if (payload.contains("fault")) {
        const FaultSpec fault = fault_spec_from_json(payload.at("fault"));
        const std::string key = node.template_type == "PodChaos"     ? "podChaos"
                                : node.template_type == "NetworkChaos" ? "networkChaos"
                                                                        : "stressChaos";
        t[key] = chaos_payload(fault);
      } else if (payload.contains("vac")) {
        const VaCSpec vac = vac_spec_from_json(payload.at("vac"));
        t["task"] = Json{
            {"container",
             Json{{"name", "vac-" + vac.steady_state_name},
                  {"image", "vac-runner:latest"},
                  {"command", Json::array({"run-vac", vac.steady_state_name})}}}};
      }
    }
    templates.push_back(std::move(t));
  }
  const Json doc{{"apiVersion", "chaos-mesh.org/v1alpha1"},
                 {"kind", "Workflow"},
                 {"metadata", Json{{"name", "chaos-experiment"}}},
                 {"spec", Json{{"entry", workflow.entry}, {"templates", templates}}}};
  return emit_yaml(doc);
}

// ---------------------------------------------------------------------------
// replanning

namespace {

// Fields other than the target (selector/namespace/url) must be untouched.
std::string probe_intent_change(const ProbeSpec& before, const ProbeSpec& after) {
  if (before.tool != after.tool) return "tool";
  if (before.quantity != after.quantity) return "quantity";
  if (before.sample_interval_s != after.sample_interval_s) return "sample_interval_s";
  if (before.duration_s != after.duration_s) return "duration_s";
  if (before.virtual_users != after.virtual_users) return "virtual_users";
  return "";
}

std::string fault_intent_change(const FaultSpec& before, const FaultSpec& after) {
  if (before.kind != after.kind) return "kind";
  if (before.subtype != after.subtype) return "subtype";
  if (!(before.params == after.params)) return "params";
  if (before.selector.mode != after.selector.mode) return "selector mode";
  if (before.selector.count != after.selector.count) return "selector count";
  return "";
}

}  // namespace

ExperimentPlan replan_experiment(const ExperimentPlan& prev_plan, const ManifestSet& old_set,
                                 const ManifestSet& new_set, Gateway& gateway) {
  const ChangeSet changes = diff_manifest_sets(old_set, new_set);
  if (changes.empty())
    fail(ErrorCode::InvalidValue, "replanning requires a non-empty manifest diff");

  Json change_doc{{"added", changes.added}, {"removed", changes.removed}};
  Json modified = Json::array();
  for (const auto& m : changes.modified) modified.push_back(m.path);
  change_doc["modified"] = modified;

  Json current_probes = Json::object();
  for (const auto& [name, vac] : prev_plan.vac) current_probes[name] = json_of(vac.probe);
  std::vector<FaultSpec> prev_faults;
  for (const auto& [name, fault] : prev_plan.faults) {
    (void)name;
    prev_faults.push_back(fault);
  }

  std::map<std::string, std::string> context{
      {"old_resources", resources_overview(old_set)},
      {"new_resources", resources_overview(new_set)},
      {"changes", change_doc.dump()},
      {"current_probes", current_probes.dump()},
      {"current_faults", faults_text(prev_faults)}};

  std::string problem;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto call = make_call(AgentRole::Replanner, context);
    const auto reply = gateway.complete_structured(call, Phase::Expt);

    ExperimentPlan plan = prev_plan;
    problem.clear();
    try {
      for (const auto& p : reply.parsed.at("probes")) {
        const auto name = p.at("steady_state").get<std::string>();
        auto it = plan.vac.find(name);
        if (it == plan.vac.end()) {
          problem = "unknown steady state '" + name + "'";
          break;
        }
        ProbeSpec next = probe_spec_from_json(p.at("probe"));
        const auto changed = probe_intent_change(it->second.probe, next);
        if (!changed.empty())
          fail(ErrorCode::IntentChanged,
               "replan altered probe " + changed + " of '" + name + "'");
        validate(next);
        it->second.probe = next;
      }
      if (!problem.empty()) {
        context["validation_feedback"] = problem;
        continue;
      }
      for (const auto& f : reply.parsed.at("faults")) {
        FaultSpec next = fault_spec_from_json(f);
        auto it = plan.faults.find(next.name);
        if (it == plan.faults.end()) {
          problem = "unknown fault '" + next.name + "'";
          break;
        }
        const auto changed = fault_intent_change(it->second, next);
        if (!changed.empty())
          fail(ErrorCode::IntentChanged,
               "replan altered fault " + changed + " of '" + next.name + "'");
        validate(next);
        it->second.selector = next.selector;
      }
      if (!problem.empty()) {
        context["validation_feedback"] = problem;
        continue;
      }
      // updated targets must resolve against the new manifests
      for (const auto& [name, vac] : plan.vac) {
        if (vac.probe.tool == ProbeTool::ClusterApi &&
            resolve_selector(new_set, vac.probe.selector, vac.probe.ns).empty()) {
          problem = "probe of '" + name + "' matches nothing in the new manifests";
          break;
        }
      }
      for (const auto& [name, fault] : plan.faults) {
        if (!problem.empty()) break;
        if (resolve_selector(new_set, fault.selector.labels, fault.selector.ns).empty())
          problem = "fault '" + name + "' selector matches nothing in the new manifests";
      }
    } catch (const CycleError&) {
      throw;  // IntentChanged is final, not retried
    } catch (const std::exception& e) {
      problem = e.what();
    }

    if (problem.empty()) {
      validate(plan);
      return plan;
    }
    context["validation_feedback"] = problem;
  }
  fail(ErrorCode::SelectorUnresolvableExhausted, problem);
}

// ---------------------------------------------------------------------------
// execution

namespace {

struct RuntimeItem {
  ScheduledItem item;
  std::string node_name;
  int abs_start_s = 0;
  VaCSpec vac;      // RunVaC payload
  FaultSpec fault;  // InjectFault payload
};

std::vector<RuntimeItem> decompile(const WorkflowManifest& workflow, int stage_starts[3],
                                   int stage_durations[3]) {
  validate(workflow);
  const WorkflowNode* entry = workflow.find(workflow.entry);
  if (entry->children.size() != 3)
    fail(ErrorCode::WorkflowUnsound, "entry must have exactly three stage children");

  std::vector<RuntimeItem> items;
  int stage_start = 0;
  for (int s = 0; s < 3; ++s) {
    const WorkflowNode* stage_node = workflow.find(entry->children[s]);
    stage_starts[s] = stage_start;
    stage_durations[s] = stage_node->deadline_s;
    int cursor = 0;
    for (const auto& child_name : stage_node->children) {
      const WorkflowNode* child = workflow.find(child_name);
      if (child->template_type == "Suspend") {
        cursor += child->deadline_s;
        continue;
      }
      std::vector<const WorkflowNode*> leaves;
      if (child->template_type == "Parallel") {
        for (const auto& leaf_name : child->children)
          leaves.push_back(workflow.find(leaf_name));
      } else {
        leaves.push_back(child);
      }
      int group_end = cursor;
      for (const WorkflowNode* leaf : leaves) {
        if (leaf->payload_json.empty())
          fail(ErrorCode::WorkflowUnsound, "leaf '" + leaf->name + "' carries no payload");
        const Json payload = Json::parse(leaf->payload_json);
        RuntimeItem rt;
        rt.node_name = leaf->name;
        rt.abs_start_s = stage_start + cursor;
        rt.item.stage = static_cast<Stage>(s);
        rt.item.start_offset_s = cursor;
        rt.item.duration_s = leaf->deadline_s;
        if (payload.contains("vac")) {
          rt.item.task = TaskType::RunVaC;
          rt.vac = vac_spec_from_json(payload.at("vac"));
          rt.item.ref = rt.vac.steady_state_name;
        } else if (payload.contains("fault")) {
          rt.item.task = TaskType::InjectFault;
          rt.fault = fault_spec_from_json(payload.at("fault"));
          rt.item.ref = rt.fault.name;
        } else {
          fail(ErrorCode::WorkflowUnsound, "leaf '" + leaf->name + "' payload unrecognized");
        }
        group_end = std::max(group_end, cursor + leaf->deadline_s);
        items.push_back(std::move(rt));
      }
      cursor = group_end;
    }
    if (cursor > stage_node->deadline_s)
      fail(ErrorCode::WorkflowUnsound,
           "stage '" + stage_node->name + "' children exceed its deadline");
    stage_start += stage_node->deadline_s;
  }
  return items;
}

}  // namespace

ExperimentResult execute_experiment(const WorkflowManifest& workflow, Cluster& cluster) {
  int stage_starts[3] = {0, 0, 0};
  int stage_durations[3] = {0, 0, 0};
  auto items = decompile(workflow, stage_starts, stage_durations);
  const int total = stage_durations[0] + stage_durations[1] + stage_durations[2];

  struct VaCRun {
    size_t item_index;
    Measurement measurement;
    std::string log;
    bool errored = false;
  };
  std::vector<VaCRun> runs;
  std::vector<std::pair<size_t, std::string>> injections;  // item index -> log
  std::vector<bool> injection_ok(items.size(), false);
  for (size_t i = 0; i < items.size(); ++i) {
    if (items[i].item.task == TaskType::RunVaC) runs.push_back({i, {}, "", false});
  }

  const int base_clock = cluster.clock_s();
  for (int t = 0; t < total; ++t) {
    // faults scheduled at this tick go first so probes observe them
    for (size_t i = 0; i < items.size(); ++i) {
      auto& rt = items[i];
      if (rt.item.task != TaskType::InjectFault || rt.abs_start_s != t) continue;
      try {
        cluster.inject_fault(rt.fault, rt.item.duration_s);
        injection_ok[i] = true;
        injections.emplace_back(i, "fault '" + rt.fault.name + "' injected at t=" +
                                       std::to_string(t) + "s");
      } catch (const CycleError& e) {
        injection_ok[i] = false;
        injections.emplace_back(i, e.what());
      }
    }
    for (auto& run : runs) {
      auto& rt = items[run.item_index];
      if (run.errored) continue;
      const int rel = t - rt.abs_start_s;
      if (rel < 0 || rel >= rt.item.duration_s) continue;
      if (rel % rt.vac.probe.sample_interval_s != 0) continue;
      try {
        const double value = cluster.sample_value(rt.vac.probe);
        run.measurement.samples.push_back({rel, value});
        run.log += fmt_value(rt.vac.probe.quantity, value) + "\n";
      } catch (const CycleError& e) {
        run.errored = true;
        run.log += std::string(e.what()) + "\n";
      }
    }
    cluster.step(1);
  }

  ExperimentResult result;
  result.started_s = base_clock;
  result.finished_s = base_clock + total;
  for (size_t i = 0; i < items.size(); ++i) {
    const auto& rt = items[i];
    ItemOutcome outcome;
    outcome.item = rt.item;
    outcome.node_name = rt.node_name;
    if (rt.item.task == TaskType::InjectFault) {
      outcome.passed = injection_ok[i];
      for (const auto& [idx, log] : injections)
        if (idx == i) outcome.log = log;
    } else {
      for (auto& run : runs) {
        if (run.item_index != i) continue;
        outcome.measurement = run.measurement;
        outcome.log = run.log;
        if (run.errored || run.measurement.samples.empty()) {
          outcome.passed = false;
          outcome.log += rt.vac.steady_state_name + ": probe failed\n";
        } else {
          outcome.measurement.aggregate =
              aggregate_samples(run.measurement.samples, rt.vac.threshold);
          outcome.passed = compare(rt.vac.threshold.comparator,
                                   outcome.measurement.aggregate, rt.vac.threshold.value);
          if (outcome.passed) {
            outcome.log += rt.vac.steady_state_name + ": threshold satisfied\n";
          } else {
            outcome.log += rt.vac.steady_state_name + ": threshold " +
                           to_string(rt.vac.threshold.comparator) + " " +
                           Json(rt.vac.threshold.value).dump() + " violated (aggregate " +
                           Json(outcome.measurement.aggregate).dump() + ")\n";
          }
        }
      }
    }
    result.outcomes.push_back(std::move(outcome));
  }
  return result;
}

}  // namespace chaoscycle
