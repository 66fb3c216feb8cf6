#include "chaoscycle/model_json.hpp"

namespace chaoscycle {

namespace {

Json string_map_json(const std::map<std::string, std::string>& m) {
  Json j = Json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

std::map<std::string, std::string> string_map_from(const Json& j) {
  std::map<std::string, std::string> m;
  for (auto it = j.begin(); it != j.end(); ++it) m[it.key()] = it.value().get<std::string>();
  return m;
}

}  // namespace

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

// --- project input ---------------------------------------------------------

Json json_of(const ProjectInput& v) {
  Json files = Json::array();
  for (const auto& f : v.manifests) files.push_back(Json{{"path", f.path}, {"text", f.text}});
  return Json{{"manifests", files},
              {"deploy_config", v.deploy_config},
              {"instructions", v.instructions}};
}

ProjectInput project_input_from_json(const Json& j) {
  ProjectInput v;
  for (const auto& f : j.at("manifests")) {
    v.manifests.push_back({f.at("path").get<std::string>(), f.at("text").get<std::string>()});
  }
  v.deploy_config = j.at("deploy_config").get<std::string>();
  v.instructions = j.value("instructions", std::string{});
  return v;
}

// --- resources -------------------------------------------------------------

Json json_of(const Resource& v) {
  Json j{{"kind", v.kind_name},
         {"name", v.name},
         {"namespace", v.ns},
         {"labels", string_map_json(v.labels)},
         {"doc", v.doc}};
  if (v.restart_policy) j["restart_policy"] = to_string(*v.restart_policy);
  if (v.replicas) j["replicas"] = *v.replicas;
  if (!v.pod_template_labels.empty())
    j["pod_template_labels"] = string_map_json(v.pod_template_labels);
  if (!v.selector.empty()) j["selector"] = string_map_json(v.selector);
  if (v.port) j["port"] = *v.port;
  return j;
}

Json json_of(const ManifestSet& v) {
  Json resources = Json::array();
  for (const auto& r : v.resources) resources.push_back(json_of(r));
  Json files = Json::array();
  for (const auto& p : v.file_order)
    files.push_back(Json{{"path", p}, {"text", v.file_texts.at(p)}});
  return Json{{"resources", resources},
              {"source_paths", string_map_json(v.source_paths)},
              {"files", files},
              {"deploy_api_version", v.deploy_api_version}};
}

namespace {

Resource resource_from_json(const Json& j) {
  Resource r;
  r.kind_name = j.at("kind").get<std::string>();
  r.kind = resource_kind_from(r.kind_name);
  r.name = j.at("name").get<std::string>();
  r.ns = j.at("namespace").get<std::string>();
  r.labels = string_map_from(j.at("labels"));
  r.doc = j.at("doc");
  if (j.contains("restart_policy"))
    r.restart_policy = restart_policy_from(j.at("restart_policy").get<std::string>());
  if (j.contains("replicas")) r.replicas = j.at("replicas").get<int>();
  if (j.contains("pod_template_labels"))
    r.pod_template_labels = string_map_from(j.at("pod_template_labels"));
  if (j.contains("selector")) r.selector = string_map_from(j.at("selector"));
  if (j.contains("port")) r.port = j.at("port").get<int>();
  return r;
}

}  // namespace

ManifestSet manifest_set_from_json(const Json& j) {
  ManifestSet v;
  for (const auto& r : j.at("resources")) v.resources.push_back(resource_from_json(r));
  v.source_paths = string_map_from(j.at("source_paths"));
  for (const auto& f : j.at("files")) {
    const auto path = f.at("path").get<std::string>();
    v.file_order.push_back(path);
    v.file_texts[path] = f.at("text").get<std::string>();
  }
  v.deploy_api_version = j.value("deploy_api_version", std::string{});
  return v;
}

// --- processed context -----------------------------------------------------

Json json_of(const ProcessedContext& v) {
  Json j{{"summaries", v.summaries},
         {"potential_issues", v.potential_issues},
         {"application_guess", v.application_guess},
         {"sanitized_instructions", v.sanitized_instructions}};
  if (v.rejection) j["rejection"] = *v.rejection;
  return j;
}

ProcessedContext processed_context_from_json(const Json& j) {
  ProcessedContext v;
  v.summaries = j.at("summaries").get<std::vector<std::string>>();
  v.potential_issues = j.at("potential_issues").get<std::vector<std::string>>();
  v.application_guess = j.at("application_guess").get<std::string>();
  v.sanitized_instructions = j.at("sanitized_instructions").get<std::string>();
  if (j.contains("rejection")) v.rejection = j.at("rejection").get<std::string>();
  return v;
}

// --- probes / thresholds / measurements -------------------------------------

Json json_of(const ProbeSpec& v) {
  Json j{{"tool", to_string(v.tool)}};
  if (v.tool == ProbeTool::ClusterApi) {
    j["selector"] = string_map_json(v.selector);
    j["namespace"] = v.ns;
  } else {
    j["url"] = v.url;
    j["virtual_users"] = v.virtual_users;
  }
  j["quantity"] = to_string(v.quantity);
  j["sample_interval_s"] = v.sample_interval_s;
  j["duration_s"] = v.duration_s;
  return j;
}

ProbeSpec probe_spec_from_json(const Json& j) {
  ProbeSpec v;
  v.tool = probe_tool_from(j.at("tool").get<std::string>());
  if (v.tool == ProbeTool::ClusterApi) {
    v.selector = string_map_from(j.at("selector"));
    v.ns = j.at("namespace").get<std::string>();
  } else {
    v.url = j.at("url").get<std::string>();
    v.virtual_users = j.at("virtual_users").get<int>();
  }
  v.quantity = probe_quantity_from(j.at("quantity").get<std::string>());
  v.sample_interval_s = j.at("sample_interval_s").get<int>();
  v.duration_s = j.at("duration_s").get<int>();
  return v;
}

Json json_of(const Threshold& v) {
  return Json{{"comparator", to_string(v.comparator)},
              {"value", v.value},
              {"aggregation", to_string(v.aggregation)}};
}

Threshold threshold_from_json(const Json& j) {
  Threshold v;
  v.comparator = comparator_from(j.at("comparator").get<std::string>());
  v.value = j.at("value").get<double>();
  v.aggregation = aggregation_from(j.at("aggregation").get<std::string>());
  return v;
}

Json json_of(const Measurement& v) {
  Json samples = Json::array();
  for (const auto& s : v.samples)
    samples.push_back(Json{{"offset_s", s.offset_s}, {"value", s.value}});
  return Json{{"samples", samples}, {"aggregate", v.aggregate}};
}

Measurement measurement_from_json(const Json& j) {
  Measurement v;
  for (const auto& s : j.at("samples"))
    v.samples.push_back({s.at("offset_s").get<int>(), s.at("value").get<double>()});
  v.aggregate = j.at("aggregate").get<double>();
  return v;
}

Json json_of(const VaCSpec& v) {
  return Json{{"steady_state_name", v.steady_state_name},
              {"probe", json_of(v.probe)},
              {"threshold", json_of(v.threshold)},
              {"script_text", v.script_text}};
}

VaCSpec vac_spec_from_json(const Json& j) {
  VaCSpec v;
  v.steady_state_name = j.at("steady_state_name").get<std::string>();
  v.probe = probe_spec_from_json(j.at("probe"));
  v.threshold = threshold_from_json(j.at("threshold"));
  v.script_text = j.value("script_text", std::string{});
  return v;
}

Json json_of(const SteadyState& v) {
  return Json{{"name", v.name},
              {"description", v.description},
              {"probe", json_of(v.probe)},
              {"baseline", json_of(v.baseline)},
              {"threshold", json_of(v.threshold)},
              {"vac", json_of(v.vac)}};
}

SteadyState steady_state_from_json(const Json& j) {
  SteadyState v;
  v.name = j.at("name").get<std::string>();
  v.description = j.at("description").get<std::string>();
  v.probe = probe_spec_from_json(j.at("probe"));
  v.baseline = measurement_from_json(j.at("baseline"));
  v.threshold = threshold_from_json(j.at("threshold"));
  v.vac = vac_spec_from_json(j.at("vac"));
  return v;
}

// --- faults ------------------------------------------------------------------

Json json_of(const FaultSpec& v) {
  Json selector{{"labels", string_map_json(v.selector.labels)},
                {"namespace", v.selector.ns},
                {"mode", to_string(v.selector.mode)}};
  if (v.selector.mode == SelectorMode::FixedCount) selector["count"] = v.selector.count;
  Json params = Json::object();
  if (v.params.delay_ms) params["delay_ms"] = *v.params.delay_ms;
  if (v.params.loss_pct) params["loss_pct"] = *v.params.loss_pct;
  if (v.params.cpu_workers) params["cpu_workers"] = *v.params.cpu_workers;
  if (v.params.kill_grace_s) params["kill_grace_s"] = *v.params.kill_grace_s;
  return Json{{"name", v.name},
              {"kind", to_string(v.kind)},
              {"subtype", v.subtype},
              {"selector", selector},
              {"params", params}};
}

FaultSpec fault_spec_from_json(const Json& j) {
  FaultSpec v;
  v.name = j.at("name").get<std::string>();
  v.kind = fault_kind_from(j.at("kind").get<std::string>());
  v.subtype = j.at("subtype").get<std::string>();
  const auto& sel = j.at("selector");
  v.selector.labels = string_map_from(sel.at("labels"));
  v.selector.ns = sel.at("namespace").get<std::string>();
  v.selector.mode = selector_mode_from(sel.at("mode").get<std::string>());
  if (sel.contains("count")) v.selector.count = sel.at("count").get<int>();
  const auto& params = j.at("params");
  if (params.contains("delay_ms")) v.params.delay_ms = params.at("delay_ms").get<int>();
  if (params.contains("loss_pct")) v.params.loss_pct = params.at("loss_pct").get<double>();
  if (params.contains("cpu_workers"))
    v.params.cpu_workers = params.at("cpu_workers").get<int>();
  if (params.contains("kill_grace_s"))
    v.params.kill_grace_s = params.at("kill_grace_s").get<int>();
  return v;
}

Json json_of(const FailureScenario& v) {
  Json faults = Json::array();
  for (const auto& f : v.faults) faults.push_back(json_of(f));
  return Json{{"narrative", v.narrative}, {"faults", faults}};
}

FailureScenario failure_scenario_from_json(const Json& j) {
  FailureScenario v;
  v.narrative = j.at("narrative").get<std::string>();
  for (const auto& f : j.at("faults")) v.faults.push_back(fault_spec_from_json(f));
  return v;
}

Json json_of(const Hypothesis& v) {
  Json states = Json::array();
  for (const auto& s : v.steady_states) states.push_back(json_of(s));
  return Json{{"steady_states", states},
              {"scenario", json_of(v.scenario)},
              {"statement", v.statement}};
}

Hypothesis hypothesis_from_json(const Json& j) {
  Hypothesis v;
  for (const auto& s : j.at("steady_states"))
    v.steady_states.push_back(steady_state_from_json(s));
  v.scenario = failure_scenario_from_json(j.at("scenario"));
  v.statement = j.at("statement").get<std::string>();
  return v;
}

// --- plan / workflow ----------------------------------------------------------

Json json_of(const ScheduledItem& v) {
  return Json{{"stage", to_string(v.stage)},
              {"task", to_string(v.task)},
              {"ref", v.ref},
              {"start_offset_s", v.start_offset_s},
              {"duration_s", v.duration_s}};
}

ScheduledItem scheduled_item_from_json(const Json& j) {
  ScheduledItem v;
  v.stage = stage_from(j.at("stage").get<std::string>());
  v.task = task_type_from(j.at("task").get<std::string>());
  v.ref = j.at("ref").get<std::string>();
  v.start_offset_s = j.at("start_offset_s").get<int>();
  v.duration_s = j.at("duration_s").get<int>();
  return v;
}

Json json_of(const ExperimentPlan& v) {
  Json items = Json::array();
  for (const auto& i : v.items) items.push_back(json_of(i));
  Json vac = Json::object();
  for (const auto& [name, spec] : v.vac) vac[name] = json_of(spec);
  Json faults = Json::object();
  for (const auto& [name, spec] : v.faults) faults[name] = json_of(spec);
  return Json{{"stage_durations", Json{{"pre_s", v.pre_s}, {"fault_s", v.fault_s}, {"post_s", v.post_s}}},
              {"items", items},
              {"vac", vac},
              {"faults", faults},
              {"timeline_summary", v.timeline_summary}};
}

ExperimentPlan experiment_plan_from_json(const Json& j) {
  ExperimentPlan v;
  const auto& d = j.at("stage_durations");
  v.pre_s = d.at("pre_s").get<int>();
  v.fault_s = d.at("fault_s").get<int>();
  v.post_s = d.at("post_s").get<int>();
  for (const auto& i : j.at("items")) v.items.push_back(scheduled_item_from_json(i));
  for (auto it = j.at("vac").begin(); it != j.at("vac").end(); ++it)
    v.vac[it.key()] = vac_spec_from_json(it.value());
  for (auto it = j.at("faults").begin(); it != j.at("faults").end(); ++it)
    v.faults[it.key()] = fault_spec_from_json(it.value());
  v.timeline_summary = j.at("timeline_summary").get<std::string>();
  return v;
}

Json json_of(const WorkflowManifest& v) {
  Json templates = Json::array();
  for (const auto& n : v.templates) {
    Json node{{"name", n.name},
              {"template_type", n.template_type},
              {"deadline_s", n.deadline_s}};
    if (!n.children.empty()) node["children"] = n.children;
    if (!n.payload_json.empty()) node["payload"] = Json::parse(n.payload_json);
    templates.push_back(node);
  }
  return Json{{"entry", v.entry}, {"templates", templates}};
}

WorkflowManifest workflow_manifest_from_json(const Json& j) {
  WorkflowManifest v;
  v.entry = j.at("entry").get<std::string>();
  for (const auto& t : j.at("templates")) {
    WorkflowNode n;
    n.name = t.at("name").get<std::string>();
    n.template_type = t.at("template_type").get<std::string>();
    n.deadline_s = t.at("deadline_s").get<int>();
    if (t.contains("children")) n.children = t.at("children").get<std::vector<std::string>>();
    if (t.contains("payload")) n.payload_json = t.at("payload").dump();
    v.templates.push_back(std::move(n));
  }
  return v;
}

// --- results / analysis -------------------------------------------------------

Json json_of(const ItemOutcome& v) {
  return Json{{"item", json_of(v.item)},
              {"node", v.node_name},
              {"passed", v.passed},
              {"measurement", json_of(v.measurement)},
              {"log", v.log}};
}

Json json_of(const ExperimentResult& v) {
  Json outcomes = Json::array();
  for (const auto& o : v.outcomes) outcomes.push_back(json_of(o));
  return Json{{"outcomes", outcomes},
              {"started_s", v.started_s},
              {"finished_s", v.finished_s}};
}

ExperimentResult experiment_result_from_json(const Json& j) {
  ExperimentResult v;
  for (const auto& o : j.at("outcomes")) {
    ItemOutcome out;
    out.item = scheduled_item_from_json(o.at("item"));
    out.node_name = o.at("node").get<std::string>();
    out.passed = o.at("passed").get<bool>();
    out.measurement = measurement_from_json(o.at("measurement"));
    out.log = o.at("log").get<std::string>();
    v.outcomes.push_back(std::move(out));
  }
  v.started_s = j.at("started_s").get<int>();
  v.finished_s = j.at("finished_s").get<int>();
  return v;
}

Json json_of(const AnalysisReport& v) {
  return Json{{"failed_items", v.failed_items},
              {"causes", v.causes},
              {"countermeasures", v.countermeasures}};
}

AnalysisReport analysis_report_from_json(const Json& j) {
  AnalysisReport v;
  v.failed_items = j.at("failed_items").get<std::vector<std::string>>();
  v.causes = j.at("causes").get<std::vector<std::string>>();
  v.countermeasures = j.at("countermeasures").get<std::vector<std::string>>();
  return v;
}

Json json_of(const Reconfiguration& v) {
  Json ops = Json::array();
  for (const auto& op : v.ops) {
    Json o{{"op", to_string(op.op)}, {"path", op.path}};
    if (op.op != ReconfigOpKind::Delete) o["text"] = op.text;
    ops.push_back(o);
  }
  return Json{{"ops", ops}, {"rationale", v.rationale}};
}

Reconfiguration reconfiguration_from_json(const Json& j) {
  Reconfiguration v;
  for (const auto& o : j.at("ops")) {
    ReconfigOp op;
    op.op = reconfig_op_kind_from(o.at("op").get<std::string>());
    op.path = o.at("path").get<std::string>();
    op.text = o.value("text", std::string{});
    v.ops.push_back(std::move(op));
  }
  v.rationale = j.at("rationale").get<std::string>();
  return v;
}

// --- ledger / record -----------------------------------------------------------

namespace {

Json ledger_row_json(const LedgerRow& r) {
  return Json{{"input_tokens", r.input_tokens},
              {"output_tokens", r.output_tokens},
              {"api_cost_usd", r.api_cost_usd},
              {"wall_time_s", r.wall_time_s}};
}

LedgerRow ledger_row_from(const Json& j) {
  LedgerRow r;
  r.input_tokens = j.at("input_tokens").get<long long>();
  r.output_tokens = j.at("output_tokens").get<long long>();
  r.api_cost_usd = j.at("api_cost_usd").get<double>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  return r;
}

}  // namespace

Json json_of(const CostLedger& v) {
  Json rows = Json::object();
  for (int p = 0; p < kPhaseCount; ++p)
    rows[to_string(static_cast<Phase>(p))] = ledger_row_json(v.rows[p]);
  return Json{{"rows", rows}, {"totals", ledger_row_json(v.totals())}};
}

CostLedger cost_ledger_from_json(const Json& j) {
  CostLedger v;
  for (int p = 0; p < kPhaseCount; ++p)
    v.rows[p] = ledger_row_from(j.at("rows").at(to_string(static_cast<Phase>(p))));
  return v;
}

Json json_of(const CycleOutcome& v) {
  Json j{{"kind", to_string(v.kind)}};
  if (v.kind == OutcomeKind::SatisfiedAfterImprovement) j["loops"] = v.loops;
  if (v.kind == OutcomeKind::Aborted) j["reason"] = v.reason;
  return j;
}

CycleOutcome cycle_outcome_from_json(const Json& j) {
  CycleOutcome v;
  v.kind = outcome_kind_from(j.at("kind").get<std::string>());
  v.loops = j.value("loops", 0);
  v.reason = j.value("reason", std::string{});
  return v;
}

Json json_of(const LoopTrace& v) {
  Json j{{"plan", json_of(v.plan)},
         {"workflow", json_of(v.workflow)},
         {"result", json_of(v.result)}};
  if (v.report) j["report"] = json_of(*v.report);
  if (v.reconfiguration) j["reconfiguration"] = json_of(*v.reconfiguration);
  j["set_after"] = json_of(v.set_after);
  return j;
}

LoopTrace loop_trace_from_json(const Json& j) {
  LoopTrace v;
  v.plan = experiment_plan_from_json(j.at("plan"));
  v.workflow = workflow_manifest_from_json(j.at("workflow"));
  v.result = experiment_result_from_json(j.at("result"));
  if (j.contains("report")) v.report = analysis_report_from_json(j.at("report"));
  if (j.contains("reconfiguration"))
    v.reconfiguration = reconfiguration_from_json(j.at("reconfiguration"));
  v.set_after = manifest_set_from_json(j.at("set_after"));
  return v;
}

Json json_of(const CycleRecord& v) {
  Json j{{"schema_version", v.schema_version},
         {"input", json_of(v.input)},
         {"context", json_of(v.context)}};
  if (v.hypothesis) j["hypothesis"] = json_of(*v.hypothesis);
  Json loops = Json::array();
  for (const auto& l : v.loops) loops.push_back(json_of(l));
  j["loops"] = loops;
  j["summary"] = v.summary;
  j["ledger"] = json_of(v.ledger);
  j["outcome"] = json_of(v.outcome);
  return j;
}

CycleRecord cycle_record_from_json(const Json& j) {
  const int version = j.at("schema_version").get<int>();
  if (version != kRecordSchemaVersion) {
    fail(ErrorCode::SchemaVersionMismatch,
         "record schema version " + std::to_string(version) + " unsupported");
  }
  CycleRecord v;
  v.schema_version = version;
  v.input = project_input_from_json(j.at("input"));
  v.context = processed_context_from_json(j.at("context"));
  if (j.contains("hypothesis")) v.hypothesis = hypothesis_from_json(j.at("hypothesis"));
  for (const auto& l : j.at("loops")) v.loops.push_back(loop_trace_from_json(l));
  v.summary = j.at("summary").get<std::string>();
  v.ledger = cost_ledger_from_json(j.at("ledger"));
  v.outcome = cycle_outcome_from_json(j.at("outcome"));
  return v;
}

}  // namespace chaoscycle
