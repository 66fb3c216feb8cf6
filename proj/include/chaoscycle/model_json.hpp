#pragma once

#include "chaoscycle/model.hpp"

// JSON (de)serialization for the domain types. Field order is fixed so the
// serialized forms are byte-stable across runs.

namespace chaoscycle {

Json json_of(const ProjectInput& v);
Json json_of(const Resource& v);
Json json_of(const ManifestSet& v);
Json json_of(const ProcessedContext& v);
Json json_of(const ProbeSpec& v);
Json json_of(const Threshold& v);
Json json_of(const Measurement& v);
Json json_of(const VaCSpec& v);
Json json_of(const SteadyState& v);
Json json_of(const FaultSpec& v);
Json json_of(const FailureScenario& v);
Json json_of(const Hypothesis& v);
Json json_of(const ScheduledItem& v);
Json json_of(const ExperimentPlan& v);
Json json_of(const WorkflowManifest& v);
Json json_of(const ItemOutcome& v);
Json json_of(const ExperimentResult& v);
Json json_of(const AnalysisReport& v);
Json json_of(const Reconfiguration& v);
Json json_of(const CostLedger& v);
Json json_of(const CycleOutcome& v);
Json json_of(const LoopTrace& v);
Json json_of(const CycleRecord& v);

ProjectInput project_input_from_json(const Json& j);
ManifestSet manifest_set_from_json(const Json& j);
ProcessedContext processed_context_from_json(const Json& j);
ProbeSpec probe_spec_from_json(const Json& j);
Threshold threshold_from_json(const Json& j);
Measurement measurement_from_json(const Json& j);
VaCSpec vac_spec_from_json(const Json& j);
SteadyState steady_state_from_json(const Json& j);
FaultSpec fault_spec_from_json(const Json& j);
FailureScenario failure_scenario_from_json(const Json& j);
Hypothesis hypothesis_from_json(const Json& j);
ScheduledItem scheduled_item_from_json(const Json& j);
ExperimentPlan experiment_plan_from_json(const Json& j);
WorkflowManifest workflow_manifest_from_json(const Json& j);
ExperimentResult experiment_result_from_json(const Json& j);
AnalysisReport analysis_report_from_json(const Json& j);
Reconfiguration reconfiguration_from_json(const Json& j);
CostLedger cost_ledger_from_json(const Json& j);
CycleOutcome cycle_outcome_from_json(const Json& j);
LoopTrace loop_trace_from_json(const Json& j);
CycleRecord cycle_record_from_json(const Json& j);

// Canonical text form used for files and digests: 2-space indent, '\n' EOL.
std::string dump_json(const Json& j);

}  // namespace chaoscycle
