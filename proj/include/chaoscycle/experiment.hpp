#pragma once

#include <optional>

#include "chaoscycle/gateway.hpp"
#include "chaoscycle/manifests.hpp"
#include "chaoscycle/model.hpp"
#include "chaoscycle/sim_cluster.hpp"

// Phase 2: plan the three-stage experiment, compile it into a Chaos-Mesh
// style workflow manifest, replan after reconfiguration, and execute against
// the cluster backend.

namespace chaoscycle {

// Plans stage durations and the item schedule. Violating agent output is
// retried up to kMaxAttempts with feedback, then PlanInvalidExhausted. When
// max_total_s is given every emitted plan satisfies it.
ExperimentPlan plan_experiment(const ProcessedContext& ctx, const Hypothesis& hypothesis,
                               std::optional<int> max_total_s, Gateway& gateway);

// Deterministic compile: entry Serial over three stage Serial nodes; equal
// offsets share a Parallel group; nonzero offsets become Suspend nodes;
// deadlines equal item durations.
WorkflowManifest compile_workflow(const ExperimentPlan& plan);

// Chaos-Mesh-compatible serialization (apiVersion chaos-mesh.org/v1alpha1).
std::string workflow_to_chaos_mesh_yaml(const WorkflowManifest& workflow);

// Updates only probe targets and fault selectors to match new_set; any other
// difference in the agent's proposal raises IntentChanged. Unresolvable
// selectors are retried, then SelectorUnresolvableExhausted.
ExperimentPlan replan_experiment(const ExperimentPlan& prev_plan, const ManifestSet& old_set,
                                 const ManifestSet& new_set, Gateway& gateway);

// Drives the simulator tick-by-tick through all three stages; injects faults
// and samples probes at their scheduled offsets; one outcome per item.
ExperimentResult execute_experiment(const WorkflowManifest& workflow, Cluster& cluster);

}  // namespace chaoscycle
