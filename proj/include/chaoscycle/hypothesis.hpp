#pragma once

#include <vector>

#include "chaoscycle/gateway.hpp"
#include "chaoscycle/manifests.hpp"
#include "chaoscycle/model.hpp"
#include "chaoscycle/sim_cluster.hpp"

// Phase 1: the steady-state definition loop (draft -> inspect -> threshold ->
// VaC -> sufficiency) and failure definition (scenario draft -> stepwise
// fault refinement). Strictly sequential; each step consumes the previous
// step's output.

namespace chaoscycle {

struct SteadyStateDraft {
  std::string name;
  std::string description;
  ProbeSpec probe;
};

struct SufficiencyDecision {
  bool enough = false;
  std::string reason;
};

// Limits supplementing the agent's open-ended judgement.
inline constexpr int kDefaultMaxSteadyStates = 4;
inline constexpr int kBaselineProbeCapS = 10;

// Drafts the next steady state. Dedup against existing names and (tool,
// target) pairs is enforced mechanically: one retry with the collision noted,
// then DuplicateStateExhausted.
SteadyStateDraft draft_steady_state(const ProcessedContext& ctx,
                                    const std::vector<SteadyState>& existing,
                                    const ManifestSet& set, Gateway& gateway);

// Measures the draft's probe on the healthy cluster with a shortened
// duration (min(kBaselineProbeCapS, probe.duration_s)). The returned
// aggregate is provisional (final-sample) until the threshold fixes the
// aggregation.
Measurement inspect_baseline(const SteadyStateDraft& draft, Cluster& cluster);

// Asks for a threshold and re-evaluates it mechanically against the baseline
// samples; up to kMaxAttempts violations, then ThresholdInconsistent.
Threshold define_threshold(const SteadyStateDraft& draft, const Measurement& baseline,
                           Gateway& gateway);

// Generates the inspection script for the draft (retained verbatim).
std::string write_probe_script(const SteadyStateDraft& draft, Gateway& gateway);

// Adds threshold assertions to the inspection script and assembles the VaC.
VaCSpec build_vac(const SteadyStateDraft& draft, const Threshold& threshold,
                  const std::string& inspection_script, Gateway& gateway);

// Agent decision; callers enforce the max_steady_states cap on top.
SufficiencyDecision steady_states_sufficient(const std::vector<SteadyState>& states,
                                             const ProcessedContext& ctx, Gateway& gateway);

// Scenario draft plus stepwise fault refinement. Refined selectors are
// validated against the manifest set; unresolvable output is retried up to
// kMaxAttempts, then SelectorUnresolvableExhausted.
FailureScenario define_failure_scenario(const ProcessedContext& ctx,
                                        const std::vector<SteadyState>& states,
                                        const ManifestSet& set, Gateway& gateway);

// Full phase driver: loops the steady-state definition (agent judgement,
// hard cap, dedup), then defines the failure scenario. All usage is billed
// to Phase::Hyp.
Hypothesis run_hypothesis_phase(const ProcessedContext& ctx, const ManifestSet& set,
                                Cluster& cluster, Gateway& gateway,
                                int max_steady_states = kDefaultMaxSteadyStates);

}  // namespace chaoscycle
