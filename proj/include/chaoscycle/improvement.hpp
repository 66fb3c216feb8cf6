#pragma once

#include <functional>
#include <vector>

#include "chaoscycle/experiment.hpp"
#include "chaoscycle/gateway.hpp"
#include "chaoscycle/manifests.hpp"
#include "chaoscycle/model.hpp"

// Phases 3-4: mechanical pass/fail gate, failure analysis, manifest
// reconfiguration, and the bounded improvement loop with history.

namespace chaoscycle {

struct HistoryEntry {
  ExperimentResult result;
  AnalysisReport report;
  Reconfiguration reconfiguration;
};

using ImprovementHistory = std::vector<HistoryEntry>;

inline constexpr int kDefaultMaxLoops = 3;

// True iff every RunVaC outcome passed; fault-injection outcomes are not part
// of the conjunction. Pure, no agent involved.
bool check_results(const ExperimentResult& result);

std::vector<ItemOutcome> failed_vac_outcomes(const ExperimentResult& result);

// Failure-cause report over the failed outcomes. failed must be non-empty;
// failed_items is filled mechanically from the input.
AnalysisReport analyze_failures(const ManifestSet& set, const std::string& timeline_summary,
                                const std::vector<ItemOutcome>& failed, Gateway& gateway);

// Proposes a reconfiguration, mechanically guarded: the ops must apply
// cleanly onto a valid set and must differ from every history entry's op
// list. Violations are retried with feedback, then ReconfigInvalidExhausted
// or RepeatedReconfiguration (by the last violation kind).
Reconfiguration reconfigure(const ManifestSet& set, const Hypothesis& hypothesis,
                            const ExperimentPlan& plan, const ImprovementHistory& history,
                            Gateway& gateway);

using ClusterFactory = std::function<Cluster(const ManifestSet&)>;

struct ImprovementResult {
  std::vector<LoopTrace> loops;  // initial loop (enriched) plus one per iteration
  ManifestSet final_set;
  CycleOutcome outcome;
};

// Runs analyze -> reconfigure -> apply -> redeploy -> replan -> execute ->
// check until the hypothesis is satisfied or max_loops reconfigurations have
// been tried (outcome Aborted("max loops"), final set unvalidated). The
// initial loop's experiment must already have failed.
ImprovementResult run_improvement_loop(const ManifestSet& initial_set,
                                       const Hypothesis& hypothesis, LoopTrace initial_loop,
                                       const ClusterFactory& factory, Gateway& gateway,
                                       int max_loops = kDefaultMaxLoops);

}  // namespace chaoscycle
