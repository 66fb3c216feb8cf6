#pragma once

#include <optional>
#include <string>

#include "chaoscycle/config.hpp"
#include "chaoscycle/gateway.hpp"
#include "chaoscycle/improvement.hpp"
#include "chaoscycle/model.hpp"

// Phase 0 (pre-processing), the post-processing summary, and the end-to-end
// cycle composition with phase-attributed cost accounting.

namespace chaoscycle {

// Static denylist screened before the PolicyFilter agent runs.
bool instructions_denylisted(const std::string& instructions, std::string& reason);

// Derives the experiment-duration constraint from free-text instructions
// ("within one minute", "within 90 seconds", "within 2 minutes").
std::optional<int> constraint_from_instructions(const std::string& instructions);

// Phase 0: policy screening, deployment, context filling. deploy is invoked
// once the instructions pass screening, so a rejected cycle never deploys.
// On rejection the returned context carries only the rejection reason.
ProcessedContext preprocess(const ProjectInput& input, const ManifestSet& set,
                            Gateway& gateway, const std::function<void()>& deploy);

// Post-processing summary with mechanical substring checks (steady-state
// names, narrative, outcome, loop count); retried, then
// SummaryIncompleteExhausted.
std::string summarize_cycle(const CycleRecord& record, Gateway& gateway);

// End-to-end cycle. Writes record.json, ledger.json, loop-N/ artifacts and
// the output/ folder under out_dir. Any phase error yields an Aborted record
// with partial artifacts retained. backend_override replaces the configured
// backend (recording and instrumentation hooks).
CycleRecord run_cycle(const ProjectInput& input, const CycleConfig& config,
                      const std::string& out_dir,
                      std::shared_ptr<Backend> backend_override = nullptr);

// Artifact writer (also used on the abort path).
void write_cycle_artifacts(const CycleRecord& record, const ManifestSet* final_set,
                           const std::string& out_dir);

}  // namespace chaoscycle
