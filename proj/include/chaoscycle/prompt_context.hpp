#pragma once

#include <string>
#include <vector>

#include "chaoscycle/model.hpp"

// Builders for the structured key->text maps handed to agents. Values are
// compact JSON or plain text; both real models and the replay transcripts
// consume the same rendering.

namespace chaoscycle {

// Compact JSON array describing each resource's modeled fields.
std::string resources_overview(const ManifestSet& set);

// All manifest file texts with "--- <path> ---" separators, deploy order.
std::string manifest_files_text(const ManifestSet& set);

// Summaries, issues and application guess as one text block.
std::string context_brief(const ProcessedContext& ctx);

// Compact JSON array of existing steady states (name, tool, quantity, target).
std::string steady_states_brief(const std::vector<SteadyState>& states);

// Compact JSON of a probe / threshold / fault list for prompt embedding.
std::string probe_text(const ProbeSpec& probe);
std::string threshold_text(const Threshold& threshold);
std::string faults_text(const std::vector<FaultSpec>& faults);
std::string samples_text(const std::vector<Sample>& samples);

}  // namespace chaoscycle
