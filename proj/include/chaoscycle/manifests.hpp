#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chaoscycle/model.hpp"

// Manifest engine: parse project input, diff and reconfigure manifest sets,
// and write the output folder. Pure functions over immutable inputs.

namespace chaoscycle {

struct FieldDiff {
  std::string doc_path;  // e.g. "spec.replicas", "doc[1].metadata.name"
  std::optional<std::string> old_value;  // canonical JSON, absent if added
  std::optional<std::string> new_value;  // canonical JSON, absent if removed

  bool operator==(const FieldDiff&) const = default;
};

struct FileDiff {
  std::string path;
  std::vector<FieldDiff> fields;

  bool operator==(const FileDiff&) const = default;
};

struct ChangeSet {
  std::vector<std::string> added;    // sorted by path
  std::vector<std::string> removed;  // sorted by path
  std::vector<FileDiff> modified;    // sorted by path

  bool empty() const { return added.empty() && removed.empty() && modified.empty(); }
};

struct ApplyResult {
  ManifestSet set;
  std::vector<std::string> warnings;  // e.g. dangling Service selectors
};

// Parses and validates the project input into a deploy-ordered ManifestSet.
// Unknown kinds are preserved as Other resources.
ManifestSet validate_project_input(const ProjectInput& input);

// Reads the ordered manifest path list out of a Skaffold-format config.
// Accepts both deploy.kubectl.manifests and manifests.rawYaml layouts.
std::vector<std::string> deploy_config_paths(const std::string& deploy_config);

// Structural diff between two sets, deterministic ordering by path.
ChangeSet diff_manifest_sets(const ManifestSet& old_set, const ManifestSet& new_set);

// Derives the Reconfiguration that turns old_set into new_set.
Reconfiguration reconfiguration_from_diff(const ManifestSet& old_set,
                                          const ManifestSet& new_set);

// Applies ops and re-parses the resulting file map into a valid set.
ApplyResult apply_reconfiguration(const ManifestSet& current, const Reconfiguration& reconf);

// Writes one file per source path plus a regenerated skaffold.yaml under
// destination. Returns the written relative paths in order.
std::vector<std::string> write_output_folder(const ManifestSet& set,
                                             const std::string& destination);

// Regenerated deploy config referencing exactly the set's files in order.
std::string regenerate_deploy_config(const ManifestSet& set);

// Resources whose pods would match a label selector (Pod labels or Deployment
// template labels), namespace-scoped.
std::vector<std::string> resolve_selector(const ManifestSet& set,
                                          const std::map<std::string, std::string>& labels,
                                          const std::string& ns);

// True when every selector pair appears in the target labels.
bool labels_match(const std::map<std::string, std::string>& selector,
                  const std::map<std::string, std::string>& labels);

// Structural equality over parsed document trees.
bool sets_structurally_equal(const ManifestSet& a, const ManifestSet& b);

}  // namespace chaoscycle
