#include "chaoscycle/manifests.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "chaoscycle/yaml_doc.hpp"

namespace chaoscycle {

namespace {

std::map<std::string, std::string> labels_from_doc(const Json& node) {
  std::map<std::string, std::string> labels;
  if (!node.is_object()) return labels;
  for (auto it = node.begin(); it != node.end(); ++it) {
    if (it.value().is_string()) {
      labels[it.key()] = it.value().get<std::string>();
    } else {
      labels[it.key()] = it.value().dump();
    }
  }
  return labels;
}

Resource resource_from_doc(const Json& doc, const std::string& path) {
  auto malformed = [&](const std::string& what) -> CycleError {
    return CycleError(ErrorCode::MalformedDocument, path + ": " + what);
  };
  if (!doc.is_object()) throw malformed("document is not a mapping");
  if (!doc.contains("kind") || !doc.at("kind").is_string())
    throw malformed("document has no kind");
  const auto& meta = doc.value("metadata", Json::object());
  if (!meta.contains("name") || !meta.at("name").is_string())
    throw malformed("document has no metadata.name");

  Resource r;
  r.kind_name = doc.at("kind").get<std::string>();
  r.kind = resource_kind_from(r.kind_name);
  r.name = meta.at("name").get<std::string>();
  r.ns = meta.value("namespace", std::string("default"));
  r.labels = labels_from_doc(meta.value("labels", Json::object()));
  r.doc = doc;

  const Json spec = doc.value("spec", Json::object());
  switch (r.kind) {
    case ResourceKind::Pod: {
      const auto policy = spec.value("restartPolicy", std::string("Always"));
      r.restart_policy = restart_policy_from(policy);
      break;
    }
    case ResourceKind::Deployment: {
      r.replicas = spec.value("replicas", 1);
      const Json tmeta = spec.value("template", Json::object()).value("metadata", Json::object());
      r.pod_template_labels = labels_from_doc(tmeta.value("labels", Json::object()));
      break;
    }
    case ResourceKind::Service: {
      r.selector = labels_from_doc(spec.value("selector", Json::object()));
      const Json ports = spec.value("ports", Json::array());
      if (ports.is_array() && !ports.empty() && ports[0].contains("port"))
        r.port = ports[0].at("port").get<int>();
      break;
    }
    case ResourceKind::Other:
      break;
  }
  return r;
}

ManifestSet build_set(const std::map<std::string, std::string>& file_texts,
                      const std::vector<std::string>& file_order,
                      const std::string& deploy_api_version) {
  ManifestSet set;
  set.file_order = file_order;
  set.file_texts = file_texts;
  set.deploy_api_version = deploy_api_version;
  std::set<std::string> seen;
  for (const auto& path : file_order) {
    for (const auto& doc : parse_yaml_documents(file_texts.at(path), path)) {
      Resource r = resource_from_doc(doc, path);
      if (!seen.insert(r.id()).second)
        fail(ErrorCode::DuplicateResourceId, "duplicate resource id '" + r.id() + "'");
      set.source_paths[r.id()] = path;
      set.resources.push_back(std::move(r));
    }
  }
  validate(set);
  return set;
}

std::string deploy_api_version_of(const std::string& deploy_config) {
  const auto docs = parse_yaml_documents(deploy_config, "deploy config");
  if (!docs.empty() && docs[0].is_object() && docs[0].contains("apiVersion") &&
      docs[0].at("apiVersion").is_string())
    return docs[0].at("apiVersion").get<std::string>();
  return "skaffold/v2beta29";
}

}  // namespace

std::vector<std::string> deploy_config_paths(const std::string& deploy_config) {
  const auto docs = parse_yaml_documents(deploy_config, "deploy config");
  if (docs.empty() || !docs[0].is_object())
    fail(ErrorCode::MalformedDocument, "deploy config is not a mapping");
  const Json& root = docs[0];

  Json manifests;
  const Json deploy = root.value("deploy", Json::object());
  if (deploy.is_object() && deploy.contains("kubectl") &&
      deploy.at("kubectl").is_object() && deploy.at("kubectl").contains("manifests")) {
    manifests = deploy.at("kubectl").at("manifests");
  } else if (root.contains("manifests") && root.at("manifests").is_object() &&
             root.at("manifests").contains("rawYaml")) {
    manifests = root.at("manifests").at("rawYaml");
  } else {
    fail(ErrorCode::MalformedDocument, "deploy config lists no manifests");
  }
  if (!manifests.is_array() || manifests.empty())
    fail(ErrorCode::MalformedDocument, "deploy config manifest list is empty");

  std::vector<std::string> paths;
  std::set<std::string> seen;
  for (const auto& m : manifests) {
    if (!m.is_string())
      fail(ErrorCode::MalformedDocument, "deploy config manifest entries must be paths");
    const auto path = m.get<std::string>();
    if (seen.insert(path).second) paths.push_back(path);
  }
  return paths;
}

ManifestSet validate_project_input(const ProjectInput& input) {
  if (input.manifests.empty())
    fail(ErrorCode::EmptyInput, "project contains no manifest files");

  std::map<std::string, std::string> file_texts;
  for (const auto& f : input.manifests) file_texts[f.path] = f.text;

  const auto order = deploy_config_paths(input.deploy_config);
  for (const auto& path : order) {
    if (!file_texts.count(path))
      fail(ErrorCode::MissingReference,
           "deploy config references missing manifest '" + path + "'");
  }

  std::map<std::string, std::string> referenced;
  for (const auto& path : order) referenced[path] = file_texts.at(path);
  return build_set(referenced, order, deploy_api_version_of(input.deploy_config));
}

// ---------------------------------------------------------------------------
// diff

namespace {

void diff_nodes(const Json& a, const Json& b, const std::string& path,
                std::vector<FieldDiff>& out) {
  if (a == b) return;
  auto join = [&](const std::string& key) {
    return path.empty() ? key : path + "." + key;
  };
  if (a.is_object() && b.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (b.contains(it.key())) {
        diff_nodes(it.value(), b.at(it.key()), join(it.key()), out);
      } else {
        out.push_back({join(it.key()), it.value().dump(), std::nullopt});
      }
    }
    for (auto it = b.begin(); it != b.end(); ++it) {
      if (!a.contains(it.key()))
        out.push_back({join(it.key()), std::nullopt, it.value().dump()});
    }
    return;
  }
  if (a.is_array() && b.is_array()) {
    const size_t shared = std::min(a.size(), b.size());
    for (size_t i = 0; i < shared; ++i)
      diff_nodes(a[i], b[i], path + "[" + std::to_string(i) + "]", out);
    for (size_t i = shared; i < a.size(); ++i)
      out.push_back({path + "[" + std::to_string(i) + "]", a[i].dump(), std::nullopt});
    for (size_t i = shared; i < b.size(); ++i)
      out.push_back({path + "[" + std::to_string(i) + "]", std::nullopt, b[i].dump()});
    return;
  }
  // scalar change or structural type change: stop here
  out.push_back({path.empty() ? "." : path, a.dump(), b.dump()});
}

std::vector<FieldDiff> diff_file(const std::string& old_text, const std::string& new_text,
                                 const std::string& path) {
  const auto old_docs = parse_yaml_documents(old_text, path);
  const auto new_docs = parse_yaml_documents(new_text, path);
  std::vector<FieldDiff> fields;
  const size_t shared = std::min(old_docs.size(), new_docs.size());
  const bool multi = old_docs.size() > 1 || new_docs.size() > 1;
  for (size_t i = 0; i < shared; ++i) {
    const std::string prefix = multi ? "doc[" + std::to_string(i) + "]" : "";
    diff_nodes(old_docs[i], new_docs[i], prefix, fields);
  }
  for (size_t i = shared; i < old_docs.size(); ++i)
    fields.push_back({"doc[" + std::to_string(i) + "]", old_docs[i].dump(), std::nullopt});
  for (size_t i = shared; i < new_docs.size(); ++i)
    fields.push_back({"doc[" + std::to_string(i) + "]", std::nullopt, new_docs[i].dump()});
  return fields;
}

}  // namespace

ChangeSet diff_manifest_sets(const ManifestSet& old_set, const ManifestSet& new_set) {
  ChangeSet cs;
  std::set<std::string> old_paths(old_set.file_order.begin(), old_set.file_order.end());
  std::set<std::string> new_paths(new_set.file_order.begin(), new_set.file_order.end());

  for (const auto& p : new_paths)
    if (!old_paths.count(p)) cs.added.push_back(p);
  for (const auto& p : old_paths)
    if (!new_paths.count(p)) cs.removed.push_back(p);
  for (const auto& p : old_paths) {
    if (!new_paths.count(p)) continue;
    auto fields = diff_file(old_set.file_texts.at(p), new_set.file_texts.at(p), p);
    if (!fields.empty()) cs.modified.push_back({p, std::move(fields)});
  }
  return cs;  // std::set iteration already sorts by path
}

Reconfiguration reconfiguration_from_diff(const ManifestSet& old_set,
                                          const ManifestSet& new_set) {
  const ChangeSet cs = diff_manifest_sets(old_set, new_set);
  Reconfiguration reconf;
  for (const auto& p : cs.removed) reconf.ops.push_back({ReconfigOpKind::Delete, p, ""});
  for (const auto& p : cs.added)
    reconf.ops.push_back({ReconfigOpKind::Create, p, new_set.file_texts.at(p)});
  for (const auto& m : cs.modified)
    reconf.ops.push_back({ReconfigOpKind::Replace, m.path, new_set.file_texts.at(m.path)});
  reconf.rationale = "derived from structural diff";
  return reconf;
}

ApplyResult apply_reconfiguration(const ManifestSet& current, const Reconfiguration& reconf) {
  validate(reconf, current);

  std::map<std::string, std::string> file_texts = current.file_texts;
  std::vector<std::string> order = current.file_order;
  for (const auto& op : reconf.ops) {
    switch (op.op) {
      case ReconfigOpKind::Replace:
        file_texts[op.path] = op.text;
        break;
      case ReconfigOpKind::Create:
        file_texts[op.path] = op.text;
        order.push_back(op.path);
        break;
      case ReconfigOpKind::Delete:
        file_texts.erase(op.path);
        order.erase(std::remove(order.begin(), order.end(), op.path), order.end());
        break;
    }
  }

  ApplyResult result;
  result.set = build_set(file_texts, order, current.deploy_api_version);
  for (const auto& r : result.set.resources) {
    if (r.kind != ResourceKind::Service) continue;
    if (resolve_selector(result.set, r.selector, r.ns).empty())
      result.warnings.push_back("DanglingSelector: Service '" + r.name +
                                "' selector matches no pods");
  }
  return result;
}

std::vector<std::string> write_output_folder(const ManifestSet& set,
                                             const std::string& destination) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(destination, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create '" + destination + "': " + ec.message());

  std::vector<std::string> written;
  auto write_file = [&](const std::string& rel, const std::string& text) {
    const fs::path target = fs::path(destination) / rel;
    fs::create_directories(target.parent_path(), ec);
    std::ofstream out(target, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write '" + target.string() + "'");
    out << text;
    written.push_back(rel);
  };

  for (const auto& path : set.file_order) write_file(path, set.file_texts.at(path));
  write_file("skaffold.yaml", regenerate_deploy_config(set));
  return written;
}

std::string regenerate_deploy_config(const ManifestSet& set) {
  Json manifests = Json::array();
  for (const auto& p : set.file_order) manifests.push_back(p);
  const Json config{{"apiVersion", set.deploy_api_version},
                    {"kind", "Config"},
                    {"deploy", Json{{"kubectl", Json{{"manifests", manifests}}}}}};
  return emit_yaml(config);
}

bool labels_match(const std::map<std::string, std::string>& selector,
                  const std::map<std::string, std::string>& labels) {
  for (const auto& [k, v] : selector) {
    auto it = labels.find(k);
    if (it == labels.end() || it->second != v) return false;
  }
  return !selector.empty();
}

std::vector<std::string> resolve_selector(const ManifestSet& set,
                                          const std::map<std::string, std::string>& labels,
                                          const std::string& ns) {
  std::vector<std::string> ids;
  for (const auto& r : set.resources) {
    if (r.ns != ns) continue;
    const bool pod_match = r.kind == ResourceKind::Pod && labels_match(labels, r.labels);
    const bool dep_match =
        r.kind == ResourceKind::Deployment && labels_match(labels, r.pod_template_labels);
    if (pod_match || dep_match) ids.push_back(r.id());
  }
  return ids;
}

bool sets_structurally_equal(const ManifestSet& a, const ManifestSet& b) {
  return diff_manifest_sets(a, b).empty();
}

}  // namespace chaoscycle
