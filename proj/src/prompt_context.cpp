#include "chaoscycle/prompt_context.hpp"

#include "chaoscycle/model_json.hpp"

namespace chaoscycle {

std::string resources_overview(const ManifestSet& set) {
  Json arr = Json::array();
  for (const auto& r : set.resources) {
    Json item{{"kind", r.kind_name}, {"name", r.name}, {"namespace", r.ns}};
    if (!r.labels.empty()) {
      Json labels = Json::object();
      for (const auto& [k, v] : r.labels) labels[k] = v;
      item["labels"] = labels;
    }
    if (r.restart_policy) item["restartPolicy"] = to_string(*r.restart_policy);
    if (r.replicas) item["replicas"] = *r.replicas;
    if (!r.pod_template_labels.empty()) {
      Json labels = Json::object();
      for (const auto& [k, v] : r.pod_template_labels) labels[k] = v;
      item["podTemplateLabels"] = labels;
    }
    if (!r.selector.empty()) {
      Json sel = Json::object();
      for (const auto& [k, v] : r.selector) sel[k] = v;
      item["selector"] = sel;
    }
    if (r.port) item["port"] = *r.port;
    item["source"] = set.source_paths.at(r.id());
    arr.push_back(item);
  }
  return arr.dump();
}

std::string manifest_files_text(const ManifestSet& set) {
  std::string out;
  for (const auto& path : set.file_order) {
    out += "--- " + path + " ---\n" + set.file_texts.at(path);
    if (out.empty() || out.back() != '\n') out += "\n";
  }
  return out;
}

std::string context_brief(const ProcessedContext& ctx) {
  std::string out = "application: " + ctx.application_guess + "\nsummaries:\n";
  for (const auto& s : ctx.summaries) out += "- " + s + "\n";
  out += "potential issues:\n";
  if (ctx.potential_issues.empty()) out += "- none noted\n";
  for (const auto& s : ctx.potential_issues) out += "- " + s + "\n";
  return out;
}

std::string steady_states_brief(const std::vector<SteadyState>& states) {
  Json arr = Json::array();
  for (const auto& s : states) {
    Json item{{"name", s.name},
              {"tool", to_string(s.probe.tool)},
              {"quantity", to_string(s.probe.quantity)}};
    if (s.probe.tool == ProbeTool::ClusterApi) {
      Json sel = Json::object();
      for (const auto& [k, v] : s.probe.selector) sel[k] = v;
      item["selector"] = sel;
      item["namespace"] = s.probe.ns;
    } else {
      item["url"] = s.probe.url;
    }
    arr.push_back(item);
  }
  return arr.dump();
}

std::string probe_text(const ProbeSpec& probe) { return json_of(probe).dump(); }

std::string threshold_text(const Threshold& threshold) { return json_of(threshold).dump(); }

std::string faults_text(const std::vector<FaultSpec>& faults) {
  Json arr = Json::array();
  for (const auto& f : faults) arr.push_back(json_of(f));
  return arr.dump();
}

std::string samples_text(const std::vector<Sample>& samples) {
  Json arr = Json::array();
  for (const auto& s : samples)
    arr.push_back(Json{{"offset_s", s.offset_s}, {"value", s.value}});
  return arr.dump();
}

}  // namespace chaoscycle
