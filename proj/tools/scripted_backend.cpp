#include "scripted_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <sstream>

#include "chaoscycle/model_json.hpp"
#include "chaoscycle/yaml_doc.hpp"

namespace chaoscycle {

namespace {

Json parse_or(const std::map<std::string, std::string>& context, const std::string& key,
              Json fallback) {
  auto it = context.find(key);
  if (it == context.end()) return fallback;
  try {
    return Json::parse(it->second);
  } catch (const Json::parse_error&) {
    return fallback;
  }
}

std::string text_of(const std::map<std::string, std::string>& context,
                    const std::string& key) {
  auto it = context.find(key);
  return it == context.end() ? std::string{} : it->second;
}

std::string first_url(const std::string& text) {
  static const std::regex url_re(R"(https?://[^\s"']+)");
  std::smatch m;
  if (std::regex_search(text, m, url_re)) return m[0];
  return "";
}

// Manifest file texts arrive as "--- path ---\n<text>" blocks.
std::vector<std::pair<std::string, std::string>> split_files(const std::string& blob) {
  std::vector<std::pair<std::string, std::string>> files;
  static const std::regex head_re(R"(^--- (.+) ---$)");
  std::istringstream in(blob);
  std::string line;
  std::string path;
  std::string body;
  auto flush = [&] {
    if (!path.empty()) files.emplace_back(path, body);
    body.clear();
  };
  while (std::getline(in, line)) {
    std::smatch m;
    if (std::regex_match(line, m, head_re)) {
      flush();
      path = m[1];
    } else {
      body += line + "\n";
    }
  }
  flush();
  return files;
}

struct ResourceInfo {
  std::string kind;
  std::string name;
  std::string ns = "default";
  Json labels = Json::object();
  Json template_labels = Json::object();
  std::string restart_policy;
  int replicas = -1;
};

std::vector<ResourceInfo> resources_of(const Json& overview) {
  std::vector<ResourceInfo> out;
  if (!overview.is_array()) return out;
  for (const auto& r : overview) {
    ResourceInfo info;
    info.kind = r.value("kind", std::string{});
    info.name = r.value("name", std::string{});
    info.ns = r.value("namespace", std::string("default"));
    info.labels = r.value("labels", Json::object());
    info.template_labels = r.value("podTemplateLabels", Json::object());
    info.restart_policy = r.value("restartPolicy", std::string{});
    info.replicas = r.value("replicas", -1);
    out.push_back(std::move(info));
  }
  return out;
}

Json selector_of(const ResourceInfo& r) {
  return r.kind == "Pod" ? r.labels : r.template_labels;
}

// --- per-role answers -------------------------------------------------------

Json answer_summaries(const Json& overview) {
  Json out = Json::array();
  for (const auto& r : resources_of(overview)) {
    std::string s = r.kind + " '" + r.name + "' in namespace " + r.ns;
    if (r.kind == "Pod")
      s += " with restartPolicy " + (r.restart_policy.empty() ? "Always" : r.restart_policy);
    if (r.kind == "Deployment") s += " with " + std::to_string(r.replicas) + " replica(s)";
    if (r.kind == "Service") s += " routing traffic to its selector";
    out.push_back(s + ".");
  }
  return Json{{"summaries", out}};
}

Json answer_issues(const Json& overview) {
  Json issues = Json::array();
  for (const auto& r : resources_of(overview)) {
    if (r.kind == "Pod" && r.restart_policy == "Never")
      issues.push_back("Pod '" + r.name +
                       "' sets restartPolicy Never; once it goes down it never restarts, "
                       "so any pod loss causes an extended outage.");
    if (r.kind == "Deployment" && r.replicas == 1)
      issues.push_back("Deployment '" + r.name +
                       "' runs a single replica; losing its pod leaves the service "
                       "unbacked until the replacement starts.");
  }
  return Json{{"issues", issues}};
}

Json answer_application(const Json& overview) {
  bool nginx = false;
  bool shop = false;
  for (const auto& r : resources_of(overview)) {
    if (r.name.find("nginx") != std::string::npos) nginx = true;
    if (r.name.find("front-end") != std::string::npos ||
        r.name.find("catalogue") != std::string::npos)
      shop = true;
  }
  if (nginx) return Json{{"application", "static web server"}};
  if (shop) return Json{{"application", "e-commerce storefront"}};
  return Json{{"application", "containerized service"}};
}

Json answer_policy(const std::string& instructions) {
  static const std::vector<std::string> refusals = {
      "production cluster", "disable monitoring", "bypass the safeguard",
      "hide the results"};
  std::string lowered = instructions;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (const auto& bad : refusals) {
    if (lowered.find(bad) != std::string::npos) {
      return Json{{"allowed", false},
                  {"reason", "instructions request '" + bad +
                                 "', outside the development-environment scope"},
                  {"sanitized_instructions", ""}};
    }
  }
  std::string trimmed = instructions;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
    trimmed.pop_back();
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
    trimmed.erase(trimmed.begin());
  return Json{{"allowed", true}, {"reason", "no policy concern"},
              {"sanitized_instructions", trimmed}};
}

Json probe_json(const std::string& tool, const Json& selector, const std::string& ns,
                const std::string& url, const std::string& quantity) {
  Json probe{{"tool", tool}};
  if (tool == "cluster_api") {
    probe["selector"] = selector;
    probe["namespace"] = ns;
  } else {
    probe["url"] = url;
    probe["virtual_users"] = 10;
  }
  probe["quantity"] = quantity;
  probe["sample_interval_s"] = 1;
  probe["duration_s"] = 10;
  return probe;
}

Json answer_state_draft(const Json& overview, const Json& existing,
                        const std::string& instructions) {
  const auto resources = resources_of(overview);
  std::vector<std::string> existing_names;
  for (const auto& s : existing) existing_names.push_back(s.value("name", std::string{}));
  auto taken = [&](const std::string& name) {
    return std::find(existing_names.begin(), existing_names.end(), name) !=
           existing_names.end();
  };
  const std::string url = first_url(instructions);

  // first: availability of the weakest pod-backed resource
  const ResourceInfo* standalone_pod = nullptr;
  const ResourceInfo* weakest_dep = nullptr;
  for (const auto& r : resources) {
    if (r.kind == "Pod" && !standalone_pod) standalone_pod = &r;
    if (r.kind == "Deployment" &&
        (!weakest_dep || r.replicas < weakest_dep->replicas))
      weakest_dep = &r;
  }

  if (standalone_pod && !taken("pod-availability")) {
    return Json{{"name", "pod-availability"},
                {"description", "the Pod backing the service stays scheduled and running"},
                {"probe", probe_json("cluster_api", selector_of(*standalone_pod),
                                     standalone_pod->ns, "", "pod_count")}};
  }
  if (weakest_dep && !taken(weakest_dep->name + "-ready-replicas")) {
    return Json{{"name", weakest_dep->name + "-ready-replicas"},
                {"description",
                 "the " + weakest_dep->name + " deployment keeps at least one ready replica"},
                {"probe", probe_json("cluster_api", selector_of(*weakest_dep),
                                     weakest_dep->ns, "", "ready_replica_count")}};
  }
  if (!url.empty() && !taken("http-success-rate")) {
    return Json{{"name", "http-success-rate"},
                {"description", "requests against the storefront keep succeeding"},
                {"probe", probe_json("http_load", Json::object(), "", url, "success_rate")}};
  }
  if (!url.empty() && !taken("http-latency-p95")) {
    return Json{{"name", "http-latency-p95"},
                {"description", "the storefront answers within its latency budget"},
                {"probe", probe_json("http_load", Json::object(), "", url, "latency_p95_ms")}};
  }
  // nothing new to measure: repeat the first proposal (callers dedup)
  if (standalone_pod) {
    return Json{{"name", "pod-availability"},
                {"description", "the Pod stays running"},
                {"probe", probe_json("cluster_api", selector_of(*standalone_pod),
                                     standalone_pod->ns, "", "pod_count")}};
  }
  return Json{{"name", "service-availability"},
              {"description", "the service keeps a running pod"},
              {"probe", probe_json("cluster_api", Json{{"app", "unknown"}}, "default", "",
                                   "pod_count")}};
}

Json answer_probe_script(const Json& probe) {
  if (probe.value("tool", std::string{}) == "cluster_api") {
    std::string selector;
    for (auto it = probe.at("selector").begin(); it != probe.at("selector").end(); ++it)
      selector += (selector.empty() ? "" : ",") + it.key() + "=" +
                  it.value().get<std::string>();
    return Json{{"script",
                 "def inspect(duration):\n"
                 "    for i in range(duration):\n"
                 "        pods = v1.list_namespaced_pod(namespace='" +
                     probe.value("namespace", std::string("default")) +
                     "', label_selector='" + selector + "')\n"
                     "        print(f\"current pod count: {len(pods.items)}\")\n"
                     "        time.sleep(1)\n"}};
  }
  return Json{{"script",
               "export const options = { vus: " +
                   std::to_string(probe.value("virtual_users", 10)) +
                   ", duration: '" + std::to_string(probe.value("duration_s", 10)) +
                   "s' };\n"
                   "export default function () {\n"
                   "  const res = http.get('" + probe.value("url", std::string{}) +
                   "');\n"
                   "  check(res, { 'status was 200': (r) => r.status == 200 });\n"
                   "  sleep(1);\n"
                   "}\n"}};
}

Json answer_threshold(const std::string& quantity, const Json& samples) {
  if (quantity == "success_rate")
    return Json{{"comparator", "ge"}, {"value", 0.95}, {"aggregation", "every_sample"}};
  if (quantity == "latency_p95_ms")
    return Json{{"comparator", "lt"}, {"value", 500}, {"aggregation", "p95"}};
  double min_value = 0.0;
  bool first = true;
  for (const auto& s : samples) {
    const double v = s.value("value", 0.0);
    if (first || v < min_value) min_value = v;
    first = false;
  }
  return Json{{"comparator", "ge"},
              {"value", std::max(1.0, std::floor(min_value))},
              {"aggregation", "every_sample"}};
}

Json answer_vac_script(const std::map<std::string, std::string>& context) {
  const Json threshold = parse_or(context, "threshold", Json::object());
  return Json{{"script", text_of(context, "inspection_script") + "assert value " +
                             threshold.value("comparator", std::string("ge")) + " " +
                             threshold.value("value", Json(0)).dump() +
                             ", \"steady state was violated\"\n"}};
}

Json answer_sufficiency(const std::string& brief, const Json& states) {
  const bool small_system = brief.find("static web server") != std::string::npos;
  const size_t want = small_system ? 1 : 3;
  if (states.size() >= want)
    return Json{{"enough", true},
                {"reason", "the defined states cover availability and user-visible traffic"}};
  return Json{{"enough", false}, {"reason", "user-visible behavior is not yet measured"}};
}

Json answer_scenario(const std::string& brief) {
  if (brief.find("static web server") != std::string::npos) {
    return Json{{"narrative", "cyberattack pod takedown"},
                {"faults", Json::array({Json{{"name", "nginx-pod-kill"},
                                             {"kind", "PodChaos"},
                                             {"subtype", "pod-kill"}}})}};
  }
  return Json{{"narrative", "Black Friday sale traffic surge"},
              {"faults", Json::array({Json{{"name", "front-end-cpu-stress"},
                                           {"kind", "StressChaos"},
                                           {"subtype", "cpu"}},
                                      Json{{"name", "front-end-pod-kill"},
                                           {"kind", "PodChaos"},
                                           {"subtype", "pod-kill"}}})}};
}

Json refined_fault(const Json& draft, const Json& overview) {
  const auto resources = resources_of(overview);
  const std::string name = draft.value("name", std::string{});
  const ResourceInfo* target = nullptr;
  for (const auto& r : resources) {
    if (r.kind != "Pod" && r.kind != "Deployment") continue;
    if (name.find(r.name) != std::string::npos) target = &r;
  }
  if (!target) {
    for (const auto& r : resources)
      if (r.kind == "Pod" || r.kind == "Deployment") {
        target = &r;
        break;
      }
  }
  Json selector{{"labels", target ? selector_of(*target) : Json::object()},
                {"namespace", target ? target->ns : "default"},
                {"mode", "one"}};
  Json params = Json::object();
  const std::string subtype = draft.value("subtype", std::string{});
  if (subtype == "pod-kill") params["kill_grace_s"] = 0;
  if (subtype == "cpu") params["cpu_workers"] = 2;
  if (subtype == "delay") params["delay_ms"] = 800;
  if (subtype == "loss") params["loss_pct"] = 30.0;
  return Json{{"name", name},
              {"kind", draft.value("kind", std::string{})},
              {"subtype", subtype},
              {"selector", selector},
              {"params", params}};
}

Json answer_stage_durations(const std::string& constraint) {
  static const std::regex limit_re(R"((\d+) seconds)");
  std::smatch m;
  if (std::regex_search(constraint, m, limit_re)) {
    const int total = std::stoi(m[1]);
    return Json{{"pre_s", total / 4}, {"fault_s", total / 2}, {"post_s", total / 4}};
  }
  return Json{{"pre_s", 20}, {"fault_s", 40}, {"post_s", 20}};
}

Json answer_schedule(const Json& stages, const Json& states, const Json& probes,
                     const Json& fault_names) {
  const int pre_s = stages.value("pre_s", 15);
  const int fault_s = stages.value("fault_s", 30);
  const int post_s = stages.value("post_s", 15);
  Json items = Json::array();
  auto vac_item = [&](const std::string& stage, const std::string& name, int stage_s,
                      int want) {
    const Json probe = probes.value(name, Json::object());
    const int duration = std::min(want > 0 ? want : probe.value("duration_s", 10), stage_s);
    items.push_back(Json{{"stage", stage},
                         {"task", "run_vac"},
                         {"ref", name},
                         {"start_offset_s", 0},
                         {"duration_s", duration}});
  };
  for (const auto& s : states) vac_item("pre", s.value("name", std::string{}), pre_s, 0);
  for (const auto& f : fault_names) {
    items.push_back(Json{{"stage", "fault"},
                         {"task", "inject_fault"},
                         {"ref", f.get<std::string>()},
                         {"start_offset_s", 0},
                         {"duration_s", fault_s}});
  }
  // validate user-visible traffic concurrently with the faults
  for (const auto& s : states) {
    if (s.value("quantity", std::string{}) == "success_rate")
      vac_item("fault", s.value("name", std::string{}), fault_s, 20);
  }
  for (const auto& s : states) vac_item("post", s.value("name", std::string{}), post_s, 0);
  return Json{{"items", items}};
}

Json answer_timeline(const Json& stages, const Json& items) {
  std::string text = "Three-stage chaos experiment: pre-validation (" +
                     std::to_string(stages.value("pre_s", 0)) + "s), fault injection (" +
                     std::to_string(stages.value("fault_s", 0)) + "s), post-validation (" +
                     std::to_string(stages.value("post_s", 0)) + "s).";
  std::string pre, fault, post;
  for (const auto& item : items) {
    const std::string stage = item.value("stage", std::string{});
    const std::string entry = item.value("ref", std::string{}) + " at +" +
                              std::to_string(item.value("start_offset_s", 0)) + "s for " +
                              std::to_string(item.value("duration_s", 0)) + "s";
    auto& bucket = stage == "pre" ? pre : stage == "fault" ? fault : post;
    bucket += (bucket.empty() ? "" : "; ") + entry;
  }
  text += " Pre: " + pre + ". Fault: " + fault + ". Post: " + post + ".";
  return Json{{"summary", text}};
}

Json answer_replan(const std::map<std::string, std::string>& context) {
  const Json new_overview = parse_or(context, "new_resources", Json::array());
  const Json current_probes = parse_or(context, "current_probes", Json::object());
  const Json current_faults = parse_or(context, "current_faults", Json::array());
  const auto resources = resources_of(new_overview);

  // label sets that back pods in the new manifests
  auto resolves = [&](const Json& selector, const std::string& ns) {
    for (const auto& r : resources) {
      if (r.kind != "Pod" && r.kind != "Deployment") continue;
      if (r.ns != ns) continue;
      const Json labels = selector_of(r);
      bool all = !selector.empty();
      for (auto it = selector.begin(); it != selector.end(); ++it) {
        if (!labels.contains(it.key()) || labels.at(it.key()) != it.value()) all = false;
      }
      if (all) return true;
    }
    return false;
  };
  // remap an unresolvable selector to the label set sharing the most keys
  auto remap = [&](const Json& selector, const std::string& ns) -> Json {
    if (resolves(selector, ns)) return selector;
    Json best = selector;
    int best_overlap = -1;
    for (const auto& r : resources) {
      if (r.kind != "Pod" && r.kind != "Deployment") continue;
      if (r.ns != ns) continue;
      const Json labels = selector_of(r);
      if (labels.empty()) continue;
      int overlap = 0;
      for (auto it = selector.begin(); it != selector.end(); ++it)
        if (labels.contains(it.key())) ++overlap;
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = labels;
      }
    }
    return best;
  };

  Json probes = Json::array();
  for (auto it = current_probes.begin(); it != current_probes.end(); ++it) {
    Json probe = it.value();
    if (probe.value("tool", std::string{}) == "cluster_api") {
      probe["selector"] =
          remap(probe.value("selector", Json::object()),
                probe.value("namespace", std::string("default")));
    }
    probes.push_back(Json{{"steady_state", it.key()}, {"probe", probe}});
  }
  Json faults = Json::array();
  for (const auto& f : current_faults) {
    Json fault = f;
    auto& selector = fault.at("selector");
    selector["labels"] = remap(selector.value("labels", Json::object()),
                               selector.value("namespace", std::string("default")));
    faults.push_back(fault);
  }
  return Json{{"probes", probes}, {"faults", faults}};
}

Json answer_analysis(const std::map<std::string, std::string>& context) {
  const Json failed = parse_or(context, "failed", Json::array());
  const std::string manifests = text_of(context, "manifests");
  Json causes = Json::array();
  Json countermeasures = Json::array();

  bool pod_count_zero = false;
  bool success_drop = false;
  for (const auto& f : failed) {
    const std::string log = f.value("log", std::string{});
    if (log.find("current pod count: 0") != std::string::npos) pod_count_zero = true;
    if (log.find("current ready replicas: 0") != std::string::npos) pod_count_zero = true;
    if (log.find("current success rate: 0.") != std::string::npos) success_drop = true;
  }
  if (pod_count_zero && manifests.find("restartPolicy: Never") != std::string::npos) {
    causes.push_back(
        "the standalone Pod is configured with restartPolicy Never, so after the "
        "pod-kill fault nothing restores it and the pod count stays at zero");
    countermeasures.push_back(
        "replace the Pod with a Deployment resource whose controller recreates "
        "failed pods");
  }
  if (success_drop && manifests.find("replicas: 1") != std::string::npos) {
    causes.push_back(
        "the front-end deployment runs replicas: 1, so killing its only pod leaves "
        "the service unbacked and requests fail until the replacement starts");
    countermeasures.push_back(
        "increase the number of replicas of the front-end deployment so a surviving "
        "pod keeps serving during the fault");
  }
  if (causes.empty()) {
    causes.push_back("a steady state was violated while the faults were active");
    countermeasures.push_back("add redundancy to the affected resource");
  }
  return Json{{"causes", causes}, {"countermeasures", countermeasures}};
}

// Builds the Deployment document replacing a defective standalone Pod.
std::string deployment_text_for(const Json& pod_doc) {
  const Json meta = pod_doc.value("metadata", Json::object());
  const std::string name = meta.value("name", std::string("app"));
  Json labels = meta.value("labels", Json::object());
  if (labels.empty()) labels = Json{{"app", name}};

  Json pod_spec = pod_doc.value("spec", Json::object());
  pod_spec.erase("restartPolicy");  // Deployment pods default to Always

  const Json deployment{
      {"apiVersion", "apps/v1"},
      {"kind", "Deployment"},
      {"metadata", Json{{"name", name}, {"labels", labels}}},
      {"spec", Json{{"replicas", 1},
                    {"selector", Json{{"matchLabels", labels}}},
                    {"template", Json{{"metadata", Json{{"labels", labels}}},
                                      {"spec", pod_spec}}}}}};
  return emit_yaml(deployment);
}

Json answer_reconfigure(const std::map<std::string, std::string>& context,
                        ScriptedMode mode) {
  const auto files = split_files(text_of(context, "manifests"));
  const Json history = parse_or(context, "history", Json::array());

  if (mode == ScriptedMode::FutileReconfig) {
    // keep the defect, shuffle cosmetic labels so every proposal is distinct
    for (const auto& [path, text] : files) {
      const auto docs = parse_yaml_documents(text, path);
      if (docs.empty() || docs[0].value("kind", std::string{}) != "Pod") continue;
      Json doc = docs[0];
      doc["metadata"]["labels"]["tweak"] = "v" + std::to_string(history.size() + 1);
      return Json{{"ops", Json::array({Json{{"op", "replace"},
                                            {"path", path},
                                            {"text", emit_yaml(doc)}}})},
                  {"rationale", "retry with refreshed labels"}};
    }
  }

  // restartPolicy Never on a standalone Pod: swap it for a Deployment
  for (const auto& [path, text] : files) {
    const auto docs = parse_yaml_documents(text, path);
    if (docs.empty()) continue;
    const Json& doc = docs[0];
    if (doc.value("kind", std::string{}) != "Pod") continue;
    if (doc.value("spec", Json::object()).value("restartPolicy", std::string{}) != "Never")
      continue;
    std::string dep_path = path;
    const auto pos = dep_path.rfind("Pod");
    if (pos != std::string::npos) {
      dep_path.replace(pos, 3, "Deployment");
    } else {
      dep_path = "deployment-" + dep_path;
    }
    return Json{
        {"ops", Json::array({Json{{"op", "delete"}, {"path", path}},
                             Json{{"op", "create"},
                                  {"path", dep_path},
                                  {"text", deployment_text_for(doc)}}})},
        {"rationale",
         "a Deployment controller restores killed pods, unlike a bare Pod with "
         "restartPolicy Never"}};
  }

  // single-replica deployment: raise replicas by one
  for (const auto& [path, text] : files) {
    const auto docs = parse_yaml_documents(text, path);
    if (docs.empty()) continue;
    Json doc = docs[0];
    if (doc.value("kind", std::string{}) != "Deployment") continue;
    const int replicas = doc.value("spec", Json::object()).value("replicas", 1);
    if (replicas != 1) continue;
    doc["spec"]["replicas"] = replicas + 1;
    return Json{{"ops", Json::array({Json{{"op", "replace"},
                                          {"path", path},
                                          {"text", emit_yaml(doc)}}})},
                {"rationale", "one more replica keeps the service backed while a pod "
                              "is being replaced"}};
  }

  // fallback: bump the first deployment found
  for (const auto& [path, text] : files) {
    const auto docs = parse_yaml_documents(text, path);
    if (docs.empty()) continue;
    Json doc = docs[0];
    if (doc.value("kind", std::string{}) != "Deployment") continue;
    doc["spec"]["replicas"] = doc["spec"].value("replicas", 1) + 1;
    return Json{{"ops", Json::array({Json{{"op", "replace"},
                                          {"path", path},
                                          {"text", emit_yaml(doc)}}})},
                {"rationale", "increase redundancy of the remaining deployment"}};
  }
  return Json{{"ops", Json::array({Json{{"op", "delete"}, {"path", "nonexistent.yml"}}})},
              {"rationale", "nothing left to reconfigure"}};
}

Json answer_summary(const std::map<std::string, std::string>& context) {
  const Json states = parse_or(context, "states", Json::array());
  std::string names;
  for (const auto& s : states) {
    if (!names.empty()) names += ", ";
    names += s.get<std::string>();
  }
  const std::string text =
      "Chaos-engineering cycle for the " + text_of(context, "application") +
      ": steady states " + names + " were defined and tested against the scenario '" +
      text_of(context, "narrative") + "'. Result: " + text_of(context, "outcome") +
      " after " + text_of(context, "improvement_loops") + " improvement loop(s).";
  return Json{{"summary", text}};
}

// ----------------------------------------------------------------------------

class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(ScriptedMode mode) : mode_(mode) {}

  BackendResult complete(const BackendRequest& request) override {
    const auto& ctx = request.context;
    Json output;
    switch (request.role) {
      case AgentRole::ContextSummarizer:
        output = answer_summaries(parse_or(ctx, "resources", Json::array()));
        break;
      case AgentRole::IssueSpotter:
        output = answer_issues(parse_or(ctx, "resources", Json::array()));
        break;
      case AgentRole::AppGuesser:
        output = answer_application(parse_or(ctx, "resources", Json::array()));
        break;
      case AgentRole::PolicyFilter:
        output = answer_policy(text_of(ctx, "instructions"));
        break;
      case AgentRole::StateDrafter:
        output = answer_state_draft(parse_or(ctx, "resources", Json::array()),
                                    parse_or(ctx, "existing_states", Json::array()),
                                    text_of(ctx, "instructions"));
        break;
      case AgentRole::ProbeWriter:
        output = answer_probe_script(parse_or(ctx, "probe", Json::object()));
        break;
      case AgentRole::ThresholdSetter:
        output = answer_threshold(text_of(ctx, "quantity"),
                                  parse_or(ctx, "baseline_samples", Json::array()));
        break;
      case AgentRole::VaCBuilder:
        output = answer_vac_script(ctx);
        break;
      case AgentRole::SufficiencyJudge:
        output = answer_sufficiency(text_of(ctx, "context"),
                                    parse_or(ctx, "states", Json::array()));
        break;
      case AgentRole::ScenarioDrafter:
        output = answer_scenario(text_of(ctx, "context"));
        break;
      case AgentRole::FaultRefiner: {
        Json faults = Json::array();
        for (const auto& draft : parse_or(ctx, "draft_faults", Json::array()))
          faults.push_back(refined_fault(draft, parse_or(ctx, "resources", Json::array())));
        output = Json{{"faults", faults}};
        break;
      }
      case AgentRole::StagePlanner:
        output = answer_stage_durations(text_of(ctx, "constraint"));
        break;
      case AgentRole::ItemScheduler:
        output = answer_schedule(parse_or(ctx, "stages", Json::object()),
                                 parse_or(ctx, "states", Json::array()),
                                 parse_or(ctx, "probes", Json::object()),
                                 parse_or(ctx, "faults", Json::array()));
        break;
      case AgentRole::TimelineWriter:
        output = answer_timeline(parse_or(ctx, "stages", Json::object()),
                                 parse_or(ctx, "items", Json::array()));
        break;
      case AgentRole::Replanner:
        output = answer_replan(ctx);
        break;
      case AgentRole::FailureAnalyst:
        output = answer_analysis(ctx);
        break;
      case AgentRole::Reconfigurer:
        output = answer_reconfigure(ctx, mode_);
        break;
      case AgentRole::Summarizer:
        output = answer_summary(ctx);
        break;
    }
    BackendResult result;
    result.output_text = output.dump();
    result.input_tokens =
        estimate_tokens(request.system_prompt) + estimate_tokens(request.user_prompt);
    result.output_tokens = estimate_tokens(result.output_text);
    return result;
  }

  std::string name() const override { return "scripted"; }

 private:
  ScriptedMode mode_;
};

}  // namespace

std::unique_ptr<Backend> make_scripted_backend(ScriptedMode mode) {
  return std::make_unique<ScriptedBackend>(mode);
}

}  // namespace chaoscycle
