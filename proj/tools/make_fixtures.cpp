// Regenerates the fixture projects, replay transcripts and golden files under
// fixtures/. Run from the repository root after changing prompts, schemas or
// the scripted backend:
//
//   build/tools/chaoscycle-make-fixtures [fixtures-dir]
//
// Each scenario runs the full cycle against the scripted backend with a
// recording wrapper; the recorded transcript replays bit-identically.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "chaoscycle/experiment.hpp"
#include "chaoscycle/model_json.hpp"
#include "chaoscycle/pipeline.hpp"
#include "scripted_backend.hpp"

namespace fs = std::filesystem;
using namespace chaoscycle;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string skaffold_for(const std::vector<std::string>& paths) {
  std::string text = "apiVersion: skaffold/v2beta29\nkind: Config\ndeploy:\n  kubectl:\n    manifests:\n";
  for (const auto& p : paths) text += "      - " + p + "\n";
  return text;
}

const char* kNginxPod = R"(apiVersion: v1
kind: Pod
metadata:
  name: nginx
  labels:
    app: nginx
spec:
  restartPolicy: Never
  containers:
    - name: nginx
      image: nginx:1.17.2
      ports:
        - containerPort: 80
)";

const char* kNginxService = R"(apiVersion: v1
kind: Service
metadata:
  name: nginx-service
spec:
  type: ClusterIP
  selector:
    app: nginx
  ports:
    - port: 80
      protocol: TCP
      targetPort: 80
)";

const char* kNginxDeployment = R"(apiVersion: apps/v1
kind: Deployment
metadata:
  name: nginx
  labels:
    app: nginx
spec:
  replicas: 1
  selector:
    matchLabels:
      app: nginx
  template:
    metadata:
      labels:
        app: nginx
    spec:
      containers:
        - name: nginx
          image: nginx:1.17.2
          ports:
            - containerPort: 80
)";

std::string sockshop_deployment(const std::string& name, int replicas) {
  return "apiVersion: apps/v1\n"
         "kind: Deployment\n"
         "metadata:\n"
         "  name: " + name + "\n"
         "  labels:\n"
         "    name: " + name + "\n"
         "spec:\n"
         "  replicas: " + std::to_string(replicas) + "\n"
         "  selector:\n"
         "    matchLabels:\n"
         "      name: " + name + "\n"
         "  template:\n"
         "    metadata:\n"
         "      labels:\n"
         "        name: " + name + "\n"
         "    spec:\n"
         "      containers:\n"
         "        - name: " + name + "\n"
         "          image: weaveworksdemos/" + name + ":0.3.12\n"
         "          ports:\n"
         "            - containerPort: 8079\n";
}

std::string sockshop_service(const std::string& name) {
  return "apiVersion: v1\n"
         "kind: Service\n"
         "metadata:\n"
         "  name: " + name + "\n"
         "  labels:\n"
         "    name: " + name + "\n"
         "spec:\n"
         "  selector:\n"
         "    name: " + name + "\n"
         "  ports:\n"
         "    - port: 80\n"
         "      targetPort: 8079\n";
}

struct Scenario {
  std::string name;
  std::string project_dir;     // fixture folder name (may repeat across scenarios)
  std::string transcript;      // transcript file name
  std::string instructions;
  ScriptedMode mode = ScriptedMode::Standard;
  OutcomeKind expected = OutcomeKind::SatisfiedAfterImprovement;
  int expected_loops = 0;
  bool write_project = true;
  std::vector<std::pair<std::string, std::string>> files;
};

ProjectInput input_of(const Scenario& s) {
  ProjectInput input;
  input.instructions = s.instructions;
  for (const auto& [path, text] : s.files) {
    if (path == "skaffold.yaml") {
      input.deploy_config = text;
    } else {
      input.manifests.push_back({path, text});
    }
  }
  return input;
}

CycleConfig fixture_config() {
  CycleConfig config;
  config.backend = "replay";
  config.price_in_per_1k = 0.0025;
  config.price_out_per_1k = 0.01;
  config.max_loops = 3;
  config.max_steady_states = 4;
  config.seed = 42;
  return config;
}

std::string config_json_text(const CycleConfig& c) {
  const Json j{{"backend", c.backend},
               {"price_in_per_1k", c.price_in_per_1k},
               {"price_out_per_1k", c.price_out_per_1k},
               {"max_loops", c.max_loops},
               {"max_steady_states", c.max_steady_states},
               {"seed", c.seed},
               {"sim", Json{{"restart_delay_s", 5},
                            {"pod_startup_delay_s", 2},
                            {"base_latency_ms", 50.0}}}};
  return dump_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path fixtures_dir = argc > 1 ? argv[1] : "fixtures";

  const std::vector<std::pair<std::string, std::string>> nginx_files = {
      {"Pod.yml", kNginxPod},
      {"Service.yml", kNginxService},
      {"skaffold.yaml", skaffold_for({"Pod.yml", "Service.yml"})}};
  const std::vector<std::pair<std::string, std::string>> nginx_resilient_files = {
      {"Deployment.yml", kNginxDeployment},
      {"Service.yml", kNginxService},
      {"skaffold.yaml", skaffold_for({"Deployment.yml", "Service.yml"})}};
  const std::vector<std::pair<std::string, std::string>> sockshop_files = {
      {"carts-dep.yml", sockshop_deployment("carts", 2)},
      {"carts-svc.yml", sockshop_service("carts")},
      {"catalogue-dep.yml", sockshop_deployment("catalogue", 2)},
      {"catalogue-svc.yml", sockshop_service("catalogue")},
      {"front-end-dep.yml", sockshop_deployment("front-end", 1)},
      {"front-end-svc.yml", sockshop_service("front-end")},
      {"skaffold.yaml",
       skaffold_for({"carts-dep.yml", "carts-svc.yml", "catalogue-dep.yml",
                     "catalogue-svc.yml", "front-end-dep.yml", "front-end-svc.yml"})}};

  const std::string one_minute = "Keep each chaos experiment within one minute.";

  std::vector<Scenario> scenarios;
  scenarios.push_back({"nginx", "nginx", "nginx.jsonl", one_minute, ScriptedMode::Standard,
                       OutcomeKind::SatisfiedAfterImprovement, 1, true, nginx_files});
  scenarios.push_back({"nginx_resilient", "nginx_resilient", "nginx_resilient.jsonl",
                       one_minute, ScriptedMode::Standard, OutcomeKind::SatisfiedNoChange, 0,
                       true, nginx_resilient_files});
  scenarios.push_back(
      {"sockshop", "sockshop", "sockshop.jsonl",
       one_minute + " The storefront is served at http://front-end.default.svc.cluster.local/.",
       ScriptedMode::Standard, OutcomeKind::SatisfiedAfterImprovement, 1, true,
       sockshop_files});
  scenarios.push_back({"nginx_futile", "nginx", "nginx_futile.jsonl", one_minute,
                       ScriptedMode::FutileReconfig, OutcomeKind::Aborted, 0, false,
                       nginx_files});
  scenarios.push_back({"policy_reject", "nginx", "policy_reject.jsonl",
                       "Run the chaos experiment against the production cluster.",
                       ScriptedMode::Standard, OutcomeKind::Aborted, 0, false, nginx_files});

  write_file(fixtures_dir / "configs" / "replay.json", config_json_text(fixture_config()));

  bool ok = true;
  for (const auto& scenario : scenarios) {
    if (scenario.write_project) {
      for (const auto& [path, text] : scenario.files)
        write_file(fixtures_dir / scenario.project_dir / path, text);
    }
    const fs::path transcript = fixtures_dir / "transcripts" / scenario.transcript;
    fs::create_directories(transcript.parent_path());

    auto backend = make_recording_backend(make_scripted_backend(scenario.mode),
                                          transcript.string());
    const fs::path out_dir =
        fs::temp_directory_path() / "chaoscycle-fixgen" / scenario.name;
    fs::remove_all(out_dir);

    CycleConfig config = fixture_config();
    config.transcript = transcript.string();  // unused with the override, kept accurate
    const CycleRecord record =
        run_cycle(input_of(scenario), config, out_dir.string(), std::move(backend));

    const bool outcome_ok =
        record.outcome.kind == scenario.expected &&
        (scenario.expected != OutcomeKind::SatisfiedAfterImprovement ||
         record.outcome.loops == scenario.expected_loops);
    std::cout << (outcome_ok ? "ok   " : "FAIL ") << scenario.name << ": outcome "
              << to_string(record.outcome.kind)
              << (record.outcome.kind == OutcomeKind::Aborted
                      ? " (" + record.outcome.reason + ")"
                      : "")
              << ", " << record.loops.size() << " loop dir(s)\n";
    ok = ok && outcome_ok;

    if (scenario.name == "nginx" && !record.loops.empty()) {
      write_file(fixtures_dir / "golden" / "nginx-workflow.yaml",
                 workflow_to_chaos_mesh_yaml(record.loops[0].workflow));
    }
  }

  if (!ok) {
    std::cerr << "fixture generation hit unexpected outcomes\n";
    return 1;
  }
  std::cout << "fixtures written under " << fixtures_dir << "\n";
  return 0;
}
