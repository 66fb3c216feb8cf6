#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "chaoscycle/gateway.hpp"
#include "chaoscycle/manifests.hpp"
#include "chaoscycle/model.hpp"

// Shared helpers for loading the committed fixtures and building small
// in-memory projects.

namespace chaoscycle::testing {

inline std::filesystem::path repo_root() {
  const char* env = std::getenv("CHAOSCYCLE_REPO");
  return env ? std::filesystem::path(env) : std::filesystem::current_path();
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Loads a fixture project folder the same way the CLI does.
inline ProjectInput load_fixture_project(const std::string& name,
                                         const std::string& instructions) {
  namespace fs = std::filesystem;
  const fs::path dir = repo_root() / "fixtures" / name;
  ProjectInput input;
  input.instructions = instructions;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const auto rel = fs::relative(path, dir).generic_string();
    if (rel == "skaffold.yaml" || rel == "skaffold.yml") {
      input.deploy_config = read_file(path);
    } else {
      input.manifests.push_back({rel, read_file(path)});
    }
  }
  return input;
}

inline const char* kOneMinute = "Keep each chaos experiment within one minute.";
inline const char* kSockShopInstructions =
    "Keep each chaos experiment within one minute. The storefront is served at "
    "http://front-end.default.svc.cluster.local/.";

inline ProjectInput nginx_input() { return load_fixture_project("nginx", kOneMinute); }
inline ProjectInput nginx_resilient_input() {
  return load_fixture_project("nginx_resilient", kOneMinute);
}
inline ProjectInput sockshop_input() {
  return load_fixture_project("sockshop", kSockShopInstructions);
}

inline ManifestSet nginx_set() { return validate_project_input(nginx_input()); }
inline ManifestSet sockshop_set() { return validate_project_input(sockshop_input()); }

// Backend serving a fixed cycle of canned outputs for one role and deferring
// to an inner backend for the rest; exercises retry and guard paths.
class OverrideBackend final : public Backend {
 public:
  OverrideBackend(std::unique_ptr<Backend> inner, AgentRole role,
                  std::vector<Json> outputs)
      : inner_(std::move(inner)), role_(role), outputs_(std::move(outputs)) {}

  BackendResult complete(const BackendRequest& request) override {
    if (request.role != role_) return inner_->complete(request);
    const Json& output = outputs_[std::min(served_, outputs_.size() - 1)];
    ++served_;
    BackendResult result;
    result.output_text = output.dump();
    result.input_tokens = estimate_tokens(request.user_prompt);
    result.output_tokens = estimate_tokens(result.output_text);
    return result;
  }

  std::string name() const override { return "override(" + inner_->name() + ")"; }
  size_t served() const { return served_; }

 private:
  std::unique_ptr<Backend> inner_;
  AgentRole role_;
  std::vector<Json> outputs_;
  size_t served_ = 0;
};

// Counts per-call usages independently of the gateway's ledger recorder.
class CountingBackend final : public Backend {
 public:
  explicit CountingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}

  BackendResult complete(const BackendRequest& request) override {
    BackendResult result = inner_->complete(request);
    ++calls;
    input_tokens += result.input_tokens;
    output_tokens += result.output_tokens;
    return result;
  }

  std::string name() const override { return "counting(" + inner_->name() + ")"; }

  long long calls = 0;
  long long input_tokens = 0;
  long long output_tokens = 0;

 private:
  std::shared_ptr<Backend> inner_;
};

inline Gateway make_gateway(std::shared_ptr<Backend> backend,
                            std::shared_ptr<UsageRecorder> recorder = nullptr) {
  return Gateway(std::move(backend), PriceConfig{0.0025, 0.01},
                 recorder ? recorder : std::make_shared<UsageRecorder>());
}

}  // namespace chaoscycle::testing
