#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "chaoscycle/config.hpp"
#include "chaoscycle/manifests.hpp"
#include "chaoscycle/model_json.hpp"
#include "chaoscycle/pipeline.hpp"

namespace fs = std::filesystem;
using namespace chaoscycle;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_yaml(const fs::path& path) {
  const auto ext = path.extension().string();
  return ext == ".yml" || ext == ".yaml";
}

bool is_deploy_config(const fs::path& path) {
  const auto stem = path.stem().string();
  return stem == "skaffold" && is_yaml(path);
}

// Collects manifests (every YAML that is not the skaffold config) plus the
// deploy config from a project folder.
ProjectInput load_project(const std::string& input_dir, const std::string& instructions) {
  if (!fs::is_directory(input_dir))
    fail(ErrorCode::UsageError, "input directory '" + input_dir + "' does not exist");

  ProjectInput input;
  input.instructions = instructions;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(input_dir)) {
    if (entry.is_regular_file() && is_yaml(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const auto rel = fs::relative(path, input_dir).generic_string();
    if (is_deploy_config(path)) {
      input.deploy_config = read_file(path);
    } else {
      input.manifests.push_back({rel, read_file(path)});
    }
  }
  if (input.deploy_config.empty())
    fail(ErrorCode::UsageError,
         "no skaffold.yaml/skaffold.yml deploy config under '" + input_dir + "'");
  return input;
}

int cmd_run(const std::string& input_dir, const std::string& config_path,
            const std::string& instructions, const std::string& out_dir,
            const std::string& backend, const std::string& transcript,
            std::optional<std::uint64_t> seed) {
  CycleConfig config;
  if (!config_path.empty()) config = load_config(config_path);
  if (!backend.empty()) config.backend = backend;
  if (!transcript.empty()) config.transcript = transcript;
  if (seed) config.seed = *seed;

  if (config.backend == "replay" && config.transcript.empty())
    fail(ErrorCode::UsageError, "--backend replay requires --transcript");
  if (config.backend == "http" && config.api_base.empty())
    fail(ErrorCode::UsageError, "http backend requires api_base in the config");

  const ProjectInput input = load_project(input_dir, instructions);
  validate_project_input(input);  // input problems are usage errors, not cycle aborts

  const CycleRecord record = run_cycle(input, config, out_dir);

  switch (record.outcome.kind) {
    case OutcomeKind::SatisfiedNoChange:
      std::cout << "outcome: satisfied, no reconfiguration needed\n";
      break;
    case OutcomeKind::SatisfiedAfterImprovement:
      std::cout << "outcome: satisfied after " << record.outcome.loops
                << " improvement loop(s)\n";
      break;
    case OutcomeKind::Aborted:
      std::cout << "outcome: aborted (" << record.outcome.reason << ")\n";
      break;
  }
  std::cout << "artifacts: " << out_dir << "\n";
  if (!record.summary.empty()) std::cout << "\n" << record.summary << "\n";
  return record.outcome.kind == OutcomeKind::Aborted ? 2 : 0;
}

int cmd_validate(const std::string& input_dir) {
  const ProjectInput input = load_project(input_dir, "");
  const ManifestSet set = validate_project_input(input);
  std::cout << set.resources.size() << " resource(s) in deploy order:\n";
  for (const auto& r : set.resources) {
    std::cout << "  " << r.kind_name << " " << r.ns << "/" << r.name << "  ["
              << set.source_paths.at(r.id()) << "]\n";
  }
  std::cout << "deploy order:";
  for (const auto& p : set.file_order) std::cout << " " << p;
  std::cout << "\n";
  return 0;
}

int cmd_report(const std::string& record_path, const std::string& format) {
  Json doc;
  try {
    doc = Json::parse(read_file(record_path));
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::MalformedDocument, record_path + ": " + e.what());
  }
  const CycleRecord record = cycle_record_from_json(doc);

  if (format == "json") {
    std::cout << dump_json(json_of(record.ledger));
    return 0;
  }

  // Table layout: All first, then the six phases.
  const LedgerRow totals = record.ledger.totals();
  const char* phase_labels[kPhaseCount] = {"Pre", "Hyp.", "Expt.", "Anlys.", "Imp.", "Post"};

  auto print_row = [&](const char* label, auto value_of) {
    std::printf("%-13s %12s", label, value_of(totals).c_str());
    for (int p = 0; p < kPhaseCount; ++p)
      std::printf(" %10s", value_of(record.ledger.rows[p]).c_str());
    std::printf("\n");
  };
  auto tokens_in = [](const LedgerRow& r) { return std::to_string(r.input_tokens); };
  auto tokens_out = [](const LedgerRow& r) { return std::to_string(r.output_tokens); };
  auto cost = [](const LedgerRow& r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", r.api_cost_usd);
    return std::string(buf);
  };
  auto wall = [](const LedgerRow& r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1fs", r.wall_time_s);
    return std::string(buf);
  };

  std::printf("%-13s %12s", "Metric", "All");
  for (const auto* label : phase_labels) std::printf(" %10s", label);
  std::printf("\n");
  print_row("Input tokens", tokens_in);
  print_row("Output tokens", tokens_out);
  print_row("API cost ($)", cost);
  print_row("Time", wall);

  switch (record.outcome.kind) {
    case OutcomeKind::SatisfiedNoChange:
      std::printf("Outcome: satisfied (no reconfiguration)\n");
      break;
    case OutcomeKind::SatisfiedAfterImprovement:
      std::printf("Outcome: satisfied after %d improvement loop(s)\n", record.outcome.loops);
      break;
    case OutcomeKind::Aborted:
      std::printf("Outcome: aborted (%s)\n", record.outcome.reason.c_str());
      break;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chaos-engineering cycle orchestrator"};
  app.require_subcommand(1);

  std::string input_dir, config_path, instructions, out_dir = "chaoscycle-out";
  std::string backend, transcript, record_path, format = "table";
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "run one chaos-engineering cycle");
  run->add_option("input_dir", input_dir, "folder with manifests and skaffold.yaml")
      ->required();
  run->add_option("--config", config_path, "cycle configuration JSON");
  run->add_option("--instructions", instructions, "free-text instructions");
  run->add_option("--out", out_dir, "artifact output directory");
  run->add_option("--backend", backend, "llm backend: http|replay")
      ->check(CLI::IsMember({"http", "replay"}));
  run->add_option("--transcript", transcript, "replay transcript (JSON lines)");
  run->add_option("--seed", seed, "simulator seed");

  auto* validate_cmd = app.add_subcommand("validate", "parse and print the manifest set");
  validate_cmd->add_option("input_dir", input_dir, "folder with manifests")->required();

  auto* report = app.add_subcommand("report", "render a cycle record's cost ledger");
  report->add_option("record", record_path, "record.json path")->required();
  report->add_option("--format", format, "table|json")
      ->check(CLI::IsMember({"table", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(input_dir, config_path, instructions, out_dir, backend, transcript, seed);
    if (validate_cmd->parsed()) return cmd_validate(input_dir);
    if (report->parsed()) return cmd_report(record_path, format);
  } catch (const CycleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
