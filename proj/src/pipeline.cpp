#include "chaoscycle/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>

#include "chaoscycle/experiment.hpp"
#include "chaoscycle/hypothesis.hpp"
#include "chaoscycle/model_json.hpp"
#include "chaoscycle/prompt_context.hpp"

namespace chaoscycle {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

AgentCall make_call(AgentRole role, std::map<std::string, std::string> context) {
  AgentCall call;
  call.role = role;
  call.prompt_context = std::move(context);
  call.output_schema = schema_id_for(role);
  return call;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << text;
}

class PhaseTimer {
 public:
  PhaseTimer(Gateway& gateway, Phase phase)
      : gateway_(gateway), phase_(phase), start_(std::chrono::steady_clock::now()) {}
  ~PhaseTimer() {
    if (!gateway_.recorder()) return;
    Usage mechanical;
    mechanical.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    gateway_.recorder()->record(phase_, mechanical);
  }

 private:
  Gateway& gateway_;
  Phase phase_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

bool instructions_denylisted(const std::string& instructions, std::string& reason) {
  static const std::vector<std::string> denylist = {
      "delete all", "credential", "exfiltrate", "rm -rf", "drop table", "wipe the"};
  const std::string lowered = lowercase(instructions);
  for (const auto& term : denylist) {
    if (lowered.find(term) != std::string::npos) {
      reason = "instructions contain denied phrase '" + term + "'";
      return true;
    }
  }
  return false;
}

std::optional<int> constraint_from_instructions(const std::string& instructions) {
  const std::string lowered = lowercase(instructions);
  if (lowered.find("within one minute") != std::string::npos ||
      lowered.find("within a minute") != std::string::npos)
    return 60;
  static const std::regex seconds_re(R"(within (\d+) seconds?)");
  static const std::regex minutes_re(R"(within (\d+) minutes?)");
  std::smatch m;
  if (std::regex_search(lowered, m, seconds_re)) return std::stoi(m[1]);
  if (std::regex_search(lowered, m, minutes_re)) return std::stoi(m[1]) * 60;
  return std::nullopt;
}

ProcessedContext preprocess(const ProjectInput& input, const ManifestSet& set,
                            Gateway& gateway, const std::function<void()>& deploy) {
  ProcessedContext ctx;

  std::string deny_reason;
  if (instructions_denylisted(input.instructions, deny_reason)) {
    ctx.rejection = deny_reason;
    return ctx;
  }

  bool instructions_blank = true;
  for (char c : input.instructions)
    if (!std::isspace(static_cast<unsigned char>(c))) instructions_blank = false;

  if (!instructions_blank) {
    try {
      auto call = make_call(AgentRole::PolicyFilter, {{"instructions", input.instructions}});
      const auto reply = gateway.complete_structured(call, Phase::Pre);
      ctx.sanitized_instructions =
          reply.parsed.at("sanitized_instructions").get<std::string>();
    } catch (const CycleError& e) {
      if (e.code() == ErrorCode::PolicyRejected) {
        ctx = ProcessedContext{};
        ctx.rejection = e.what();
        return ctx;
      }
      throw;
    }
  }

  deploy();

  // context filling: summaries (one per resource, checked), issues, app guess
  std::map<std::string, std::string> summary_context{
      {"resources", resources_overview(set)}, {"manifests", manifest_files_text(set)}};
  std::string problem;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto call = make_call(AgentRole::ContextSummarizer, summary_context);
    const auto reply = gateway.complete_structured(call, Phase::Pre);
    ctx.summaries = reply.parsed.at("summaries").get<std::vector<std::string>>();
    if (ctx.summaries.size() == set.resources.size()) {
      problem.clear();
      break;
    }
    problem = "expected " + std::to_string(set.resources.size()) + " summaries, got " +
              std::to_string(ctx.summaries.size());
    summary_context["validation_feedback"] = problem;
  }
  if (!problem.empty()) fail(ErrorCode::SchemaViolationExhausted, problem);

  auto issues_call = make_call(AgentRole::IssueSpotter,
                               {{"resources", resources_overview(set)},
                                {"manifests", manifest_files_text(set)}});
  ctx.potential_issues = gateway.complete_structured(issues_call, Phase::Pre)
                             .parsed.at("issues")
                             .get<std::vector<std::string>>();

  auto guess_call =
      make_call(AgentRole::AppGuesser, {{"resources", resources_overview(set)}});
  ctx.application_guess = gateway.complete_structured(guess_call, Phase::Pre)
                              .parsed.at("application")
                              .get<std::string>();
  return ctx;
}

std::string summarize_cycle(const CycleRecord& record, Gateway& gateway) {
  if (!record.hypothesis)
    fail(ErrorCode::InvalidValue, "summary requires a completed hypothesis");

  std::vector<std::string> names;
  for (const auto& s : record.hypothesis->steady_states) names.push_back(s.name);
  const std::string narrative = record.hypothesis->scenario.narrative;

  int improvement_loops = 0;
  for (const auto& loop : record.loops)
    if (loop.reconfiguration) ++improvement_loops;

  std::string outcome_text;
  switch (record.outcome.kind) {
    case OutcomeKind::SatisfiedNoChange:
      outcome_text = "hypothesis satisfied without reconfiguration";
      break;
    case OutcomeKind::SatisfiedAfterImprovement:
      outcome_text = "hypothesis satisfied after improvement";
      break;
    case OutcomeKind::Aborted:
      outcome_text = "aborted: " + record.outcome.reason;
      break;
  }

  Json names_json = Json::array();
  for (const auto& n : names) names_json.push_back(n);
  std::map<std::string, std::string> context{
      {"application", record.context.application_guess},
      {"states", names_json.dump()},
      {"narrative", narrative},
      {"outcome", outcome_text},
      {"improvement_loops", std::to_string(improvement_loops)},
      {"instructions", record.context.sanitized_instructions}};

  std::string problem;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto call = make_call(AgentRole::Summarizer, context);
    const auto reply = gateway.complete_structured(call, Phase::Post);
    const auto summary = reply.parsed.at("summary").get<std::string>();

    std::vector<std::string> missing;
    for (const auto& n : names)
      if (summary.find(n) == std::string::npos) missing.push_back("steady state " + n);
    if (summary.find(narrative) == std::string::npos)
      missing.push_back("scenario narrative");
    if (summary.find(outcome_text) == std::string::npos) missing.push_back("outcome");
    if (summary.find(std::to_string(improvement_loops)) == std::string::npos)
      missing.push_back("loop count");

    if (missing.empty()) return summary;
    problem = "summary must mention:";
    for (const auto& m : missing) problem += " " + m + ";";
    context["validation_feedback"] = problem;
  }
  fail(ErrorCode::SummaryIncompleteExhausted, problem);
}

// ---------------------------------------------------------------------------
// artifacts

void write_cycle_artifacts(const CycleRecord& record, const ManifestSet* final_set,
                           const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  write_text_file(fs::path(out_dir) / "record.json", dump_json(json_of(record)));
  write_text_file(fs::path(out_dir) / "ledger.json", dump_json(json_of(record.ledger)));

  for (size_t i = 0; i < record.loops.size(); ++i) {
    const auto& loop = record.loops[i];
    const fs::path dir = fs::path(out_dir) / ("loop-" + std::to_string(i));
    write_text_file(dir / "plan.json", dump_json(json_of(loop.plan)));
    write_text_file(dir / "workflow.json", dump_json(json_of(loop.workflow)));
    write_text_file(dir / "workflow.yaml", workflow_to_chaos_mesh_yaml(loop.workflow));
    write_text_file(dir / "result.json", dump_json(json_of(loop.result)));
    if (loop.report) write_text_file(dir / "report.json", dump_json(json_of(*loop.report)));
    if (loop.reconfiguration)
      write_text_file(dir / "reconfig.json", dump_json(json_of(*loop.reconfiguration)));
  }

  if (final_set) {
    const auto output_dir = (fs::path(out_dir) / "output").string();
    write_output_folder(*final_set, output_dir);
    if (record.outcome.kind == OutcomeKind::Aborted)
      write_text_file(fs::path(output_dir) / "UNVALIDATED",
                      "aborted: " + record.outcome.reason +
                          "\nthese manifests did not pass the final experiment\n");
  }
}

// ---------------------------------------------------------------------------
// end to end

CycleRecord run_cycle(const ProjectInput& input, const CycleConfig& config,
                      const std::string& out_dir, std::shared_ptr<Backend> backend_override) {
  std::shared_ptr<Backend> backend = std::move(backend_override);
  if (!backend && config.backend == "replay") {
    if (config.transcript.empty())
      fail(ErrorCode::UsageError, "replay backend requires a transcript path");
    backend = make_replay_backend(config.transcript);
  } else if (!backend) {
    HttpBackendConfig http;
    http.base_url = config.api_base;
    http.model = config.model;
    if (const char* key = std::getenv(config.api_key_env.c_str())) http.api_key = key;
    backend = make_http_backend(http);
  }
  auto recorder = std::make_shared<UsageRecorder>();
  Gateway gateway(backend, {config.price_in_per_1k, config.price_out_per_1k}, recorder);

  const ClusterFactory factory = [&config](const ManifestSet& set) {
    return Cluster(set, config.seed, config.sim);
  };

  CycleRecord record;
  record.input = input;
  std::optional<ManifestSet> final_set;

  try {
    const ManifestSet set = validate_project_input(input);
    final_set = set;

    // Phase 0: policy screening, deployment, context filling
    std::optional<Cluster> cluster;
    {
      PhaseTimer timer(gateway, Phase::Pre);
      record.context = preprocess(input, set, gateway, [&] {
        cluster.emplace(factory(set));
        settle(*cluster);
      });
    }
    if (record.context.rejection) {
      record.outcome = {OutcomeKind::Aborted, 0, "policy: " + *record.context.rejection};
      record.ledger = recorder->ledger();
      write_cycle_artifacts(record, nullptr, out_dir);
      return record;
    }

    // Phase 1: hypothesis
    {
      PhaseTimer timer(gateway, Phase::Hyp);
      record.hypothesis = run_hypothesis_phase(record.context, set, *cluster, gateway,
                                               config.max_steady_states);
    }

    // Phase 2: plan, compile, execute on a fresh deployment
    std::optional<int> constraint = config.experiment_max_total_s;
    if (!constraint)
      constraint = constraint_from_instructions(record.context.sanitized_instructions);

    ExperimentPlan plan;
    WorkflowManifest workflow;
    ExperimentResult result;
    {
      PhaseTimer timer(gateway, Phase::Expt);
      plan = plan_experiment(record.context, *record.hypothesis, constraint, gateway);
      workflow = compile_workflow(plan);
      Cluster experiment_cluster = factory(set);
      settle(experiment_cluster);
      result = execute_experiment(workflow, experiment_cluster);
    }

    LoopTrace initial_loop;
    initial_loop.plan = plan;
    initial_loop.workflow = workflow;
    initial_loop.result = result;
    initial_loop.set_after = set;

    // Phases 3-4: analysis + improvement loop
    if (check_results(result)) {
      record.loops.push_back(std::move(initial_loop));
      record.outcome = {OutcomeKind::SatisfiedNoChange, 0, ""};
    } else {
      auto improvement = run_improvement_loop(set, *record.hypothesis,
                                              std::move(initial_loop), factory, gateway,
                                              config.max_loops);
      record.loops = std::move(improvement.loops);
      record.outcome = improvement.outcome;
      final_set = std::move(improvement.final_set);
    }

    // Post-processing: cycle summary
    {
      PhaseTimer timer(gateway, Phase::Post);
      record.summary = summarize_cycle(record, gateway);
    }
    record.ledger = recorder->ledger();
    write_cycle_artifacts(record, &*final_set, out_dir);
    return record;
  } catch (const CycleError& e) {
    record.outcome = {OutcomeKind::Aborted, 0, e.what()};
    record.ledger = recorder->ledger();
    write_cycle_artifacts(record, final_set ? &*final_set : nullptr, out_dir);
    return record;
  }
}

}  // namespace chaoscycle
