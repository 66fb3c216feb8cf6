#include "chaoscycle/improvement.hpp"

#include <chrono>

#include "chaoscycle/model_json.hpp"
#include "chaoscycle/prompt_context.hpp"

namespace chaoscycle {

bool check_results(const ExperimentResult& result) {
  for (const auto& outcome : result.outcomes) {
    if (outcome.item.task == TaskType::RunVaC && !outcome.passed) return false;
  }
  return true;
}

std::vector<ItemOutcome> failed_vac_outcomes(const ExperimentResult& result) {
  std::vector<ItemOutcome> failed;
  for (const auto& outcome : result.outcomes) {
    if (outcome.item.task == TaskType::RunVaC && !outcome.passed) failed.push_back(outcome);
  }
  return failed;
}

AnalysisReport analyze_failures(const ManifestSet& set, const std::string& timeline_summary,
                                const std::vector<ItemOutcome>& failed, Gateway& gateway) {
  if (failed.empty()) fail(ErrorCode::InvalidValue, "analysis requires failed outcomes");

  Json failures = Json::array();
  for (const auto& outcome : failed) {
    failures.push_back(Json{{"item", outcome.item.ref},
                            {"stage", to_string(outcome.item.stage)},
                            {"log", outcome.log}});
  }
  AgentCall call;
  call.role = AgentRole::FailureAnalyst;
  call.output_schema = schema_id_for(call.role);
  call.prompt_context = {{"manifests", manifest_files_text(set)},
                         {"timeline", timeline_summary},
                         {"failed", failures.dump()}};
  const auto reply = gateway.complete_structured(call, Phase::Anlys);

  AnalysisReport report;
  for (const auto& outcome : failed) report.failed_items.push_back(outcome.item.ref);
  report.causes = reply.parsed.at("causes").get<std::vector<std::string>>();
  report.countermeasures =
      reply.parsed.at("countermeasures").get<std::vector<std::string>>();
  return report;
}

namespace {

std::string history_text(const ImprovementHistory& history) {
  Json arr = Json::array();
  for (const auto& entry : history) {
    Json ops = Json::array();
    for (const auto& op : entry.reconfiguration.ops)
      ops.push_back(Json{{"op", to_string(op.op)}, {"path", op.path}});
    arr.push_back(Json{{"ops", ops},
                       {"rationale", entry.reconfiguration.rationale},
                       {"causes", entry.report.causes}});
  }
  return arr.dump();
}

bool same_ops(const std::vector<ReconfigOp>& a, const std::vector<ReconfigOp>& b) {
  return a == b;
}

}  // namespace

Reconfiguration reconfigure(const ManifestSet& set, const Hypothesis& hypothesis,
                            const ExperimentPlan& plan, const ImprovementHistory& history,
                            Gateway& gateway) {
  std::map<std::string, std::string> context{
      {"manifests", manifest_files_text(set)},
      {"hypothesis", hypothesis.statement},
      {"timeline", plan.timeline_summary},
      {"history", history_text(history)}};

  std::string problem;
  bool repeated_last = false;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    AgentCall call;
    call.role = AgentRole::Reconfigurer;
    call.output_schema = schema_id_for(call.role);
    call.prompt_context = context;
    const auto reply = gateway.complete_structured(call, Phase::Imp);

    Reconfiguration reconf;
    problem.clear();
    repeated_last = false;
    try {
      reconf = reconfiguration_from_json(reply.parsed);
      for (const auto& entry : history) {
        if (same_ops(entry.reconfiguration.ops, reconf.ops)) {
          repeated_last = true;
          problem = "this exact reconfiguration was already tried";
          break;
        }
      }
      if (problem.empty()) {
        apply_reconfiguration(set, reconf);  // parse + invariants dry run
        return reconf;
      }
    } catch (const std::exception& e) {
      problem = e.what();
    }
    context["validation_feedback"] = problem + "; propose a different valid reconfiguration";
  }
  fail(repeated_last ? ErrorCode::RepeatedReconfiguration
                     : ErrorCode::ReconfigInvalidExhausted,
       problem);
}

ImprovementResult run_improvement_loop(const ManifestSet& initial_set,
                                       const Hypothesis& hypothesis, LoopTrace initial_loop,
                                       const ClusterFactory& factory, Gateway& gateway,
                                       int max_loops) {
  if (check_results(initial_loop.result))
    fail(ErrorCode::InvalidValue, "improvement loop entered with a passing experiment");

  ImprovementResult out;
  ImprovementHistory history;
  ManifestSet current_set = initial_set;
  LoopTrace current_loop = std::move(initial_loop);
  ExperimentPlan plan = current_loop.plan;

  while (true) {
    if (static_cast<int>(history.size()) >= max_loops) {
      out.loops.push_back(std::move(current_loop));
      out.final_set = current_set;
      out.outcome = {OutcomeKind::Aborted, 0, "max loops"};
      return out;
    }

    const auto failed = failed_vac_outcomes(current_loop.result);
    const AnalysisReport report =
        analyze_failures(current_set, plan.timeline_summary, failed, gateway);
    current_loop.report = report;

    const Reconfiguration reconf =
        reconfigure(current_set, hypothesis, plan, history, gateway);
    current_loop.reconfiguration = reconf;

    auto applied = apply_reconfiguration(current_set, reconf);
    const ManifestSet new_set = std::move(applied.set);
    current_loop.set_after = new_set;
    history.push_back({current_loop.result, report, reconf});
    out.loops.push_back(std::move(current_loop));

    if (!diff_manifest_sets(current_set, new_set).empty())
      plan = replan_experiment(plan, current_set, new_set, gateway);

    const auto t0 = std::chrono::steady_clock::now();
    Cluster cluster = factory(new_set);
    settle(cluster);
    const WorkflowManifest workflow = compile_workflow(plan);
    ExperimentResult result = execute_experiment(workflow, cluster);
    if (gateway.recorder()) {
      Usage mechanical;
      mechanical.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      gateway.recorder()->record(Phase::Expt, mechanical);
    }

    LoopTrace next;
    next.plan = plan;
    next.workflow = workflow;
    next.result = std::move(result);
    next.set_after = new_set;
    current_set = new_set;

    if (check_results(next.result)) {
      out.loops.push_back(std::move(next));
      out.final_set = current_set;
      out.outcome = {OutcomeKind::SatisfiedAfterImprovement,
                     static_cast<int>(history.size()), ""};
      return out;
    }
    current_loop = std::move(next);
  }
}

}  // namespace chaoscycle
