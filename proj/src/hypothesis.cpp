#include "chaoscycle/hypothesis.hpp"

#include <algorithm>

#include "chaoscycle/model_json.hpp"
#include "chaoscycle/prompt_context.hpp"

namespace chaoscycle {

namespace {

AgentCall make_call(AgentRole role, std::map<std::string, std::string> context) {
  AgentCall call;
  call.role = role;
  call.prompt_context = std::move(context);
  call.output_schema = schema_id_for(role);
  return call;
}

// Probe targets must resolve against the deployed system.
std::string probe_target_problem(const ProbeSpec& probe, const ManifestSet& set) {
  if (probe.tool == ProbeTool::ClusterApi) {
    if (resolve_selector(set, probe.selector, probe.ns).empty())
      return "probe selector matches no deployed pods";
    return "";
  }
  for (const auto& r : set.resources) {
    if (r.kind != ResourceKind::Service) continue;
    if (probe.url.find(r.name) != std::string::npos) return "";
  }
  return "probe URL does not name any deployed service";
}

std::string target_key(const ProbeSpec& probe) {
  if (probe.tool == ProbeTool::ClusterApi) {
    std::string key = "cluster_api|" + probe.ns + "|";
    for (const auto& [k, v] : probe.selector) key += k + "=" + v + ",";
    key += "|" + to_string(probe.quantity);
    return key;
  }
  return "http_load|" + probe.url + "|" + to_string(probe.quantity);
}

}  // namespace

SteadyStateDraft draft_steady_state(const ProcessedContext& ctx,
                                    const std::vector<SteadyState>& existing,
                                    const ManifestSet& set, Gateway& gateway) {
  if (ctx.rejection) fail(ErrorCode::InvalidValue, "context carries a policy rejection");

  std::map<std::string, std::string> context{
      {"context", context_brief(ctx)},
      {"resources", resources_overview(set)},
      {"existing_states", steady_states_brief(existing)},
      {"instructions", ctx.sanitized_instructions}};

  // one retry on collision, then DuplicateStateExhausted
  std::string collision;
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto call = make_call(AgentRole::StateDrafter, context);
    const auto reply = gateway.complete_structured(call, Phase::Hyp);

    SteadyStateDraft draft;
    draft.name = reply.parsed.at("name").get<std::string>();
    draft.description = reply.parsed.value("description", std::string{});
    std::string problem;
    try {
      draft.probe = probe_spec_from_json(reply.parsed.at("probe"));
      validate(draft.probe);
      problem = probe_target_problem(draft.probe, set);
    } catch (const std::exception& e) {
      problem = e.what();
    }
    if (problem.empty()) {
      for (const auto& s : existing) {
        if (s.name == draft.name) problem = "name '" + draft.name + "' already exists";
        if (target_key(s.probe) == target_key(draft.probe))
          problem = "probe target duplicates steady state '" + s.name + "'";
      }
    }
    if (problem.empty()) return draft;
    collision = problem;
    context["collision"] =
        problem + "; choose a different steady state (name and probe target)";
  }
  fail(ErrorCode::DuplicateStateExhausted, collision);
}

Measurement inspect_baseline(const SteadyStateDraft& draft, Cluster& cluster) {
  if (!cluster.all_pods_running())
    fail(ErrorCode::InvalidValue, "baseline inspection needs a reconciled cluster");
  const int duration = std::min(kBaselineProbeCapS, draft.probe.duration_s);
  Threshold provisional;  // aggregation only; final-sample until the real one exists
  provisional.aggregation = Aggregation::FinalSample;
  return cluster.run_probe(draft.probe, provisional, duration);
}

Threshold define_threshold(const SteadyStateDraft& draft, const Measurement& baseline,
                           Gateway& gateway) {
  std::map<std::string, std::string> context{
      {"steady_state", draft.name + ": " + draft.description},
      {"probe", probe_text(draft.probe)},
      {"quantity", to_string(draft.probe.quantity)},
      {"baseline_samples", samples_text(baseline.samples)}};

  std::string problem;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto call = make_call(AgentRole::ThresholdSetter, context);
    const auto reply = gateway.complete_structured(call, Phase::Hyp);
    try {
      Threshold threshold = threshold_from_json(reply.parsed);
      validate(threshold, draft.probe.quantity);
      Measurement checked = baseline;
      checked.aggregate = aggregate_samples(checked.samples, threshold);
      if (!threshold_passes(threshold, checked)) {
        problem = "threshold " + threshold_text(threshold) +
                  " fails against the baseline (aggregate " +
                  Json(checked.aggregate).dump() + ")";
      } else {
        return threshold;
      }
    } catch (const std::exception& e) {
      problem = e.what();
    }
    context["validation_feedback"] = problem + "; the threshold must hold for the baseline";
  }
  fail(ErrorCode::ThresholdInconsistent, problem);
}

std::string write_probe_script(const SteadyStateDraft& draft, Gateway& gateway) {
  auto call = make_call(AgentRole::ProbeWriter,
                        {{"steady_state", draft.name + ": " + draft.description},
                         {"probe", probe_text(draft.probe)}});
  return gateway.complete_structured(call, Phase::Hyp).parsed.at("script").get<std::string>();
}

VaCSpec build_vac(const SteadyStateDraft& draft, const Threshold& threshold,
                  const std::string& inspection_script, Gateway& gateway) {
  auto call = make_call(AgentRole::VaCBuilder,
                        {{"steady_state", draft.name},
                         {"probe", probe_text(draft.probe)},
                         {"threshold", threshold_text(threshold)},
                         {"inspection_script", inspection_script}});
  VaCSpec vac;
  vac.steady_state_name = draft.name;
  vac.probe = draft.probe;
  vac.threshold = threshold;
  vac.script_text =
      gateway.complete_structured(call, Phase::Hyp).parsed.at("script").get<std::string>();
  return vac;
}

SufficiencyDecision steady_states_sufficient(const std::vector<SteadyState>& states,
                                             const ProcessedContext& ctx, Gateway& gateway) {
  if (states.empty()) fail(ErrorCode::InvalidValue, "sufficiency judged with no states");
  auto call = make_call(AgentRole::SufficiencyJudge,
                        {{"context", context_brief(ctx)},
                         {"states", steady_states_brief(states)}});
  const auto reply = gateway.complete_structured(call, Phase::Hyp);
  return {reply.parsed.at("enough").get<bool>(),
          reply.parsed.value("reason", std::string{})};
}

FailureScenario define_failure_scenario(const ProcessedContext& ctx,
                                        const std::vector<SteadyState>& states,
                                        const ManifestSet& set, Gateway& gateway) {
  auto draft_call = make_call(AgentRole::ScenarioDrafter,
                              {{"context", context_brief(ctx)},
                               {"resources", resources_overview(set)},
                               {"states", steady_states_brief(states)}});
  const auto draft = gateway.complete_structured(draft_call, Phase::Hyp);
  const std::string narrative = draft.parsed.at("narrative").get<std::string>();

  std::map<std::string, std::string> refine_context{
      {"narrative", narrative},
      {"draft_faults", draft.parsed.at("faults").dump()},
      {"resources", resources_overview(set)}};

  std::string problem;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto call = make_call(AgentRole::FaultRefiner, refine_context);
    const auto reply = gateway.complete_structured(call, Phase::Hyp);
    FailureScenario scenario;
    scenario.narrative = narrative;
    problem.clear();
    try {
      for (const auto& f : reply.parsed.at("faults"))
        scenario.faults.push_back(fault_spec_from_json(f));
      validate(scenario);
      for (const auto& f : scenario.faults) {
        if (resolve_selector(set, f.selector.labels, f.selector.ns).empty()) {
          problem = "fault '" + f.name + "' selector matches no deployed resource";
          break;
        }
      }
    } catch (const std::exception& e) {
      problem = e.what();
    }
    if (problem.empty()) return scenario;
    refine_context["validation_feedback"] =
        problem + "; selectors must match deployed pod labels";
  }
  fail(ErrorCode::SelectorUnresolvableExhausted, problem);
}

Hypothesis run_hypothesis_phase(const ProcessedContext& ctx, const ManifestSet& set,
                                Cluster& cluster, Gateway& gateway, int max_steady_states) {
  Hypothesis hypothesis;
  while (true) {
    const auto draft = draft_steady_state(ctx, hypothesis.steady_states, set, gateway);
    const std::string inspection_script = write_probe_script(draft, gateway);
    const Measurement baseline = inspect_baseline(draft, cluster);
    const Threshold threshold = define_threshold(draft, baseline, gateway);

    SteadyState state;
    state.name = draft.name;
    state.description = draft.description;
    state.probe = draft.probe;
    state.threshold = threshold;
    state.baseline = baseline;
    state.baseline.aggregate = aggregate_samples(baseline.samples, threshold);
    state.vac = build_vac(draft, threshold, inspection_script, gateway);
    validate(state);
    hypothesis.steady_states.push_back(std::move(state));

    if (static_cast<int>(hypothesis.steady_states.size()) >= max_steady_states)
      break;  // hard cap: enough regardless of the agent
    if (steady_states_sufficient(hypothesis.steady_states, ctx, gateway).enough) break;
  }

  hypothesis.scenario =
      define_failure_scenario(ctx, hypothesis.steady_states, set, gateway);

  std::string names;
  for (const auto& s : hypothesis.steady_states) {
    if (!names.empty()) names += ", ";
    names += s.name;
  }
  hypothesis.statement = "The steady states " + names +
                         " hold even while the faults of scenario '" +
                         hypothesis.scenario.narrative + "' are injected.";
  validate(hypothesis);
  return hypothesis;
}

}  // namespace chaoscycle
