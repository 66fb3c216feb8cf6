#include "chaoscycle/hypothesis.hpp"

#include <gtest/gtest.h>

#include "chaoscycle/pipeline.hpp"
#include "scripted_backend.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace chaoscycle;
using chaoscycle::testing::make_gateway;
using chaoscycle::testing::nginx_set;
using chaoscycle::testing::OverrideBackend;
using chaoscycle::testing::sockshop_set;

namespace {

ProcessedContext context_for(const ManifestSet& set, Gateway& gateway,
                             const std::string& instructions) {
  ProjectInput input;
  input.instructions = instructions;
  return preprocess(input, set, gateway, [] {});
}

struct Session {
  ManifestSet set;
  Cluster cluster;
  Gateway gateway;
  ProcessedContext ctx;

  Session(ManifestSet s, std::shared_ptr<Backend> backend, const std::string& instructions)
      : set(std::move(s)), cluster(set, 42), gateway(make_gateway(std::move(backend))),
        ctx(context_for(set, gateway, instructions)) {
    settle(cluster);
  }
};

Session nginx_session(std::shared_ptr<Backend> backend = make_scripted_backend()) {
  return Session(nginx_set(), std::move(backend), chaoscycle::testing::kOneMinute);
}

Session sockshop_session(std::shared_ptr<Backend> backend = make_scripted_backend()) {
  return Session(sockshop_set(), std::move(backend),
                 chaoscycle::testing::kSockShopInstructions);
}

}  // namespace

TEST(Draft, NginxContextYieldsPodAvailability) {
  auto s = nginx_session();
  const auto draft = draft_steady_state(s.ctx, {}, s.set, s.gateway);
  EXPECT_EQ(draft.name, "pod-availability");
  EXPECT_EQ(draft.probe.tool, ProbeTool::ClusterApi);
  EXPECT_EQ(draft.probe.quantity, ProbeQuantity::PodCount);
  EXPECT_EQ(draft.probe.selector.at("app"), "nginx");
}

TEST(Draft, SockShopSecondStateUsesAccessUrl) {
  auto s = sockshop_session();
  const auto first = draft_steady_state(s.ctx, {}, s.set, s.gateway);
  EXPECT_EQ(first.name, "front-end-ready-replicas");

  SteadyState assembled;  // minimal stand-in carrying the dedup-relevant parts
  assembled.name = first.name;
  assembled.probe = first.probe;
  const auto second = draft_steady_state(s.ctx, {assembled}, s.set, s.gateway);
  EXPECT_EQ(second.name, "http-success-rate");
  EXPECT_EQ(second.probe.tool, ProbeTool::HttpLoad);
  EXPECT_NE(second.probe.url.find("front-end"), std::string::npos);
}

TEST(Draft, RepeatedNameExhaustsAfterOneRetry) {
  // backend insists on an already-used name and target twice
  const Json dup{{"name", "pod-availability"},
                 {"description", "dup"},
                 {"probe", Json{{"tool", "cluster_api"},
                                {"selector", Json{{"app", "nginx"}}},
                                {"namespace", "default"},
                                {"quantity", "pod_count"},
                                {"sample_interval_s", 1},
                                {"duration_s", 10}}}};
  auto backend = std::make_shared<OverrideBackend>(
      make_scripted_backend(), AgentRole::StateDrafter, std::vector<Json>{dup, dup});
  auto s = nginx_session(backend);

  SteadyState existing;
  existing.name = "pod-availability";
  existing.probe = probe_spec_from_json(dup.at("probe"));
  try {
    draft_steady_state(s.ctx, {existing}, s.set, s.gateway);
    FAIL();
  } catch (const CycleError& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateStateExhausted);
    EXPECT_EQ(backend->served(), 2u);  // exactly one retry
  }
}

TEST(Baseline, ShortenedProbeOnHealthyCluster) {
  auto s = nginx_session();
  const auto draft = draft_steady_state(s.ctx, {}, s.set, s.gateway);
  const Measurement baseline = inspect_baseline(draft, s.cluster);
  ASSERT_EQ(baseline.samples.size(), 10u);  // min(10, probe duration)
  for (const auto& sample : baseline.samples) EXPECT_DOUBLE_EQ(sample.value, 1.0);
}

TEST(Baseline, LatencyBaselineEqualsBaseLatency) {
  auto s = sockshop_session();
  SteadyStateDraft draft;
  draft.name = "http-latency-p95";
  draft.probe.tool = ProbeTool::HttpLoad;
  draft.probe.url = "http://front-end.default.svc.cluster.local/";
  draft.probe.virtual_users = 10;
  draft.probe.quantity = ProbeQuantity::LatencyP95Ms;
  draft.probe.sample_interval_s = 1;
  draft.probe.duration_s = 10;

  const Measurement baseline = inspect_baseline(draft, s.cluster);
  std::vector<double> values;
  for (const auto& sample : baseline.samples) values.push_back(sample.value);
  EXPECT_DOUBLE_EQ(oracle::p95(values), 50.0);  // constant base-latency series
}

TEST(Baseline, AbsentServiceRejected) {
  auto s = nginx_session();
  SteadyStateDraft draft;
  draft.name = "ghost";
  draft.probe.tool = ProbeTool::HttpLoad;
  draft.probe.url = "http://ghost.default.svc.cluster.local/";
  draft.probe.virtual_users = 1;
  draft.probe.quantity = ProbeQuantity::SuccessRate;
  draft.probe.sample_interval_s = 1;
  draft.probe.duration_s = 5;
  try {
    inspect_baseline(draft, s.cluster);
    FAIL();
  } catch (const CycleError& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownService);
  }
}

TEST(Thresholds, PodCountBaselineGetsGeOneEverySample) {
  auto s = nginx_session();
  const auto draft = draft_steady_state(s.ctx, {}, s.set, s.gateway);
  const Measurement baseline = inspect_baseline(draft, s.cluster);
  const Threshold t = define_threshold(draft, baseline, s.gateway);
  EXPECT_EQ(t.comparator, Comparator::GE);
  EXPECT_DOUBLE_EQ(t.value, 1.0);
  EXPECT_EQ(t.aggregation, Aggregation::EverySample);
  // the contract the mechanical check enforces: 1 >= 1 over every sample
  Measurement checked = baseline;
  checked.aggregate = aggregate_samples(checked.samples, t);
  EXPECT_TRUE(threshold_passes(t, checked));
}

TEST(Thresholds, LatencyBaselineGetsP95Under500) {
  auto s = sockshop_session();
  SteadyStateDraft draft;
  draft.name = "http-latency-p95";
  draft.probe.tool = ProbeTool::HttpLoad;
  draft.probe.url = "http://front-end.default.svc.cluster.local/";
  draft.probe.virtual_users = 10;
  draft.probe.quantity = ProbeQuantity::LatencyP95Ms;
  draft.probe.sample_interval_s = 1;
  draft.probe.duration_s = 10;
  const Threshold t =
      define_threshold(draft, inspect_baseline(draft, s.cluster), s.gateway);
  EXPECT_EQ(t.comparator, Comparator::LT);
  EXPECT_DOUBLE_EQ(t.value, 500.0);
  EXPECT_EQ(t.aggregation, Aggregation::P95);
}

TEST(Thresholds, InconsistentProposalExhaustsRetries) {
  const Json too_high{{"comparator", "ge"}, {"value", 2}, {"aggregation", "every_sample"}};
  auto backend = std::make_shared<OverrideBackend>(
      make_scripted_backend(), AgentRole::ThresholdSetter,
      std::vector<Json>{too_high, too_high, too_high});
  auto s = nginx_session(backend);
  const auto draft = draft_steady_state(s.ctx, {}, s.set, s.gateway);
  const Measurement baseline = inspect_baseline(draft, s.cluster);
  try {
    define_threshold(draft, baseline, s.gateway);
    FAIL();
  } catch (const CycleError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ThresholdInconsistent);
    EXPECT_EQ(backend->served(), 3u);
  }
}

TEST(VaC, MirrorsProbeAndThresholdWithScript) {
  auto s = nginx_session();
  const auto draft = draft_steady_state(s.ctx, {}, s.set, s.gateway);
  const std::string inspection = write_probe_script(draft, s.gateway);
  EXPECT_NE(inspection.find("pod count"), std::string::npos);

  const Threshold t{Comparator::GE, 1.0, Aggregation::EverySample};
  const VaCSpec vac = build_vac(draft, t, inspection, s.gateway);
  EXPECT_EQ(vac.steady_state_name, draft.name);
  EXPECT_EQ(vac.probe, draft.probe);
  EXPECT_EQ(vac.threshold, t);
  EXPECT_NE(vac.script_text.find("assert"), std::string::npos);
}

TEST(Sufficiency, OneStateSufficesForNginx) {
  auto s = nginx_session();
  SteadyState state;
  state.name = "pod-availability";
  state.probe = draft_steady_state(s.ctx, {}, s.set, s.gateway).probe;
  const auto decision = steady_states_sufficient({state}, s.ctx, s.gateway);
  EXPECT_TRUE(decision.enough);
  EXPECT_FALSE(decision.reason.empty());
}

TEST(Sufficiency, EmptyStateListIsPreconditionViolation) {
  auto s = nginx_session();
  EXPECT_THROW(steady_states_sufficient({}, s.ctx, s.gateway), CycleError);
}

TEST(Scenario, NginxGetsPodKillWithResolvingSelector) {
  auto s = nginx_session();
  const auto scenario = define_failure_scenario(s.ctx, {}, s.set, s.gateway);
  EXPECT_EQ(scenario.narrative, "cyberattack pod takedown");
  ASSERT_EQ(scenario.faults.size(), 1u);
  EXPECT_EQ(scenario.faults[0].kind, FaultKind::PodChaos);
  EXPECT_EQ(scenario.faults[0].subtype, "pod-kill");
  EXPECT_EQ(scenario.faults[0].selector.labels.at("app"), "nginx");
  EXPECT_EQ(scenario.faults[0].selector.mode, SelectorMode::One);
  EXPECT_FALSE(
      resolve_selector(s.set, scenario.faults[0].selector.labels, "default").empty());
}

TEST(Scenario, SockShopGetsStressAndKillOnFrontEnd) {
  auto s = sockshop_session();
  const auto scenario = define_failure_scenario(s.ctx, {}, s.set, s.gateway);
  EXPECT_NE(scenario.narrative.find("Black Friday"), std::string::npos);
  ASSERT_EQ(scenario.faults.size(), 2u);
  EXPECT_EQ(scenario.faults[0].kind, FaultKind::StressChaos);
  EXPECT_EQ(scenario.faults[1].kind, FaultKind::PodChaos);
  for (const auto& fault : scenario.faults)
    EXPECT_EQ(fault.selector.labels.at("name"), "front-end");
}

TEST(Scenario, UnresolvableSelectorsExhaust) {
  Json bad_fault{{"name", "ghost-kill"},
                 {"kind", "PodChaos"},
                 {"subtype", "pod-kill"},
                 {"selector", Json{{"labels", Json{{"app", "ghost"}}},
                                   {"namespace", "default"},
                                   {"mode", "one"}}},
                 {"params", Json{{"kill_grace_s", 0}}}};
  const Json bad{{"faults", Json::array({bad_fault})}};
  auto backend = std::make_shared<OverrideBackend>(
      make_scripted_backend(), AgentRole::FaultRefiner, std::vector<Json>{bad, bad, bad});
  auto s = nginx_session(backend);
  try {
    define_failure_scenario(s.ctx, {}, s.set, s.gateway);
    FAIL();
  } catch (const CycleError& e) {
    EXPECT_EQ(e.code(), ErrorCode::SelectorUnresolvableExhausted);
  }
}

TEST(Phase, FullHypothesisForNginxHoldsItsInvariants) {
  auto s = nginx_session();
  const Hypothesis h = run_hypothesis_phase(s.ctx, s.set, s.cluster, s.gateway);
  ASSERT_EQ(h.steady_states.size(), 1u);
  EXPECT_EQ(h.steady_states[0].name, "pod-availability");
  // every accepted state passes its own threshold against its own baseline
  for (const auto& state : h.steady_states)
    EXPECT_TRUE(threshold_passes(state.threshold, state.baseline));
  EXPECT_NE(h.statement.find("pod-availability"), std::string::npos);
}

TEST(Phase, SockShopDefinesThreeDistinctStates) {
  auto s = sockshop_session();
  const Hypothesis h = run_hypothesis_phase(s.ctx, s.set, s.cluster, s.gateway);
  ASSERT_EQ(h.steady_states.size(), 3u);
  std::set<std::string> names;
  std::set<std::string> targets;
  for (const auto& state : h.steady_states) {
    names.insert(state.name);
    targets.insert(to_string(state.probe.tool) + "|" + to_string(state.probe.quantity) +
                   "|" + state.probe.url);
    EXPECT_TRUE(threshold_passes(state.threshold, state.baseline)) << state.name;
    if (state.probe.tool == ProbeTool::ClusterApi)
      EXPECT_FALSE(resolve_selector(s.set, state.probe.selector, state.probe.ns).empty());
  }
  EXPECT_EQ(names.size(), 3u);    // unique names
  EXPECT_EQ(targets.size(), 3u);  // no two share (tool, target)
  for (const auto& fault : h.scenario.faults)
    EXPECT_FALSE(
        resolve_selector(s.set, fault.selector.labels, fault.selector.ns).empty());
}

TEST(Phase, HardCapForcesTermination) {
  auto s = sockshop_session();
  const Hypothesis h = run_hypothesis_phase(s.ctx, s.set, s.cluster, s.gateway, 2);
  EXPECT_EQ(h.steady_states.size(), 2u);  // cap overrides the judge's "not enough"
}
