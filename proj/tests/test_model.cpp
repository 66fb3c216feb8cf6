#include "chaoscycle/model.hpp"

#include <gtest/gtest.h>

#include <random>

#include "chaoscycle/model_json.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace chaoscycle;

namespace {

Measurement constant_series(int n, double value) {
  Measurement m;
  for (int i = 0; i < n; ++i) m.samples.push_back({i, value});
  m.aggregate = value;
  return m;
}

SteadyState minimal_state(const std::string& name) {
  SteadyState s;
  s.name = name;
  s.description = "test";
  s.probe.tool = ProbeTool::ClusterApi;
  s.probe.selector = {{"app", "nginx"}};
  s.probe.quantity = ProbeQuantity::PodCount;
  s.probe.sample_interval_s = 1;
  s.probe.duration_s = 10;
  s.threshold = {Comparator::GE, 1.0, Aggregation::EverySample};
  s.baseline = constant_series(5, 1.0);
  s.vac = {name, s.probe, s.threshold, "script"};
  return s;
}

FaultSpec pod_kill_fault(const std::string& name = "kill") {
  FaultSpec f;
  f.kind = FaultKind::PodChaos;
  f.subtype = "pod-kill";
  f.selector.labels = {{"app", "nginx"}};
  f.params.kill_grace_s = 0;
  f.name = name;
  return f;
}

ExperimentPlan minimal_plan() {
  ExperimentPlan plan;
  plan.pre_s = 15;
  plan.fault_s = 30;
  plan.post_s = 15;
  const SteadyState s = minimal_state("pod-availability");
  plan.vac[s.name] = s.vac;
  plan.faults["kill"] = pod_kill_fault();
  plan.items = {{Stage::Pre, TaskType::RunVaC, "pod-availability", 0, 10},
                {Stage::Fault, TaskType::InjectFault, "kill", 0, 30},
                {Stage::Post, TaskType::RunVaC, "pod-availability", 0, 10}};
  plan.timeline_summary = "pre, kill, post";
  return plan;
}

void expect_error(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL() << "expected " << error_code_name(code);
  } catch (const CycleError& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

// --- threshold evaluation ----------------------------------------------------

TEST(ThresholdEval, AggregateMatchesOracleOnRandomSeries) {
  std::mt19937 rng(7);
  for (int round = 0; round < 300; ++round) {
    Measurement m;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i)
      m.samples.push_back({i, static_cast<double>(rng() % 1000) / 10.0});
    Threshold t;
    t.comparator = static_cast<Comparator>(rng() % 5);
    t.aggregation = static_cast<Aggregation>(rng() % 3);
    t.value = static_cast<double>(rng() % 100);

    const double expected =
        oracle::aggregate(m.samples, t.aggregation, t.comparator, t.value);
    EXPECT_DOUBLE_EQ(aggregate_samples(m.samples, t), expected);
  }
}

TEST(ThresholdEval, EverySampleEquivalentToAllSamplesPassing) {
  std::mt19937 rng(11);
  for (int round = 0; round < 200; ++round) {
    Measurement m;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) m.samples.push_back({i, static_cast<double>(rng() % 5)});
    Threshold t{static_cast<Comparator>(rng() % 5), static_cast<double>(rng() % 5),
                Aggregation::EverySample};
    m.aggregate = aggregate_samples(m.samples, t);

    bool all = true;
    for (const auto& s : m.samples)
      if (!compare(t.comparator, s.value, t.value)) all = false;
    EXPECT_EQ(threshold_passes(t, m), all);
  }
}

TEST(ThresholdEval, P95OfConstantLatencySeries) {
  // independently recomputed: p95 of a constant 50 ms series is 50
  std::vector<double> series(10, 50.0);
  EXPECT_DOUBLE_EQ(oracle::p95(series), 50.0);
  EXPECT_DOUBLE_EQ(percentile95(series), 50.0);
}

TEST(ThresholdEval, P95NearestRankAgainstOracle) {
  std::mt19937 rng(13);
  for (int round = 0; round < 200; ++round) {
    std::vector<double> values;
    const int n = 1 + static_cast<int>(rng() % 50);
    for (int i = 0; i < n; ++i) values.push_back(static_cast<double>(rng() % 1000));
    EXPECT_DOUBLE_EQ(percentile95(values), oracle::p95(values));
  }
}

// --- construction-time invariants ---------------------------------------------

TEST(Invariants, MeasurementOffsetsStrictlyIncreasing) {
  Measurement m = constant_series(3, 1.0);
  m.samples[2].offset_s = m.samples[1].offset_s;
  expect_error(ErrorCode::InvalidValue, [&] {
    validate(m, Threshold{Comparator::GE, 1.0, Aggregation::EverySample});
  });
}

TEST(Invariants, MeasurementAggregateMustMatchAggregation) {
  Measurement m = constant_series(3, 2.0);
  m.aggregate = 99.0;
  expect_error(ErrorCode::InvalidValue, [&] {
    validate(m, Threshold{Comparator::GE, 1.0, Aggregation::EverySample});
  });
}

TEST(Invariants, ThresholdUnitsFollowQuantity) {
  expect_error(ErrorCode::InvalidValue, [&] {
    validate(Threshold{Comparator::GE, 1.5, Aggregation::EverySample},
             ProbeQuantity::PodCount);  // counts are integers
  });
  expect_error(ErrorCode::InvalidValue, [&] {
    validate(Threshold{Comparator::GE, 1.2, Aggregation::EverySample},
             ProbeQuantity::SuccessRate);  // ratio in [0,1]
  });
  expect_error(ErrorCode::InvalidValue, [&] {
    validate(Threshold{Comparator::LT, 0.0, Aggregation::P95},
             ProbeQuantity::LatencyP95Ms);  // positive milliseconds
  });
  validate(Threshold{Comparator::LT, 500.0, Aggregation::P95}, ProbeQuantity::LatencyP95Ms);
}

TEST(Invariants, ProbeSpecRanges) {
  ProbeSpec p;
  p.tool = ProbeTool::HttpLoad;
  p.url = "http://front-end.default.svc.cluster.local/";
  p.quantity = ProbeQuantity::SuccessRate;
  p.virtual_users = 0;
  p.sample_interval_s = 1;
  p.duration_s = 10;
  expect_error(ErrorCode::InvalidValue, [&] { validate(p); });
  p.virtual_users = 10;
  validate(p);
  p.duration_s = 0;
  expect_error(ErrorCode::InvalidValue, [&] { validate(p); });
  p.duration_s = 10;
  p.sample_interval_s = 20;  // duration >= interval
  expect_error(ErrorCode::InvalidValue, [&] { validate(p); });
}

TEST(Invariants, SteadyStateThresholdMustPassBaseline) {
  SteadyState s = minimal_state("pod-availability");
  validate(s);
  s.threshold.value = 2.0;  // baseline of 1 no longer satisfies GE 2
  s.vac.threshold = s.threshold;
  expect_error(ErrorCode::InvalidValue, [&] { validate(s); });
}

TEST(Invariants, VaCMustMirrorOwningState) {
  SteadyState s = minimal_state("pod-availability");
  s.vac.threshold.value = 0.0;  // mismatched copy
  expect_error(ErrorCode::InvalidValue, [&] { validate(s); });
}

TEST(Invariants, FaultParamsWithinDeclaredRanges) {
  FaultSpec f = pod_kill_fault();
  validate(f);

  f.subtype = "weird";
  expect_error(ErrorCode::InvalidValue, [&] { validate(f); });

  FaultSpec loss;
  loss.kind = FaultKind::NetworkChaos;
  loss.subtype = "loss";
  loss.name = "loss";
  loss.selector.labels = {{"app", "x"}};
  loss.params.loss_pct = 150.0;
  expect_error(ErrorCode::InvalidValue, [&] { validate(loss); });
  loss.params.loss_pct = 30.0;
  validate(loss);

  FaultSpec delay = loss;
  delay.subtype = "delay";
  delay.name = "delay";
  delay.params = {};
  expect_error(ErrorCode::InvalidValue, [&] { validate(delay); });

  FaultSpec fixed = pod_kill_fault("fixed");
  fixed.selector.mode = SelectorMode::FixedCount;
  fixed.selector.count = 0;
  expect_error(ErrorCode::InvalidValue, [&] { validate(fixed); });
}

TEST(Invariants, HypothesisNamesUniqueAndReferenced) {
  Hypothesis h;
  h.steady_states = {minimal_state("a"), minimal_state("a")};
  h.scenario = {"narrative", {pod_kill_fault()}};
  h.statement = "a holds";
  expect_error(ErrorCode::InvalidValue, [&] { validate(h); });

  h.steady_states = {minimal_state("a"), minimal_state("b")};
  h.statement = "only a mentioned";
  expect_error(ErrorCode::InvalidValue, [&] { validate(h); });

  h.statement = "a and b hold under the faults";
  validate(h);
}

TEST(Invariants, ScenarioNeedsFaults) {
  FailureScenario scenario{"empty", {}};
  expect_error(ErrorCode::InvalidValue, [&] { validate(scenario); });
}

// --- experiment plan invariants -------------------------------------------------

TEST(PlanInvariants, ValidPlanPasses) { validate(minimal_plan()); }

TEST(PlanInvariants, EveryStateNeedsPreAndPostItems) {
  ExperimentPlan plan = minimal_plan();
  plan.items.erase(plan.items.begin());  // drop the pre VaC
  expect_error(ErrorCode::InvalidValue, [&] { validate(plan); });
}

TEST(PlanInvariants, FaultsExactlyOnceAndOnlyInFaultStage) {
  ExperimentPlan plan = minimal_plan();
  plan.items.push_back({Stage::Fault, TaskType::InjectFault, "kill", 0, 30});
  expect_error(ErrorCode::InvalidValue, [&] { validate(plan); });

  plan = minimal_plan();
  plan.items[1].stage = Stage::Pre;  // fault in pre stage
  expect_error(ErrorCode::InvalidValue, [&] { validate(plan); });

  plan = minimal_plan();
  plan.items.erase(plan.items.begin() + 1);  // fault omitted entirely
  expect_error(ErrorCode::InvalidValue, [&] { validate(plan); });
}

TEST(PlanInvariants, ItemsMustFitTheirStage) {
  ExperimentPlan plan = minimal_plan();
  plan.items[0].start_offset_s = 10;  // 10 + 10 > 15
  expect_error(ErrorCode::InvalidValue, [&] { validate(plan); });
}

TEST(PlanInvariants, OverlappingOffsetGroupsRejected) {
  ExperimentPlan plan = minimal_plan();
  plan.vac["second"] = minimal_state("second").vac;
  plan.items.push_back({Stage::Pre, TaskType::RunVaC, "second", 5, 5});
  plan.items.push_back({Stage::Fault, TaskType::RunVaC, "second", 0, 10});
  plan.items.push_back({Stage::Post, TaskType::RunVaC, "second", 0, 10});
  // pre group at 0 runs until 10; a group starting at 5 cannot be serialized
  expect_error(ErrorCode::InvalidValue, [&] { validate(plan); });
}

// --- workflow invariants -----------------------------------------------------------

TEST(WorkflowInvariants, DanglingChildrenAndCyclesRejected) {
  WorkflowManifest w;
  w.entry = "entry";
  w.templates = {{"entry", "Serial", 10, {"missing"}, ""}};
  expect_error(ErrorCode::WorkflowUnsound, [&] { validate(w); });

  w.templates = {{"entry", "Serial", 10, {"a"}, ""},
                 {"a", "Serial", 10, {"entry"}, ""}};
  expect_error(ErrorCode::WorkflowUnsound, [&] { validate(w); });
}

// --- cost ledger ------------------------------------------------------------------

TEST(CostLedger, RecordUsageIncrementsRowAndTotals) {
  CostLedger ledger;
  ledger = record_usage(ledger, Phase::Hyp, {25000, 2500, 1.5, 0.09});
  EXPECT_EQ(ledger.rows[static_cast<int>(Phase::Hyp)].input_tokens, 25000);
  EXPECT_EQ(ledger.rows[static_cast<int>(Phase::Hyp)].output_tokens, 2500);
  EXPECT_EQ(ledger.totals().input_tokens, 25000);
  EXPECT_EQ(ledger.totals().output_tokens, 2500);
}

TEST(CostLedger, ZeroUsageChangesOnlyWallTime) {
  CostLedger ledger;
  ledger = record_usage(ledger, Phase::Expt, {0, 0, 3.25, 0.0});
  EXPECT_EQ(ledger.totals().input_tokens, 0);
  EXPECT_EQ(ledger.totals().output_tokens, 0);
  EXPECT_DOUBLE_EQ(ledger.totals().api_cost_usd, 0.0);
  EXPECT_DOUBLE_EQ(ledger.totals().wall_time_s, 3.25);
}

TEST(CostLedger, TotalsEqualColumnSumsUnderRandomInterleaving) {
  std::mt19937 rng(3);
  CostLedger ledger;
  long long in_sum = 0;
  long long out_sum = 0;
  for (int i = 0; i < 500; ++i) {
    const auto phase = static_cast<Phase>(rng() % kPhaseCount);
    const Usage usage{static_cast<long long>(rng() % 1000),
                      static_cast<long long>(rng() % 100), 0.001, 0.01};
    ledger = record_usage(ledger, phase, usage);
    in_sum += usage.input_tokens;
    out_sum += usage.output_tokens;
  }
  EXPECT_EQ(ledger.totals().input_tokens, in_sum);
  EXPECT_EQ(ledger.totals().output_tokens, out_sum);
  long long by_rows_in = 0;
  for (const auto& row : ledger.rows) by_rows_in += row.input_tokens;
  EXPECT_EQ(by_rows_in, in_sum);
}

// --- serialization ------------------------------------------------------------------

TEST(Serialization, PlanRoundTripIsByteStable) {
  const ExperimentPlan plan = minimal_plan();
  const Json once = json_of(plan);
  const Json twice = json_of(experiment_plan_from_json(once));
  EXPECT_EQ(dump_json(once), dump_json(twice));
}

TEST(Serialization, HypothesisRoundTrip) {
  Hypothesis h;
  h.steady_states = {minimal_state("a"), minimal_state("b")};
  h.scenario = {"narrative", {pod_kill_fault()}};
  h.statement = "a and b hold";
  const Json once = json_of(h);
  EXPECT_EQ(dump_json(once), dump_json(json_of(hypothesis_from_json(once))));
}

TEST(Serialization, LedgerRoundTrip) {
  CostLedger ledger;
  ledger = record_usage(ledger, Phase::Pre, {10, 5, 0.25, 0.01});
  ledger = record_usage(ledger, Phase::Post, {7, 3, 0.5, 0.02});
  const Json once = json_of(ledger);
  EXPECT_EQ(dump_json(once), dump_json(json_of(cost_ledger_from_json(once))));
}
