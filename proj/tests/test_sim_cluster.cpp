#include "chaoscycle/sim_cluster.hpp"

#include <gtest/gtest.h>

#include "chaoscycle/manifests.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace chaoscycle;
using chaoscycle::testing::nginx_set;
using chaoscycle::testing::sockshop_set;

namespace {

FaultSpec pod_kill(std::map<std::string, std::string> labels,
                   SelectorMode mode = SelectorMode::One) {
  FaultSpec f;
  f.kind = FaultKind::PodChaos;
  f.subtype = "pod-kill";
  f.selector.labels = std::move(labels);
  f.selector.mode = mode;
  f.params.kill_grace_s = 0;
  f.name = "kill";
  return f;
}

ProbeSpec pod_count_probe(std::map<std::string, std::string> selector, int duration = 10) {
  ProbeSpec p;
  p.tool = ProbeTool::ClusterApi;
  p.selector = std::move(selector);
  p.quantity = ProbeQuantity::PodCount;
  p.sample_interval_s = 1;
  p.duration_s = duration;
  return p;
}

ProbeSpec http_probe(const std::string& url, ProbeQuantity quantity, int duration = 10) {
  ProbeSpec p;
  p.tool = ProbeTool::HttpLoad;
  p.url = url;
  p.virtual_users = 10;
  p.quantity = quantity;
  p.sample_interval_s = 1;
  p.duration_s = duration;
  return p;
}

int events_of_kind(const Cluster& cluster, const std::string& kind) {
  int n = 0;
  for (const auto& e : cluster.events())
    if (e.kind == kind) ++n;
  return n;
}

}  // namespace

TEST(Deploy, NginxFixtureDeploysOnePodAndOneService) {
  Cluster cluster(nginx_set(), 1);
  ASSERT_EQ(cluster.pods().size(), 1u);
  EXPECT_EQ(cluster.pods()[0].labels.at("app"), "nginx");
  EXPECT_EQ(cluster.pods()[0].restart_policy, RestartPolicy::Never);
  ASSERT_EQ(cluster.services().size(), 1u);
  EXPECT_EQ(cluster.clock_s(), 0);
}

TEST(Deploy, DeploymentPodsPendingThenRunningAfterStartupDelay) {
  ClusterConfig config;
  config.pod_startup_delay_s = 2;
  Cluster cluster(sockshop_set(), 1, config);
  // replicas: carts 2, catalogue 2, front-end 1
  EXPECT_EQ(cluster.pods().size(), 5u);
  for (const auto& pod : cluster.pods()) EXPECT_EQ(pod.phase, PodPhase::Pending);
  cluster.step(2);
  for (const auto& pod : cluster.pods()) EXPECT_EQ(pod.phase, PodPhase::Running);
}

TEST(Deploy, SameSetAndSeedReplayIdenticalEventStreams) {
  Cluster a(sockshop_set(), 99);
  Cluster b(sockshop_set(), 99);
  a.step(10);
  b.step(10);
  a.inject_fault(pod_kill({{"name", "carts"}}), 10);
  b.inject_fault(pod_kill({{"name", "carts"}}), 10);
  a.step(20);
  b.step(20);
  EXPECT_EQ(a.events_jsonl(), b.events_jsonl());
}

TEST(Deploy, UnsatisfiableServiceWarnsButDeploys) {
  auto input = chaoscycle::testing::nginx_input();
  // retarget the Service selector to labels nothing provides
  for (auto& f : input.manifests) {
    if (f.path == "Service.yml") {
      auto pos = f.text.find("app: nginx");
      f.text.replace(pos, 10, "app: ghost");
    }
  }
  Cluster cluster(validate_project_input(input), 1);
  EXPECT_EQ(events_of_kind(cluster, "Warning"), 1);
}

TEST(Step, NeverPodStaysDownForever) {
  Cluster cluster(nginx_set(), 1);
  settle(cluster);
  cluster.step(5);
  cluster.inject_fault(pod_kill({{"app", "nginx"}}), 5);
  for (int t = 0; t < 60; ++t) {
    cluster.step(1);
    EXPECT_EQ(cluster.running_pod_count({{"app", "nginx"}}, "default"), 0);
  }
}

TEST(Step, DeploymentReplacementRunningAtKillPlusRestartDelay) {
  ClusterConfig config;
  config.restart_delay_s = 5;
  Cluster cluster(sockshop_set(), 1, config);
  settle(cluster);

  const int kill_time = cluster.clock_s();
  cluster.inject_fault(pod_kill({{"name", "front-end"}}), 10);
  EXPECT_EQ(cluster.running_pod_count({{"name", "front-end"}}, "default"), 0);

  while (cluster.clock_s() < kill_time + config.restart_delay_s) {
    cluster.step(1);
    if (cluster.clock_s() < kill_time + config.restart_delay_s)
      EXPECT_EQ(cluster.running_pod_count({{"name", "front-end"}}, "default"), 0);
  }
  EXPECT_EQ(cluster.running_pod_count({{"name", "front-end"}}, "default"), 1);
}

TEST(Step, NoFaultsNoFailuresOnlyClockAdvances) {
  Cluster cluster(nginx_set(), 1);
  settle(cluster);
  const auto pods_before = cluster.pods().size();
  const int running_before = cluster.running_pod_count({{"app", "nginx"}}, "default");
  cluster.step(30);
  EXPECT_EQ(cluster.pods().size(), pods_before);
  EXPECT_EQ(cluster.running_pod_count({{"app", "nginx"}}, "default"), running_before);
}

TEST(Faults, PodKillModeOneEmitsOneKillAtInjectionTick) {
  Cluster cluster(sockshop_set(), 7);
  settle(cluster);

  // selector oracle: enumerate matching pods by hand
  int matching = 0;
  for (const auto& pod : cluster.pods())
    if (oracle::selector_matches({{"name", "carts"}}, pod.labels)) ++matching;
  EXPECT_EQ(matching, 2);

  const int t = cluster.clock_s();
  cluster.inject_fault(pod_kill({{"name", "carts"}}, SelectorMode::One), 10);
  int kills = 0;
  for (const auto& e : cluster.events())
    if (e.kind == "PodKilled") {
      EXPECT_EQ(e.at_s, t);
      ++kills;
    }
  EXPECT_EQ(kills, 1);
  EXPECT_EQ(cluster.running_pod_count({{"name", "carts"}}, "default"), 1);
}

TEST(Faults, SelectorMatchingNothingRejected) {
  Cluster cluster(nginx_set(), 1);
  settle(cluster);
  try {
    cluster.inject_fault(pod_kill({{"app", "absent"}}), 10);
    FAIL();
  } catch (const CycleError& e) {
    EXPECT_EQ(e.code(), ErrorCode::SelectorMatchesNothing);
  }
}

TEST(Faults, NetworkDelayRaisesObservedP95DuringWindow) {
  Cluster cluster(sockshop_set(), 1);
  settle(cluster);

  FaultSpec delay;
  delay.kind = FaultKind::NetworkChaos;
  delay.subtype = "delay";
  delay.selector.labels = {{"name", "front-end"}};
  delay.selector.mode = SelectorMode::All;
  delay.params.delay_ms = 800;
  delay.name = "delay";
  cluster.inject_fault(delay, 30);

  const auto probe = http_probe("http://front-end.default.svc.cluster.local/",
                                ProbeQuantity::LatencyP95Ms, 10);
  const Threshold t{Comparator::LT, 2000.0, Aggregation::P95};
  const Measurement m = cluster.run_probe(probe, t);

  std::vector<double> values;
  for (const auto& s : m.samples) values.push_back(s.value);
  EXPECT_GE(oracle::p95(values), 800.0);
  EXPECT_DOUBLE_EQ(m.aggregate, oracle::p95(values));
  EXPECT_DOUBLE_EQ(m.aggregate, 850.0);  // base 50 + delay 800
}

TEST(Faults, PodFailureHeldForDurationThenRestarts) {
  ClusterConfig config;
  config.restart_delay_s = 5;
  Cluster shop(sockshop_set(), 1, config);
  settle(shop);
  FaultSpec failure;
  failure.kind = FaultKind::PodChaos;
  failure.subtype = "pod-failure";
  failure.selector.labels = {{"name", "front-end"}};
  failure.selector.mode = SelectorMode::All;
  failure.name = "hold";
  const int start = shop.clock_s();
  shop.inject_fault(failure, 10);

  // held down for the full window, no replacement during it
  for (int t = 0; t < 10; ++t) {
    shop.step(1);
    EXPECT_EQ(shop.running_pod_count({{"name", "front-end"}}, "default"), 0)
        << "t=" << shop.clock_s();
  }
  // eligible for restart at end; replacement due restart_delay later
  while (shop.clock_s() < start + 10 + config.restart_delay_s) shop.step(1);
  EXPECT_EQ(shop.running_pod_count({{"name", "front-end"}}, "default"), 1);
}

TEST(Faults, StressChaosInflatesLatencyFourfold) {
  Cluster cluster(sockshop_set(), 1);
  settle(cluster);
  FaultSpec stress;
  stress.kind = FaultKind::StressChaos;
  stress.subtype = "cpu";
  stress.selector.labels = {{"name", "front-end"}};
  stress.selector.mode = SelectorMode::All;
  stress.params.cpu_workers = 2;
  stress.name = "stress";
  cluster.inject_fault(stress, 30);

  const auto probe = http_probe("http://front-end.default.svc.cluster.local/",
                                ProbeQuantity::LatencyP95Ms, 5);
  const Measurement m =
      cluster.run_probe(probe, Threshold{Comparator::LT, 2000.0, Aggregation::P95});
  EXPECT_DOUBLE_EQ(m.aggregate, 200.0);  // 50 ms * 4
}

TEST(Faults, LossDropsRequestsDeterministically) {
  Cluster a(sockshop_set(), 5);
  Cluster b(sockshop_set(), 5);
  settle(a);
  settle(b);
  FaultSpec loss;
  loss.kind = FaultKind::NetworkChaos;
  loss.subtype = "loss";
  loss.selector.labels = {{"name", "front-end"}};
  loss.selector.mode = SelectorMode::All;
  loss.params.loss_pct = 50.0;
  loss.name = "loss";
  a.inject_fault(loss, 30);
  b.inject_fault(loss, 30);

  const auto probe = http_probe("http://front-end.default.svc.cluster.local/",
                                ProbeQuantity::SuccessRate, 10);
  const Threshold t{Comparator::GE, 0.0, Aggregation::EverySample};
  const Measurement ma = a.run_probe(probe, t);
  const Measurement mb = b.run_probe(probe, t);
  EXPECT_LT(ma.aggregate, 1.0);
  EXPECT_GT(ma.aggregate, 0.0);
  EXPECT_EQ(ma.samples.size(), mb.samples.size());
  for (size_t i = 0; i < ma.samples.size(); ++i)
    EXPECT_DOUBLE_EQ(ma.samples[i].value, mb.samples[i].value);  // same seed, same draws
}

TEST(Probes, HealthyPodCountConstantOne) {
  Cluster cluster(nginx_set(), 1);
  settle(cluster);
  const Measurement m = cluster.run_probe(
      pod_count_probe({{"app", "nginx"}}, 10),
      Threshold{Comparator::GE, 1.0, Aggregation::EverySample});
  ASSERT_EQ(m.samples.size(), 10u);
  for (const auto& s : m.samples) EXPECT_DOUBLE_EQ(s.value, 1.0);
  EXPECT_DOUBLE_EQ(m.aggregate, 1.0);
}

TEST(Probes, KilledNeverPodDropsToZeroAndStays) {
  Cluster cluster(nginx_set(), 1);
  settle(cluster);
  cluster.inject_fault(pod_kill({{"app", "nginx"}}), 5);
  const Measurement m = cluster.run_probe(
      pod_count_probe({{"app", "nginx"}}, 20),
      Threshold{Comparator::GE, 1.0, Aggregation::EverySample});
  for (const auto& s : m.samples) EXPECT_DOUBLE_EQ(s.value, 0.0);
}

TEST(Probes, SingleDownReplicaStillServedBySurvivor) {
  Cluster cluster(sockshop_set(), 3);
  settle(cluster);
  cluster.inject_fault(pod_kill({{"name", "carts"}}, SelectorMode::One), 30);
  // request-routing oracle: with >=1 Running pod behind the selector every
  // request succeeds, so the success rate must stay exactly 1.0
  EXPECT_EQ(cluster.running_pod_count({{"name", "carts"}}, "default"), 1);
  const Measurement m = cluster.run_probe(
      http_probe("http://carts.default.svc.cluster.local/", ProbeQuantity::SuccessRate, 5),
      Threshold{Comparator::GE, 0.95, Aggregation::EverySample});
  for (const auto& s : m.samples) EXPECT_DOUBLE_EQ(s.value, 1.0);
}

TEST(Probes, UnknownServiceRejected) {
  Cluster cluster(nginx_set(), 1);
  settle(cluster);
  try {
    cluster.run_probe(http_probe("http://ghost.default.svc.cluster.local/",
                                 ProbeQuantity::SuccessRate, 5),
                      Threshold{Comparator::GE, 0.5, Aggregation::EverySample});
    FAIL();
  } catch (const CycleError& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownService);
  }
}

TEST(Probes, ReadyReplicaCountCountsOnlyOwnedPods) {
  Cluster cluster(nginx_set(), 1);  // standalone pod only
  settle(cluster);
  ProbeSpec probe = pod_count_probe({{"app", "nginx"}}, 5);
  probe.quantity = ProbeQuantity::ReadyReplicaCount;
  const Measurement m = cluster.run_probe(
      probe, Threshold{Comparator::GE, 0.0, Aggregation::EverySample});
  for (const auto& s : m.samples) EXPECT_DOUBLE_EQ(s.value, 0.0);

  Cluster shop(sockshop_set(), 1);
  settle(shop);
  ProbeSpec dep_probe = probe;
  dep_probe.selector = {{"name", "carts"}};
  const Measurement md = shop.run_probe(
      dep_probe, Threshold{Comparator::GE, 1.0, Aggregation::EverySample});
  for (const auto& s : md.samples) EXPECT_DOUBLE_EQ(s.value, 2.0);
}

TEST(Probes, AggregateAlwaysMatchesOracleRecompute) {
  Cluster cluster(sockshop_set(), 11);
  settle(cluster);
  cluster.inject_fault(pod_kill({{"name", "front-end"}}), 20);
  const Threshold t{Comparator::GE, 0.95, Aggregation::EverySample};
  const Measurement m = cluster.run_probe(
      http_probe("http://front-end.default.svc.cluster.local/",
                 ProbeQuantity::SuccessRate, 15),
      t);
  EXPECT_DOUBLE_EQ(m.aggregate,
                   oracle::aggregate(m.samples, t.aggregation, t.comparator, t.value));
}
