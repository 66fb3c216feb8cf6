#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "chaoscycle/model.hpp"

// Deterministic discrete-event simulation of a small Kubernetes cluster:
// deployment, pod lifecycle and restartPolicy, Deployment reconciliation,
// Services with uniform request routing, probes, and Chaos-Mesh-style fault
// semantics. Time is integer seconds, advanced one tick at a time; identical
// (manifests, seed, call sequence) always replays the identical trajectory.

namespace chaoscycle {

struct ClusterConfig {
  int restart_delay_s = 5;
  int pod_startup_delay_s = 2;
  double base_latency_ms = 50.0;
  double request_timeout_ms = 1000.0;  // latency charged to failed requests
};

enum class PodPhase { Pending, Running, Failed, Terminated };

std::string to_string(PodPhase phase);

struct SimPod {
  std::string id;
  std::map<std::string, std::string> labels;
  std::string ns = "default";
  PodPhase phase = PodPhase::Pending;
  std::optional<std::string> owner;  // deployment id
  RestartPolicy restart_policy = RestartPolicy::Always;  // standalone pods only
  int pending_until_s = 0;
  // scheduled lifecycle actions (-1 = none)
  int kill_at_s = -1;     // pending pod-kill grace
  int restart_at_s = -1;  // in-place restart or replacement due
  int held_until_s = -1;  // pod-failure hold window end
  bool retired = false;   // replaced deployment pod, kept for the event trail
};

struct SimDeployment {
  std::string id;
  std::string ns = "default";
  int desired_replicas = 1;
  std::map<std::string, std::string> template_labels;
  int replacement_counter = 0;
};

struct SimService {
  std::string id;
  std::string ns = "default";
  std::map<std::string, std::string> selector;
  int port = 80;
  std::uint64_t round_robin = 0;
};

struct ClusterEvent {
  int at_s = 0;
  std::string kind;  // PodKilled | PodRestarted | PodScheduled | FaultStarted |
                     // FaultEnded | ProbeSample | Warning
  std::map<std::string, std::string> detail;
};

struct ActiveFault {
  FaultSpec fault;
  int end_s = 0;
  std::vector<std::string> target_pod_ids;  // pinned at injection
};

class Cluster {
 public:
  Cluster(const ManifestSet& set, std::uint64_t seed, ClusterConfig config = {});

  // Advances the clock in 1 s ticks: expires faults, releases pod-failure
  // holds, runs due restarts/replacements, reconciles deployments.
  void step(int dt_s);

  // Applies a fault to the pods matched by its selector (mode-aware).
  // Throws SelectorMatchesNothing when nothing matches.
  void inject_fault(const FaultSpec& fault, int duration_s);

  // Samples the probe every sample_interval_s while advancing the clock, for
  // duration_override (or the probe's own duration). The aggregate follows
  // the paired threshold's aggregation.
  Measurement run_probe(const ProbeSpec& probe, const Threshold& threshold,
                        std::optional<int> duration_override = std::nullopt);

  // One instantaneous observation of the probe's quantity.
  double sample_value(const ProbeSpec& probe);

  int clock_s() const { return clock_s_; }
  bool all_pods_running() const;
  int running_pod_count(const std::map<std::string, std::string>& selector,
                        const std::string& ns) const;

  const std::vector<SimPod>& pods() const { return pods_; }
  const std::vector<SimDeployment>& deployments() const { return deployments_; }
  const std::vector<SimService>& services() const { return services_; }
  const std::vector<ActiveFault>& active_faults() const { return active_faults_; }
  const std::vector<ClusterEvent>& events() const { return events_; }

  // Event stream as JSON-lines, for debugging and fixtures.
  std::string events_jsonl() const;

 private:
  void tick();
  void reconcile_deployments();
  void emit(const std::string& kind, std::map<std::string, std::string> detail);
  void kill_pod(SimPod& pod, int hold_until, const std::string& fault_name);
  std::vector<size_t> match_pods(const std::map<std::string, std::string>& labels,
                                 const std::string& ns) const;
  std::vector<size_t> pick_targets(std::vector<size_t> matched, const FaultSelector& sel);
  SimService* find_service_for_url(const std::string& url);
  double request_latency_ms(const SimPod& pod) const;
  bool request_dropped(const SimPod& pod);
  std::uint64_t next_random();

  int clock_s_ = 0;
  ClusterConfig config_;
  std::vector<SimPod> pods_;
  std::vector<SimDeployment> deployments_;
  std::vector<SimService> services_;
  std::vector<ActiveFault> active_faults_;
  std::vector<ClusterEvent> events_;
  std::mt19937_64 rng_;
};

// Steps until every pod is Running (deploy settling). Throws DeployFailed if
// the cluster does not settle within max_wait_s.
void settle(Cluster& cluster, int max_wait_s = 60);

}  // namespace chaoscycle
