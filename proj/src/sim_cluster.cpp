#include "chaoscycle/sim_cluster.hpp"

#include <algorithm>

#include "chaoscycle/manifests.hpp"
#include "chaoscycle/model_json.hpp"

namespace chaoscycle {

std::string to_string(PodPhase phase) {
  switch (phase) {
    case PodPhase::Pending: return "Pending";
    case PodPhase::Running: return "Running";
    case PodPhase::Failed: return "Failed";
    case PodPhase::Terminated: return "Terminated";
  }
  return "Pending";
}

Cluster::Cluster(const ManifestSet& set, std::uint64_t seed, ClusterConfig config)
    : config_(config), rng_(seed) {
  validate(set);
  for (const auto& r : set.resources) {
    switch (r.kind) {
      case ResourceKind::Pod: {
        SimPod pod;
        pod.id = r.name;
        pod.labels = r.labels;
        pod.ns = r.ns;
        pod.restart_policy = r.restart_policy.value_or(RestartPolicy::Always);
        pod.pending_until_s = config_.pod_startup_delay_s;
        pods_.push_back(std::move(pod));
        emit("PodScheduled", {{"pod", r.name}, {"namespace", r.ns}});
        break;
      }
      case ResourceKind::Deployment: {
        SimDeployment dep;
        dep.id = r.name;
        dep.ns = r.ns;
        dep.desired_replicas = r.replicas.value_or(1);
        dep.template_labels = r.pod_template_labels;
        for (int i = 0; i < dep.desired_replicas; ++i) {
          SimPod pod;
          pod.id = dep.id + "-" + std::to_string(i);
          pod.labels = dep.template_labels;
          pod.ns = dep.ns;
          pod.owner = dep.id;
          pod.pending_until_s = config_.pod_startup_delay_s;
          pods_.push_back(std::move(pod));
          emit("PodScheduled", {{"pod", dep.id + "-" + std::to_string(i)},
                                {"namespace", dep.ns},
                                {"owner", dep.id}});
        }
        deployments_.push_back(std::move(dep));
        break;
      }
      case ResourceKind::Service: {
        SimService svc;
        svc.id = r.name;
        svc.ns = r.ns;
        svc.selector = r.selector;
        svc.port = r.port.value_or(80);
        bool satisfiable = false;
        for (const auto& other : set.resources) {
          if (other.ns != r.ns) continue;
          if (other.kind == ResourceKind::Pod && labels_match(r.selector, other.labels))
            satisfiable = true;
          if (other.kind == ResourceKind::Deployment &&
              labels_match(r.selector, other.pod_template_labels))
            satisfiable = true;
        }
        if (!satisfiable)
          emit("Warning", {{"kind", "UnsatisfiableService"}, {"service", r.name}});
        services_.push_back(std::move(svc));
        break;
      }
      case ResourceKind::Other:
        break;  // retained in the manifest set, not simulated
    }
  }
}

void Cluster::emit(const std::string& kind, std::map<std::string, std::string> detail) {
  events_.push_back({clock_s_, kind, std::move(detail)});
}

// Takes a pod down and schedules what brings it back: replacements for owned
// pods, in-place restarts for standalone Always/OnFailure pods, nothing for
// Never. A pod-failure hold (hold_until >= 0) defers the restart clock to the
// hold's end.
void Cluster::kill_pod(SimPod& pod, int hold_until, const std::string& fault_name) {
  pod.phase = PodPhase::Failed;
  pod.restart_at_s = -1;
  pod.held_until_s = hold_until;
  if (hold_until < 0) {
    const bool restartable =
        pod.owner.has_value() || pod.restart_policy != RestartPolicy::Never;
    if (restartable) pod.restart_at_s = clock_s_ + config_.restart_delay_s;
  }
  std::map<std::string, std::string> detail{{"pod", pod.id}};
  if (!fault_name.empty()) detail["fault"] = fault_name;
  emit("PodKilled", std::move(detail));
}

std::uint64_t Cluster::next_random() { return rng_(); }

// ---------------------------------------------------------------------------
// time

void Cluster::step(int dt_s) {
  if (dt_s < 1) fail(ErrorCode::InvalidValue, "step needs dt_s >= 1");
  for (int i = 0; i < dt_s; ++i) tick();
}

void Cluster::tick() {
  clock_s_ += 1;

  // fault expiry
  for (auto it = active_faults_.begin(); it != active_faults_.end();) {
    if (it->end_s <= clock_s_) {
      emit("FaultEnded", {{"fault", it->fault.name}});
      active_faults_.erase(it);
    } else {
      ++it;
    }
  }

  for (auto& pod : pods_) {
    // pod-failure hold release: the restart clock starts at the hold's end
    if (pod.held_until_s >= 0 && pod.held_until_s <= clock_s_) {
      pod.held_until_s = -1;
      const bool restartable =
          pod.owner.has_value() || pod.restart_policy != RestartPolicy::Never;
      if (pod.phase == PodPhase::Failed && restartable)
        pod.restart_at_s = clock_s_ + config_.restart_delay_s;
    }

    // delayed kills (pod-kill grace period)
    if (pod.kill_at_s >= 0 && pod.kill_at_s <= clock_s_) {
      pod.kill_at_s = -1;
      if (pod.phase == PodPhase::Running || pod.phase == PodPhase::Pending)
        kill_pod(pod, -1, "");
    }

    // startup completion
    if (pod.phase == PodPhase::Pending && pod.pending_until_s <= clock_s_) {
      pod.phase = PodPhase::Running;
      emit("PodRestarted", {{"pod", pod.id}, {"transition", "startup"}});
    }

    // in-place restart of standalone pods
    if (!pod.owner && pod.phase == PodPhase::Failed && pod.restart_at_s >= 0 &&
        pod.restart_at_s <= clock_s_ && pod.held_until_s < 0) {
      pod.restart_at_s = -1;
      pod.phase = PodPhase::Running;
      emit("PodRestarted", {{"pod", pod.id}, {"transition", "restart"}});
    }
  }

  reconcile_deployments();
}

void Cluster::reconcile_deployments() {
  for (auto& dep : deployments_) {
    // schedule replacements for newly failed owned pods
    for (auto& pod : pods_) {
      if (pod.owner != dep.id) continue;
      if ((pod.phase == PodPhase::Failed || pod.phase == PodPhase::Terminated) &&
          pod.restart_at_s < 0 && pod.held_until_s < 0) {
        pod.restart_at_s = clock_s_ + config_.restart_delay_s;
      }
    }
    // due replacements: retire the old pod, start a fresh one Running
    std::vector<SimPod> replacements;
    for (auto& pod : pods_) {
      if (pod.owner != dep.id || pod.phase == PodPhase::Running ||
          pod.phase == PodPhase::Pending)
        continue;
      if (pod.restart_at_s >= 0 && pod.restart_at_s <= clock_s_) {
        pod.restart_at_s = -1;
        pod.retired = true;
        pod.owner.reset();  // no longer counted against the deployment
        SimPod fresh;
        fresh.id = dep.id + "-r" + std::to_string(dep.replacement_counter++);
        fresh.labels = dep.template_labels;
        fresh.ns = dep.ns;
        fresh.owner = dep.id;
        fresh.phase = PodPhase::Running;
        fresh.pending_until_s = clock_s_;
        emit("PodRestarted", {{"pod", fresh.id}, {"transition", "replacement"},
                              {"owner", dep.id}, {"replaces", pod.id}});
        replacements.push_back(std::move(fresh));
      }
    }
    for (auto& pod : replacements) pods_.push_back(std::move(pod));
  }
}

// ---------------------------------------------------------------------------
// faults

std::vector<size_t> Cluster::match_pods(const std::map<std::string, std::string>& labels,
                                        const std::string& ns) const {
  std::vector<size_t> matched;
  for (size_t i = 0; i < pods_.size(); ++i) {
    const auto& pod = pods_[i];
    if (pod.ns != ns) continue;
    if (pod.phase == PodPhase::Failed || pod.phase == PodPhase::Terminated) continue;
    if (labels_match(labels, pod.labels)) matched.push_back(i);
  }
  return matched;
}

std::vector<size_t> Cluster::pick_targets(std::vector<size_t> matched,
                                          const FaultSelector& sel) {
  // sort by pod id, then a seeded Fisher-Yates shuffle; portable across
  // platforms (no std::uniform_int_distribution)
  std::sort(matched.begin(), matched.end(), [&](size_t a, size_t b) {
    return pods_[a].id < pods_[b].id;
  });
  if (sel.mode == SelectorMode::All) return matched;
  for (size_t i = matched.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(next_random() % i);
    std::swap(matched[i - 1], matched[j]);
  }
  const size_t want = sel.mode == SelectorMode::One
                          ? 1
                          : std::min<size_t>(matched.size(), static_cast<size_t>(sel.count));
  matched.resize(std::min(matched.size(), want));
  return matched;
}

void Cluster::inject_fault(const FaultSpec& fault, int duration_s) {
  validate(fault);
  if (duration_s < 1) fail(ErrorCode::InvalidValue, "fault duration must be >= 1 s");

  auto matched = match_pods(fault.selector.labels, fault.selector.ns);
  if (matched.empty())
    fail(ErrorCode::SelectorMatchesNothing,
         "fault '" + fault.name + "' selector matches no pods");
  const auto targets = pick_targets(std::move(matched), fault.selector);

  ActiveFault active;
  active.fault = fault;
  active.end_s = clock_s_ + duration_s;
  for (size_t idx : targets) active.target_pod_ids.push_back(pods_[idx].id);
  std::sort(active.target_pod_ids.begin(), active.target_pod_ids.end());

  emit("FaultStarted", {{"fault", fault.name},
                        {"kind", to_string(fault.kind)},
                        {"subtype", fault.subtype},
                        {"targets", std::to_string(targets.size())}});

  if (fault.kind == FaultKind::PodChaos) {
    const int grace =
        fault.subtype == "pod-kill" ? fault.params.kill_grace_s.value_or(0) : 0;
    for (size_t idx : targets) {
      auto& pod = pods_[idx];
      if (grace > 0) {
        pod.kill_at_s = clock_s_ + grace;
        continue;
      }
      kill_pod(pod, fault.subtype == "pod-failure" ? active.end_s : -1, fault.name);
    }
  }
  // NetworkChaos and StressChaos act through request modifiers while active.
  active_faults_.push_back(std::move(active));
}

// ---------------------------------------------------------------------------
// probes

namespace {

// Extracts (service, namespace) from a cluster-style URL host:
// http://front-end.default.svc.cluster.local/ -> ("front-end", "default").
std::pair<std::string, std::string> service_of_url(const std::string& url) {
  auto host = url;
  const auto scheme = host.find("://");
  if (scheme != std::string::npos) host = host.substr(scheme + 3);
  const auto slash = host.find('/');
  if (slash != std::string::npos) host = host.substr(0, slash);
  const auto colon = host.find(':');
  if (colon != std::string::npos) host = host.substr(0, colon);

  std::vector<std::string> parts;
  size_t start = 0;
  while (start <= host.size()) {
    const auto dot = host.find('.', start);
    if (dot == std::string::npos) {
      parts.push_back(host.substr(start));
      break;
    }
    parts.push_back(host.substr(start, dot - start));
    start = dot + 1;
  }
  const std::string name = parts.empty() ? host : parts[0];
  const std::string ns = parts.size() > 1 && !parts[1].empty() ? parts[1] : "default";
  return {name, ns};
}

}  // namespace

SimService* Cluster::find_service_for_url(const std::string& url) {
  const auto [name, ns] = service_of_url(url);
  for (auto& svc : services_) {
    if (svc.id == name && svc.ns == ns) return &svc;
  }
  return nullptr;
}

double Cluster::request_latency_ms(const SimPod& pod) const {
  double latency = config_.base_latency_ms;
  bool stressed = false;
  for (const auto& active : active_faults_) {
    const bool covers = std::binary_search(active.target_pod_ids.begin(),
                                           active.target_pod_ids.end(), pod.id);
    if (!covers) continue;
    if (active.fault.kind == FaultKind::NetworkChaos && active.fault.subtype == "delay")
      latency += static_cast<double>(active.fault.params.delay_ms.value_or(0));
    if (active.fault.kind == FaultKind::StressChaos) stressed = true;
  }
  return stressed ? latency * 4.0 : latency;
}

bool Cluster::request_dropped(const SimPod& pod) {
  for (auto& active : active_faults_) {
    if (active.fault.kind != FaultKind::NetworkChaos || active.fault.subtype != "loss")
      continue;
    if (!std::binary_search(active.target_pod_ids.begin(), active.target_pod_ids.end(),
                            pod.id))
      continue;
    const double loss = active.fault.params.loss_pct.value_or(0.0);
    if (static_cast<double>(next_random() % 10000) < loss * 100.0) return true;
  }
  return false;
}

double Cluster::sample_value(const ProbeSpec& probe) {
  if (probe.tool == ProbeTool::ClusterApi) {
    int count = 0;
    for (const auto& pod : pods_) {
      if (pod.phase != PodPhase::Running || pod.ns != probe.ns) continue;
      if (!labels_match(probe.selector, pod.labels)) continue;
      if (probe.quantity == ProbeQuantity::ReadyReplicaCount && !pod.owner) continue;
      ++count;
    }
    return static_cast<double>(count);
  }

  SimService* svc = find_service_for_url(probe.url);
  if (!svc) fail(ErrorCode::UnknownService, "no service backs URL '" + probe.url + "'");

  std::vector<size_t> backends;
  for (size_t i = 0; i < pods_.size(); ++i) {
    const auto& pod = pods_[i];
    if (pod.phase == PodPhase::Running && pod.ns == svc->ns &&
        labels_match(svc->selector, pod.labels))
      backends.push_back(i);
  }
  std::sort(backends.begin(), backends.end(), [&](size_t a, size_t b) {
    return pods_[a].id < pods_[b].id;
  });

  int successes = 0;
  std::vector<double> latencies;
  latencies.reserve(static_cast<size_t>(probe.virtual_users));
  for (int vu = 0; vu < probe.virtual_users; ++vu) {
    if (backends.empty()) {
      latencies.push_back(config_.request_timeout_ms);
      continue;
    }
    const auto& pod = pods_[backends[svc->round_robin++ % backends.size()]];
    if (request_dropped(pod)) {
      latencies.push_back(config_.request_timeout_ms);
      continue;
    }
    ++successes;
    latencies.push_back(request_latency_ms(pod));
  }

  if (probe.quantity == ProbeQuantity::SuccessRate)
    return static_cast<double>(successes) / static_cast<double>(probe.virtual_users);
  return percentile95(latencies);
}

Measurement Cluster::run_probe(const ProbeSpec& probe, const Threshold& threshold,
                               std::optional<int> duration_override) {
  validate(probe);
  const int duration = duration_override.value_or(probe.duration_s);
  if (duration < probe.sample_interval_s)
    fail(ErrorCode::InvalidValue, "probe duration shorter than its sample interval");

  Measurement m;
  for (int offset = 0; offset < duration; ++offset) {
    if (offset % probe.sample_interval_s == 0) {
      const double value = sample_value(probe);
      m.samples.push_back({offset, value});
      emit("ProbeSample", {{"quantity", to_string(probe.quantity)},
                           {"value", Json(value).dump()}});
    }
    step(1);
  }
  m.aggregate = aggregate_samples(m.samples, threshold);
  return m;
}

// ---------------------------------------------------------------------------
// introspection

bool Cluster::all_pods_running() const {
  for (const auto& pod : pods_) {
    if (pod.retired) continue;
    if (pod.phase != PodPhase::Running) return false;
  }
  return true;
}

int Cluster::running_pod_count(const std::map<std::string, std::string>& selector,
                               const std::string& ns) const {
  int count = 0;
  for (const auto& pod : pods_) {
    if (pod.phase == PodPhase::Running && pod.ns == ns && labels_match(selector, pod.labels))
      ++count;
  }
  return count;
}

std::string Cluster::events_jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    Json detail = Json::object();
    for (const auto& [k, v] : e.detail) detail[k] = v;
    out += Json{{"at_s", e.at_s}, {"kind", e.kind}, {"detail", detail}}.dump();
    out += "\n";
  }
  return out;
}

void settle(Cluster& cluster, int max_wait_s) {
  for (int waited = 0; waited < max_wait_s; ++waited) {
    if (cluster.all_pods_running()) return;
    cluster.step(1);
  }
  if (!cluster.all_pods_running())
    fail(ErrorCode::DeployFailed, "cluster did not settle within " +
                                      std::to_string(max_wait_s) + " s");
}

}  // namespace chaoscycle
