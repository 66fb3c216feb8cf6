#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "chaoscycle/model.hpp"
#include "chaoscycle/sim_cluster.hpp"

namespace chaoscycle {

// Cycle configuration, loaded from a JSON file. Documented keys: backend,
// api_base, api_key_env, model, price_in_per_1k, price_out_per_1k, max_loops,
// max_steady_states, seed, transcript, experiment_max_total_s, and the sim
// timing block {restart_delay_s, pod_startup_delay_s, base_latency_ms}.
struct CycleConfig {
  std::string backend = "replay";  // http | replay
  std::string api_base;
  std::string api_key_env = "CHAOSCYCLE_API_KEY";
  std::string model = "gpt-4o";
  double price_in_per_1k = 0.0;
  double price_out_per_1k = 0.0;
  int max_loops = 3;
  int max_steady_states = 4;
  std::uint64_t seed = 0;
  std::string transcript;  // replay backend input
  std::optional<int> experiment_max_total_s;
  ClusterConfig sim;
};

CycleConfig config_from_json(const Json& j);
CycleConfig load_config(const std::string& path);

}  // namespace chaoscycle
