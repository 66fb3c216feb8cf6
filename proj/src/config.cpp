#include "chaoscycle/config.hpp"

#include <fstream>

namespace chaoscycle {

CycleConfig config_from_json(const Json& j) {
  CycleConfig c;
  c.backend = j.value("backend", c.backend);
  if (c.backend != "http" && c.backend != "replay")
    fail(ErrorCode::InvalidValue, "backend must be 'http' or 'replay'");
  c.api_base = j.value("api_base", c.api_base);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.model = j.value("model", c.model);
  c.price_in_per_1k = j.value("price_in_per_1k", c.price_in_per_1k);
  c.price_out_per_1k = j.value("price_out_per_1k", c.price_out_per_1k);
  c.max_loops = j.value("max_loops", c.max_loops);
  c.max_steady_states = j.value("max_steady_states", c.max_steady_states);
  c.seed = j.value("seed", c.seed);
  c.transcript = j.value("transcript", c.transcript);
  if (j.contains("experiment_max_total_s"))
    c.experiment_max_total_s = j.at("experiment_max_total_s").get<int>();
  if (j.contains("sim")) {
    const auto& sim = j.at("sim");
    c.sim.restart_delay_s = sim.value("restart_delay_s", c.sim.restart_delay_s);
    c.sim.pod_startup_delay_s = sim.value("pod_startup_delay_s", c.sim.pod_startup_delay_s);
    c.sim.base_latency_ms = sim.value("base_latency_ms", c.sim.base_latency_ms);
  }
  if (c.max_loops < 0 || c.max_steady_states < 1)
    fail(ErrorCode::InvalidValue, "max_loops must be >= 0 and max_steady_states >= 1");
  return c;
}

CycleConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::MalformedDocument, path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace chaoscycle
