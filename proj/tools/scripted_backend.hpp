#pragma once

#include <memory>

#include "chaoscycle/gateway.hpp"

// Deterministic stand-in for the LLM backend: every role is answered by a
// pure function of the prompt context, so recorded transcripts replay
// bit-identically. Drives fixture generation and the randomized plan /
// replan suites.

namespace chaoscycle {

enum class ScriptedMode {
  Standard,       // fixes the defect it finds (restartPolicy, replicas)
  FutileReconfig  // proposes distinct reconfigurations that never fix anything
};

std::unique_ptr<Backend> make_scripted_backend(ScriptedMode mode = ScriptedMode::Standard);

}  // namespace chaoscycle
