#pragma once

#include <stdexcept>
#include <string>

namespace chaoscycle {

enum class ErrorCode {
  // input / manifest parsing
  MalformedDocument,
  EmptyInput,
  MissingReference,
  DuplicateResourceId,
  InvalidValue,
  PathNotFound,
  PathExists,
  IoError,
  // gateway
  SchemaViolationExhausted,
  BackendUnavailable,
  TranscriptMiss,
  PolicyRejected,
  // hypothesis phase
  DuplicateStateExhausted,
  ThresholdInconsistent,
  SelectorUnresolvableExhausted,
  // experiment phase
  PlanInvalidExhausted,
  IntentChanged,
  WorkflowUnsound,
  // cluster backend
  SelectorMatchesNothing,
  UnknownService,
  DeployFailed,
  // analysis / improvement
  ReconfigInvalidExhausted,
  RepeatedReconfiguration,
  // pipeline / cli
  SummaryIncompleteExhausted,
  SchemaVersionMismatch,
  UsageError,
};

const char* error_code_name(ErrorCode code);

class CycleError : public std::runtime_error {
 public:
  CycleError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw CycleError(code, message);
}

}  // namespace chaoscycle
