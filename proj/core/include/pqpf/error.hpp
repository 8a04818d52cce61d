#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pqpf {

enum class ErrorKind {
  Domain,
  NonpositiveMean,
  NonpositiveVariance,
  Numerical,
  DegenerateMatrix,
  EmbeddingFailure,
  OutOfDomain,
  NoTrainingData,
  SeparationDetected,
  DegenerateOccurrence,
  RangeUnidentifiable,
  InsufficientData,
  Parse,
  Validation,
  NoData,
  NotFound,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every library failure is reported through this type. `kind` is what callers
// dispatch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the staged fitter; `stage` names the failing estimation step.
class FitError : public Error {
 public:
  FitError(std::string stage, const Error& cause)
      : Error(cause.kind(), stage + ": " + cause.what()), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace pqpf
