#pragma once

#include <stdexcept>
#include <string>

namespace netcut {

// Base of every error thrown by the library. The category maps onto the
// CLI exit codes (1 config, 2 data validation, 3 evaluator).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad run configuration, unknown names, out-of-range arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Ingested data violates a schema or a cross-file invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Accuracy evaluation failed. `kind` distinguishes the failure modes.
class EvaluatorError : public Error {
 public:
  enum class Kind { MissingKey, SpawnFailed, NonZeroExit, Timeout, BadOutput };

  EvaluatorError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace netcut
