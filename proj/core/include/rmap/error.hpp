// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace rmap {

// Failure categories. The CLI prints these verbatim as
// "error: <kind>: <message>" and exits nonzero, so the set is part of the
// tool's observable interface and must stay stable.
enum class ErrorKind {
  validation,       // malformed in-memory inputs (shape, range, NaN)
  parameter,        // out-of-domain arguments (ratios, counts, sizes)
  format,           // unparseable or inconsistent file contents
  io,               // filesystem failures (open, read, write)
  numerical,        // singular or ill-conditioned linear systems
  underdetermined,  // fit has fewer informative equations than unknowns
  generation,       // scene synthesis could not satisfy its constraints
  load,             // dataset directory inconsistent or incomplete
  estimator,        // estimator preconditions unmet (too few samples, ...)
  config,           // config file or CLI flag rejected
};

constexpr const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::format: return "format";
    case ErrorKind::io: return "io";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::underdetermined: return "underdetermined";
    case ErrorKind::generation: return "generation";
    case ErrorKind::load: return "load";
    case ErrorKind::estimator: return "estimator";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace rmap
