#pragma once

#include <stdexcept>
#include <string>

namespace rediffuse {

// Invalid user-supplied configuration (bad flag, malformed config file,
// unknown key). Maps to exit code 2 in the CLI.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pipeline phase failed at runtime (training diverged, unwritable output,
// endpoint unreachable). Maps to exit code 3 in the CLI.
class PhaseError : public std::runtime_error {
 public:
  PhaseError(std::string phase, const std::string& msg)
      : std::runtime_error(phase + ": " + msg), phase_(std::move(phase)) {}
  const std::string& phase() const { return phase_; }

 private:
  std::string phase_;
};

class TrainingError : public PhaseError {
 public:
  explicit TrainingError(const std::string& msg) : PhaseError("train", msg) {}
};

// Remote variation API failure. Each failure mode carries a distinct phase so
// callers can tell a dead host from a slow one from a protocol violation.
class RemoteError : public std::runtime_error {
 public:
  enum class Phase { connect, timeout, http_status, payload };

  RemoteError(Phase phase, const std::string& msg)
      : std::runtime_error(std::string(phase_name(phase)) + ": " + msg),
        phase_(phase) {}

  Phase phase() const { return phase_; }

  static const char* phase_name(Phase p) {
    switch (p) {
      case Phase::connect: return "remote connect failed";
      case Phase::timeout: return "remote timed out";
      case Phase::http_status: return "remote rejected parameters";
      case Phase::payload: return "remote payload malformed";
    }
    return "remote error";
  }

 private:
  Phase phase_;
};

}  // namespace rediffuse
