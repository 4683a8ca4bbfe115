#pragma once

#include <stdexcept>
#include <string>

namespace gelfand {

/// Failure categories shared by every module. The CLI maps them onto exit codes.
enum class ErrorKind {
  RejectedInput,
  SingularEvaluation,
  WrongClass,
  SearchFailure,
  InternalConsistency,
  NoContraction,
  NonConvergence,
  DomainExit,
  Eigensolver,
  StepFailure,
  Unavailable,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RejectedInput: return "rejected input";
    case ErrorKind::SingularEvaluation: return "singular evaluation";
    case ErrorKind::WrongClass: return "wrong class";
    case ErrorKind::SearchFailure: return "search failure";
    case ErrorKind::InternalConsistency: return "internal consistency";
    case ErrorKind::NoContraction: return "no contraction";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::DomainExit: return "domain exit";
    case ErrorKind::Eigensolver: return "eigensolver";
    case ErrorKind::StepFailure: return "step failure";
    case ErrorKind::Unavailable: return "unavailable";
    case ErrorKind::Io: return "I/O";
  }
  return "unknown";
}

}  // namespace gelfand
