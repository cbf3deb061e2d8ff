#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace feshbach {

enum class ErrorKind {
  InvalidArgument,
  Config,
  NumericFailure,
  DomainTooSmall,
  AtEigenvalue,
  AssumptionViolation,
  SchurPreconditionFailed,
  SchurComplementSingular,
  ContourCollision,
  CompanionSingular,
  NearResonance,
  IsomorphismViolation,
  NumericInconsistency,
  SpuriousCrossing,
  FitUnreliable,
  InvalidRange,
  NotFound,
  ExpansionMismatch,
  GramDegenerate,
};

std::string_view to_string(ErrorKind kind);

// Process exit code used by the command line tool for an error of this kind:
// 1 validation, 2 scientific-check failure, 3 numeric failure.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace feshbach
