#include "feshbach/error.hpp"

namespace feshbach {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Config: return "config-error";
    case ErrorKind::NumericFailure: return "numeric-failure";
    case ErrorKind::DomainTooSmall: return "domain-too-small";
    case ErrorKind::AtEigenvalue: return "at-eigenvalue";
    case ErrorKind::AssumptionViolation: return "assumption-violation";
    case ErrorKind::SchurPreconditionFailed: return "schur-precondition-failed";
    case ErrorKind::SchurComplementSingular: return "schur-complement-singular";
    case ErrorKind::ContourCollision: return "contour-collision";
    case ErrorKind::CompanionSingular: return "companion-singular";
    case ErrorKind::NearResonance: return "near-resonance";
    case ErrorKind::IsomorphismViolation: return "isomorphism-violation";
    case ErrorKind::NumericInconsistency: return "numeric-inconsistency";
    case ErrorKind::SpuriousCrossing: return "spurious-crossing";
    case ErrorKind::FitUnreliable: return "fit-unreliable";
    case ErrorKind::InvalidRange: return "invalid-range";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::ExpansionMismatch: return "expansion-mismatch";
    case ErrorKind::GramDegenerate: return "gram-degenerate";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::Config:
    case ErrorKind::InvalidRange:
      return 1;
    case ErrorKind::ExpansionMismatch:
      return 2;
    default:
      return 3;
  }
}

}  // namespace feshbach
