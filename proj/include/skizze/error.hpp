#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skizze {

enum class ErrorKind {
  InvalidArgument,
  NumericFailure,
  DegenerateLocus,
  DegenerateMetric,
  TraceFailure,
  ConditioningFailure,
  ExtractionFailure,
  StructuralError,
  ColoringContradiction,
  RefusedMove,
  CapExceeded,
  UndefinedDirection,
  DivisionDegenerate,
  AdvectionSingular,
  UnresolvedCluster,
  ParseError,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::NumericFailure: return "numeric-failure";
    case ErrorKind::DegenerateLocus: return "degenerate-locus";
    case ErrorKind::DegenerateMetric: return "degenerate-metric";
    case ErrorKind::TraceFailure: return "trace-failure";
    case ErrorKind::ConditioningFailure: return "conditioning-failure";
    case ErrorKind::ExtractionFailure: return "extraction-failure";
    case ErrorKind::StructuralError: return "structural-error";
    case ErrorKind::ColoringContradiction: return "coloring-contradiction";
    case ErrorKind::RefusedMove: return "refused-move";
    case ErrorKind::CapExceeded: return "cap-exceeded";
    case ErrorKind::UndefinedDirection: return "undefined-direction";
    case ErrorKind::DivisionDegenerate: return "division-degenerate";
    case ErrorKind::AdvectionSingular: return "advection-singular";
    case ErrorKind::UnresolvedCluster: return "unresolved-cluster";
    case ErrorKind::ParseError: return "parse-error";
  }
  return "unknown";
}

/// Single exception type for the library; `kind()` distinguishes the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace skizze
