#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gbs {

/// Failure categories raised by the library. The CLI maps these to exit codes.
enum class ErrorKind {
  Domain,              // non-analytic evaluation point (÷0, sqrt/log of ≤ 0)
  Overflow,            // jet coefficient magnitude above 1e300
  OrderMismatch,       // jets of different truncation order combined
  OrderExceeded,       // derivative requested beyond the truncation order
  Parse,               // malformed expression or scene text
  NoConvergence,       // quadrature refinement did not settle
  DegenerateFrame,     // Gram–Schmidt on a rank-deficient frame
  SingularPoint,       // quantity undefined on the singular set
  NotArclength,        // κ_g requested along a non-unit-speed curve
  DegeneratePoint,     // zero of λ with vanishing gradient
  OpenCurve,           // stitching failure on a closed surface
  RankZero,            // φ_p vanished entirely (corank 2)
  HigherDegeneracy,    // singular point that is neither A2 nor A3
  AtA3Point,           // singular curvature evaluated at an A3 point
  Inconclusive,        // A3 sign could not be decided
  TailFitFailure,      // power-law tail extrapolation failed
  GluingError,         // region complex is not a closed surface
  NoStabilization,     // integer counts changed under every grid doubling
  ImmersionFailure,    // f_u × f_v vanished
  NotConvex,           // det L ≤ 0 for a Blaschke input
  LinearSolveFailure,  // singular 3×3 system in the structure equations
  FrontConditionViolated,
  CriteriaMismatch,    // ψ-based and front-based classifiers disagree
  TriangleTouchesSigma,
  UnclassifiedSingularity,
  Io,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Expression syntax error with the 1-based column of the offending token.
class ExprParseError : public Error {
 public:
  ExprParseError(const std::string& what, std::size_t column)
      : Error(ErrorKind::Parse, what + " at column " + std::to_string(column)), message_(what), column_(column) {}

  const std::string& message() const noexcept { return message_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string message_;
  std::size_t column_;
};

}  // namespace gbs
