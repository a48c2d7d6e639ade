#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace isoweb {

enum class ErrorCode {
  NoDualPoint,
  NonPlanarFace,
  IsotropicFace,
  ZeroDenominator,
  CollinearPoints,
  DegenerateTangents,
  DegenerateVertex,
  DegenerateFace,
  DegenerateParameters,
  SingularStep,
  SeedOffLine,
  ZeroMultiplier,
  ZeroPivot,
  ParallelTangents,
  InconsistentLift,
  EllipticPoint,
  FlatPoint,
  CrossedFlatPoint,
  PointAtInfinity,
  StepFailed,
  InconsistentRoles,
  LinearSolveFailure,
  StallDetected,
  ContinuationFailed,
  ZeroEdge,
  NoFootPoint,
  BadTopology,
  EmptySelection,
  InvalidInput,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code. Numerical failures that still
/// produce a usable result are reported through result flags instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace isoweb
