#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace membif {

enum class ErrorKind {
  InvalidParams,
  DegenerateAxis,
  InvalidOffset,
  SingularityHit,
  ArcLimit,
  OutOfRange,
  NotAdmissible,
  TooFewSamples,
  NoConvergence,
  LeftAdmissibleRegion,
  BoundaryValueVanishes,
  AxisSingularity,
  GridTooCoarse,
  SolverFailure,
  IncompleteEvidence,
  AmplitudeTooLarge,
  IoFailure,
  ParseError,
  UsageError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// True for failures of a numerical procedure (as opposed to bad input).
bool is_numerical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace membif
