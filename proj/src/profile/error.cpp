#include "membif/error.hpp"

namespace membif {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::DegenerateAxis: return "DegenerateAxis";
    case ErrorKind::InvalidOffset: return "InvalidOffset";
    case ErrorKind::SingularityHit: return "SingularityHit";
    case ErrorKind::ArcLimit: return "ArcLimit";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NotAdmissible: return "NotAdmissible";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::LeftAdmissibleRegion: return "LeftAdmissibleRegion";
    case ErrorKind::BoundaryValueVanishes: return "BoundaryValueVanishes";
    case ErrorKind::AxisSingularity: return "AxisSingularity";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::IncompleteEvidence: return "IncompleteEvidence";
    case ErrorKind::AmplitudeTooLarge: return "AmplitudeTooLarge";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UsageError: return "UsageError";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SingularityHit:
    case ErrorKind::ArcLimit:
    case ErrorKind::NoConvergence:
    case ErrorKind::LeftAdmissibleRegion:
    case ErrorKind::BoundaryValueVanishes:
    case ErrorKind::AxisSingularity:
    case ErrorKind::SolverFailure:
    case ErrorKind::IncompleteEvidence:
      return true;
    default:
      return false;
  }
}

}  // namespace membif
