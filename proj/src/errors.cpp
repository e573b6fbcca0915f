#include "rsvoronoi/errors.hpp"

namespace rsv {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::EmptyPattern: return "EmptyPattern";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::InvalidProbability: return "InvalidProbability";
    case Errc::InvalidM: return "InvalidM";
    case Errc::InvalidSequence: return "InvalidSequence";
    case Errc::InvalidDomain: return "InvalidDomain";
    case Errc::PointOutsideDomain: return "PointOutsideDomain";
    case Errc::DuplicatePoint: return "DuplicatePoint";
    case Errc::LocationOutsideDomain: return "LocationOutsideDomain";
    case Errc::DisconnectedNetwork: return "DisconnectedNetwork";
    case Errc::SnapToleranceExceeded: return "SnapToleranceExceeded";
    case Errc::RetentionOutOfRange: return "RetentionOutOfRange";
    case Errc::DominatingIntensityViolated: return "DominatingIntensityViolated";
    case Errc::CovarianceNotFactorizable: return "CovarianceNotFactorizable";
    case Errc::AllCandidatesDisqualified: return "AllCandidatesDisqualified";
    case Errc::ConfigMismatch: return "ConfigMismatch";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorClass classify(Errc code) {
  switch (code) {
    case Errc::ParseError:
    case Errc::IoError:
    case Errc::InvalidProbability:
    case Errc::InvalidM:
    case Errc::InvalidSequence:
    case Errc::DuplicatePoint:
    case Errc::ConfigMismatch:
      return ErrorClass::Input;
    case Errc::EmptyPattern:
    case Errc::TooFewPoints:
    case Errc::InvalidDomain:
    case Errc::PointOutsideDomain:
    case Errc::LocationOutsideDomain:
    case Errc::DisconnectedNetwork:
    case Errc::SnapToleranceExceeded:
    case Errc::RetentionOutOfRange:
    case Errc::AllCandidatesDisqualified:
      return ErrorClass::Domain;
    default:
      return ErrorClass::Internal;
  }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace rsv
