#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rsv {

enum class Errc {
  EmptyPattern,
  TooFewPoints,
  InvalidProbability,
  InvalidM,
  InvalidSequence,
  InvalidDomain,
  PointOutsideDomain,
  DuplicatePoint,
  LocationOutsideDomain,
  DisconnectedNetwork,
  SnapToleranceExceeded,
  RetentionOutOfRange,
  DominatingIntensityViolated,
  CovarianceNotFactorizable,
  AllCandidatesDisqualified,
  ConfigMismatch,
  ParseError,
  IoError,
};

std::string_view to_string(Errc code);

/// Exit-code class used by the command line front end.
enum class ErrorClass { Input = 2, Domain = 3, Internal = 4 };

ErrorClass classify(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace rsv
