#pragma once

#include <stdexcept>
#include <string>

namespace logeuc {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotSymmetric : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct NotConverged : Error { using Error::Error; };
struct ZeroLogMatrix : Error { using Error::Error; };
struct DegenerateSeries : Error { using Error::Error; };

struct DegreeOverflow : Error { using Error::Error; };
struct NormViolation : Error { using Error::Error; };
struct SchemeMismatch : Error { using Error::Error; };
struct NotPowerOfTwo : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

struct ThetaOutOfRange : Error { using Error::Error; };
struct InsufficientTrials : Error { using Error::Error; };

struct SingleClass : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct NotPsd : Error { using Error::Error; };
struct TooFewSamplesPerClass : Error { using Error::Error; };

struct InvalidRange : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct InconsistentJointCount : Error { using Error::Error; };

/// File/record parsing failure; carries the 1-based line (or record) number.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
  std::size_t line_number;
};

}  // namespace logeuc
