#pragma once

#include <stdexcept>
#include <string>

namespace bipot {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters outside the admissible domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A quadrature could not reach the requested accuracy, or its
// configuration cannot cover the integrand.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

// A regression did not meet its goodness-of-fit floor.
class FitError : public Error {
 public:
  using Error::Error;
};

// Two independent evaluation routes disagree beyond their tolerance.
class MethodDisagreement : public Error {
 public:
  using Error::Error;
};

// A supplied function violates a bound it was required to satisfy.
class EnvelopeViolation : public Error {
 public:
  using Error::Error;
};

// Malformed input files (configs, dumps).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace bipot
