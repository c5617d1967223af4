#pragma once

#include <stdexcept>
#include <string>

namespace heatreg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong lengths, out-of-range parameters, bad files.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// The distance matrix is not a metric (asymmetry, diagonal, triangle).
class MetricViolation : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NonpositiveReference : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NonDominating : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NotReversible : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NonConvexIntegrand : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A mathematical precondition on the measures fails (e.g. unequal mass).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class MassMismatch : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

}  // namespace heatreg
