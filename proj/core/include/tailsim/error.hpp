#pragma once

#include <stdexcept>
#include <string>

namespace tailsim {

// Base type for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Argument outside an operation's documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid morphology or model construction; the message names the offending field.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// Element with zero-length rest geometry or collapsed arms.
class DegenerateElementError : public Error {
 public:
  using Error::Error;
};

// Scatter index out of range while summing element matrices.
class AssemblyError : public Error {
 public:
  using Error::Error;
};

// Constraint reduction left (or was given) a system with an unconstrained mode.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

// Incremental or iterative scheme failed to reach equilibrium.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Root-finding for a calibration target failed; message reports the bracket.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

// Commanded tendon displacement exceeds the achievable shortening.
class SaturationError : public Error {
 public:
  SaturationError(const std::string& what, double max_shortening_mm)
      : Error(what), max_shortening_mm(max_shortening_mm) {}
  double max_shortening_mm;
};

// Malformed statistical input (too few samples, mismatched sizes).
class StatsError : public Error {
 public:
  using Error::Error;
};

// Config schema violation; the message names the key and expected type.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Missing or unreadable/unwritable file.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tailsim
