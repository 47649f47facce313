#pragma once

#include <stdexcept>
#include <string>

namespace hjmm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A curve holds non-finite samples or does not match its grid.
class InvalidCurveError : public Error {
 public:
  using Error::Error;
};

/// Grid construction failed, or a shift/time is not a multiple of the spacing.
class GridAlignmentError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain where a quantity is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Mark measure without closed-form exponential moments on the requested route.
class UnsupportedMeasureError : public Error {
 public:
  using Error::Error;
};

/// Model or run configuration violates its schema or invariants.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : Error(what), key_(std::move(key)) {}
  /// Offending JSON key (last path component), empty when not key-specific.
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// NaN/overflow while stepping a path.
class ExplosionError : public Error {
 public:
  using Error::Error;
};

/// Brody-Hughston density lost or gained mass beyond tolerance.
class ConservationError : public Error {
 public:
  ConservationError(const std::string& what, double time, double mass)
      : Error(what), time_(time), mass_(mass) {}
  double time() const noexcept { return time_; }
  double mass() const noexcept { return mass_; }

 private:
  double time_;
  double mass_;
};

/// Statistical test requested on too few paths.
class InsufficientSampleError : public Error {
 public:
  using Error::Error;
};

}  // namespace hjmm
