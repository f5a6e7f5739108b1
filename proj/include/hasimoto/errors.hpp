#pragma once

#include <stdexcept>
#include <string>

namespace hasimoto {

/// Input outside the mathematical domain of an operation (non-tangent vector,
/// non-positive metric density, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Stereographic inverse requested at the projection pole.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Frenet data requested where the curvature vanishes.
class FrameUndefinedError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Chart points leaving the working region.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// Invalid scenario, parameter combination or request.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Request for functionality outside the supported set (e.g. derivative order > 4).
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite or exploding state during time integration.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time_(last_valid_time) {}

  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

}  // namespace hasimoto
