#pragma once

#include <stdexcept>
#include <string>

namespace chlab {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Two fields (or a field and an operator) live on different grids.
struct GridMismatch : Error {
  using Error::Error;
};

/// A request exceeded a hard size guard (e.g. the O(n^2) oracle).
struct SizeExceeded : Error {
  using Error::Error;
};

/// The periodic Green's function derivative was evaluated too close to an
/// integer, where it is not defined.
struct IntegerPointError : Error {
  using Error::Error;
};

/// An operation was applied on a domain it does not support.
struct DomainError : Error {
  using Error::Error;
};

/// A field or state acquired a non-finite (NaN/Inf) value.
struct NonFiniteState : Error {
  using Error::Error;
};

/// Two peakons approached closer than the collision tolerance.
struct CollisionError : Error {
  using Error::Error;
};

/// The sampled positivity audit of a general flux found a witness h <= 0.
struct PositivityViolation : Error {
  PositivityViolation(const std::string& msg, double u, double ux, double value)
      : Error(msg), u(u), ux(ux), value(value) {}
  double u;
  double ux;
  double value;
};

/// A probe interval does not fit inside the field's domain.
struct IntervalOutsideDomain : Error {
  using Error::Error;
};

/// A decay-rate window contains no usable signal.
struct DegenerateWindow : Error {
  using Error::Error;
};

/// Scenario/configuration file errors (bad schema, unknown keys, missing files).
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace chlab
