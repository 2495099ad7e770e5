#pragma once

#include <stdexcept>
#include <string>

namespace carnot {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed argument: wrong dimension, bad range, unparseable definition.
struct InvalidInput : Error {
  using Error::Error;
};

struct DimensionMismatch : InvalidInput {
  using InvalidInput::InvalidInput;
};

/// Group product requested beyond the supported series truncation depth.
struct UnsupportedStep : Error {
  using Error::Error;
};

/// Operation defined only for a specific group (or class of groups).
struct UnsupportedGroup : Error {
  using Error::Error;
};

/// Abnormal multiplier passed where only normal dynamics are defined.
struct UnsupportedMode : Error {
  using Error::Error;
};

/// Size of the configuration vanishes; the correction system is degenerate.
struct SingularConfiguration : Error {
  using Error::Error;
};

/// Width of the column tuple vanishes; no inverse exists.
struct SingularMatrix : Error {
  using Error::Error;
};

/// The bracket map lost rank numerically (guarded; cannot happen for
/// bracket-generating algebras).
struct RankDeficiency : Error {
  using Error::Error;
};

/// Samples failed the (1,C) quasi-geodesic validation.
struct NotAQuasiGeodesic : Error {
  NotAQuasiGeodesic(const std::string& what, double t1, double t2)
      : Error(what), witness_t1(t1), witness_t2(t2) {}
  double witness_t1;
  double witness_t2;
};

/// Curve evaluated outside its stated domain.
struct DomainError : Error {
  using Error::Error;
};

}  // namespace carnot
