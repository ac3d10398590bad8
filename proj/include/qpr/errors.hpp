#pragma once

#include <stdexcept>
#include <string>

namespace qpr {

/// Base class for all qpr runtime errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The ODE integration blew up, produced non-finite values, or had to
/// shrink the step below machine resolution. Carries the time reached.
struct IntegrationFailure : Error {
  IntegrationFailure(const std::string& what, double tau)
      : Error(what + " (tau reached: " + std::to_string(tau) + ")"),
        tau_reached(tau) {}
  double tau_reached;
};

/// The auxiliary linear solution landed on a zero crossing; retry with a
/// perturbed step count.
struct DegenerateSolution : Error {
  using Error::Error;
};

/// A fit was requested on fewer points than the model supports.
struct InsufficientData : Error {
  using Error::Error;
};

/// The modulation matrix is not diagonal in the eigenbasis of the static
/// matrix, so the system does not decouple into independent modes.
struct NotSimultaneouslyDiagonalizable : Error {
  using Error::Error;
};

/// The static coupling matrix has a non-positive eigenvalue.
struct NotPositiveDefinite : Error {
  using Error::Error;
};

/// The wavepacket reached the edge of the spatial grid.
struct GridOverflow : Error {
  using Error::Error;
};

/// Invalid configuration (file syntax, parameter ranges, ...).
struct ConfigError : Error {
  using Error::Error;
};

/// A tracked state with an odd quantum number was requested; parity makes
/// its probability identically zero.
struct SelectionRuleError : ConfigError {
  using ConfigError::ConfigError;
};

}  // namespace qpr
