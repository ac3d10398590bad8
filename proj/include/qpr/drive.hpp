#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "qpr/errors.hpp"

namespace qpr {

/// Timing of the modulation window: the coupling oscillates at frequency
/// 2 + detuning for an exact integer number of cycles and is static
/// otherwise.
template <typename Scalar = double>
struct DriveClock {
  Scalar detuning{};
  int cycles{1};

  Scalar frequency() const { return Scalar(2) + detuning; }
  Scalar period() const {
    return Scalar(2) * std::numbers::pi_v<Scalar> / frequency();
  }
  Scalar tau_final() const { return period() * Scalar(cycles); }
};

/// Dimensionless drive parameters of the coupled pair: static coupling
/// beta0, modulation amplitude beta1, detuning and cycle count.
template <typename Scalar = double>
struct DriveSpec {
  Scalar beta0{};
  Scalar beta1{};
  Scalar detuning{};
  int cycles{1};

  DriveClock<Scalar> clock() const { return {detuning, cycles}; }
  Scalar tau_final() const { return clock().tau_final(); }

  /// Throws ConfigError unless both static mode frequencies are real and
  /// the drive window is well defined. A transiently negative
  /// frequency-squared during a cycle is allowed.
  void validate() const {
    if (!(beta1 >= Scalar(0)))
      throw ConfigError("beta1 must be >= 0, got " + std::to_string(beta1));
    if (!(std::abs(beta0) < Scalar(1)))
      throw ConfigError("|beta0| must be < 1, got " + std::to_string(beta0));
    if (!(beta0 + beta1 < Scalar(1)))
      throw ConfigError("beta0 + beta1 must be < 1, got " +
                        std::to_string(beta0 + beta1));
    if (!(Scalar(2) + detuning > Scalar(0)))
      throw ConfigError("drive frequency 2 + detuning must be positive");
    if (cycles < 1) throw ConfigError("cycles must be a positive integer");
  }
};

/// One parametrically driven normal mode. The instantaneous
/// frequency-squared during the drive window is
///   omega0_sq * (1 + sign * depth * sin((2 + detuning) tau))
/// which equals omega0_sq + mod_amp * sin(...) with mod_amp stored
/// exactly.
template <typename Scalar = double>
struct ModeParams {
  int sign{+1};        // +1 for the in-phase mode, -1 for the out-of-phase one
  Scalar omega0{1};    // static frequency, sqrt(omega0_sq)
  Scalar omega0_sq{1}; // 1 + sign*beta0 for the coupled pair
  Scalar depth{0};     // modulation depth h = beta1 / omega0_sq, >= 0
  Scalar mod_amp{0};   // signed modulation amplitude, sign*beta1

  /// Mode built from a static frequency-squared and a signed modulation
  /// amplitude (the diagonal entries of a reduced coupling system).
  static ModeParams from_lambdas(Scalar lambda0, Scalar lambda1) {
    if (!(lambda0 > Scalar(0)))
      throw NotPositiveDefinite("mode frequency-squared must be positive");
    ModeParams m;
    m.sign = lambda1 < Scalar(0) ? -1 : +1;
    m.omega0_sq = lambda0;
    m.omega0 = std::sqrt(lambda0);
    m.depth = std::abs(lambda1) / lambda0;
    m.mod_amp = lambda1;
    return m;
  }
};

/// The sigma = + normal mode of the coupled pair.
template <typename Scalar>
ModeParams<Scalar> plus_mode(const DriveSpec<Scalar>& drive) {
  ModeParams<Scalar> m;
  m.sign = +1;
  m.omega0_sq = Scalar(1) + drive.beta0;
  m.omega0 = std::sqrt(m.omega0_sq);
  m.depth = drive.beta1 / m.omega0_sq;
  m.mod_amp = drive.beta1;
  return m;
}

/// The sigma = - normal mode; it sees the opposite-sign (out-of-phase)
/// modulation.
template <typename Scalar>
ModeParams<Scalar> minus_mode(const DriveSpec<Scalar>& drive) {
  ModeParams<Scalar> m;
  m.sign = -1;
  m.omega0_sq = Scalar(1) - drive.beta0;
  m.omega0 = std::sqrt(m.omega0_sq);
  m.depth = drive.beta1 / m.omega0_sq;
  m.mod_amp = -drive.beta1;
  return m;
}

/// Instantaneous frequency-squared of a mode at time tau.
template <typename Scalar>
Scalar mode_frequency_sq(const ModeParams<Scalar>& mode,
                         const DriveClock<Scalar>& clock, Scalar tau) {
  if (tau < Scalar(0) || tau >= clock.tau_final()) return mode.omega0_sq;
  return mode.omega0_sq + mode.mod_amp * std::sin(clock.frequency() * tau);
}

template <typename Scalar>
Scalar mode_frequency_sq(const ModeParams<Scalar>& mode,
                         const DriveSpec<Scalar>& drive, Scalar tau) {
  return mode_frequency_sq(mode, drive.clock(), tau);
}

}  // namespace qpr
