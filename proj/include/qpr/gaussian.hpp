#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <numbers>

#include "qpr/drive.hpp"

namespace qpr {

/// Gaussian wavefunction of one normal mode, psi(Q) = a * exp(-b Q^2),
/// with complex amplitude a and complex width b, Re(b) > 0.
template <typename Scalar = double>
struct GaussianModeState {
  std::complex<Scalar> a{};
  std::complex<Scalar> b{};
  Scalar tau{};
};

using GaussianModeStated = GaussianModeState<double>;

/// Ground state of the static mode: a = (omega0/pi)^(1/4), b = omega0/2.
template <typename Scalar>
GaussianModeState<Scalar> initial_state(const ModeParams<Scalar>& mode) {
  GaussianModeState<Scalar> s;
  s.a = std::pow(mode.omega0 / std::numbers::pi_v<Scalar>, Scalar(0.25));
  s.b = mode.omega0 / Scalar(2);
  s.tau = Scalar(0);
  return s;
}

/// |a|^2 sqrt(pi / (2 Re b)) - 1; zero for a normalized wavefunction.
template <typename Scalar>
Scalar norm_residual(const GaussianModeState<Scalar>& s) {
  return std::norm(s.a) *
             std::sqrt(std::numbers::pi_v<Scalar> / (Scalar(2) * s.b.real())) -
         Scalar(1);
}

/// ODE state vector (Re a, Im a, Re b, Im b).
template <typename Scalar>
using GaussianVec = Eigen::Matrix<Scalar, 4, 1>;

template <typename Scalar>
GaussianVec<Scalar> pack(const GaussianModeState<Scalar>& s) {
  return GaussianVec<Scalar>(s.a.real(), s.a.imag(), s.b.real(), s.b.imag());
}

template <typename Scalar>
GaussianModeState<Scalar> unpack(const GaussianVec<Scalar>& y, Scalar tau) {
  return {{y[0], y[1]}, {y[2], y[3]}, tau};
}

/// Time derivatives of (Re a, Im a, Re b, Im b) at frequency-squared
/// omega_sq:
///   da/dtau = -i a b
///   db/dtau = i (omega_sq - 4 b^2) / 2
template <typename Scalar>
GaussianVec<Scalar> derivatives(const GaussianVec<Scalar>& y, Scalar omega_sq) {
  const Scalar ar = y[0], ai = y[1], br = y[2], bi = y[3];
  GaussianVec<Scalar> dy;
  dy[0] = ar * bi + ai * br;
  dy[1] = -(ar * br - ai * bi);
  dy[2] = Scalar(4) * br * bi;
  dy[3] = (omega_sq - Scalar(4) * (br * br - bi * bi)) / Scalar(2);
  return dy;
}

template <typename Scalar>
GaussianVec<Scalar> derivatives(const GaussianModeState<Scalar>& s,
                                Scalar omega_sq) {
  return derivatives(pack(s), omega_sq);
}

}  // namespace qpr
