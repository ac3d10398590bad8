#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <numbers>

#include "qpr/drive.hpp"
#include "qpr/gaussian.hpp"

namespace qpr {

/// Projections c_n = <n|psi> of a Gaussian mode state onto the static
/// eigenstates of its mode. Odd coefficients vanish identically (the
/// state has even parity); they are stored as exact zeros.
template <typename Scalar = double>
struct OverlapSet {
  int sign = +1;
  int n_max = 0;
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> c;
  Scalar mass{};               // sum |c_n|^2 over the set
  Scalar tail{};               // 1 - mass
  bool truncation_warning{};   // tail above the warning threshold
};

using OverlapSetd = OverlapSet<double>;

/// Closed-form overlaps via the Gaussian-Hermite integral. With
/// a = 1/2 + b/omega0 the even coefficients obey
///   c_0      = A (omega0/pi)^(1/4) sqrt(pi/(a omega0)),
///   c_{2k+2} = c_{2k} ((1-a)/a) sqrt((2k+1)/(2k+2)),
/// a numerically stable ratio recurrence (|(1-a)/a| < 1 whenever
/// Re b > 0, so the sequence decays).
template <typename Scalar>
OverlapSet<Scalar> overlap_coefficients(const GaussianModeState<Scalar>& state,
                                        const ModeParams<Scalar>& mode,
                                        int n_max,
                                        Scalar warn_tol = Scalar(1e-8)) {
  using C = std::complex<Scalar>;
  if (n_max < 0 || n_max % 2 != 0)
    throw std::invalid_argument("n_max must be even and non-negative");
  if (!(state.b.real() > Scalar(0)))
    throw std::invalid_argument("state width must have positive real part");

  OverlapSet<Scalar> out;
  out.sign = mode.sign;
  out.n_max = n_max;
  out.c = Eigen::Matrix<C, Eigen::Dynamic, 1>::Zero(n_max + 1);

  const C a = Scalar(0.5) + state.b / mode.omega0;
  const C ratio = (Scalar(1) - a) / a;
  C cn = state.a *
         std::pow(mode.omega0 / std::numbers::pi_v<Scalar>, Scalar(0.25)) *
         std::sqrt(std::numbers::pi_v<Scalar> / (a * mode.omega0));
  Scalar mass = 0;
  for (int k = 0; 2 * k <= n_max; ++k) {
    out.c[2 * k] = cn;
    mass += std::norm(cn);
    cn *= ratio * std::sqrt(Scalar(2 * k + 1) / Scalar(2 * k + 2));
  }
  out.mass = mass;
  out.tail = Scalar(1) - mass;
  out.truncation_warning = out.tail > warn_tol;
  return out;
}

/// Policy for choosing the truncation order.
template <typename Scalar = double>
struct TruncationPolicy {
  bool adaptive = true;
  int n_max = 128;          // fixed order when adaptive == false
  Scalar tail_tol = Scalar(1e-6);
  int cap = 512;
  int step = 16;
};

/// Grows n_max in steps until the missing mass drops below tail_tol or
/// the cap is reached.
template <typename Scalar>
OverlapSet<Scalar> overlap_coefficients_adaptive(
    const GaussianModeState<Scalar>& state, const ModeParams<Scalar>& mode,
    const TruncationPolicy<Scalar>& policy = {}) {
  if (!policy.adaptive)
    return overlap_coefficients(state, mode, policy.n_max, policy.tail_tol);
  int n = policy.step;
  for (;; n += policy.step) {
    if (n >= policy.cap) break;
    auto set = overlap_coefficients(state, mode, n, policy.tail_tol);
    if (set.tail < policy.tail_tol) return set;
  }
  return overlap_coefficients(state, mode, policy.cap, policy.tail_tol);
}

}  // namespace qpr
