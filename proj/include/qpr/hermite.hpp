#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>

namespace qpr {

/// Orthonormal Hermite functions h_0..h_nmax at x:
///   h_n(x) = H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi)),
/// evaluated by the stable three-term recurrence
///   h_{n+1} = x sqrt(2/(n+1)) h_n - sqrt(n/(n+1)) h_{n-1}.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> hermite_functions(Scalar x,
                                                           int n_max) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> h(n_max + 1);
  h[0] = std::pow(std::numbers::pi_v<Scalar>, Scalar(-0.25)) *
         std::exp(-x * x / Scalar(2));
  if (n_max == 0) return h;
  h[1] = std::sqrt(Scalar(2)) * x * h[0];
  for (int n = 1; n < n_max; ++n)
    h[n + 1] = x * std::sqrt(Scalar(2) / Scalar(n + 1)) * h[n] -
               std::sqrt(Scalar(n) / Scalar(n + 1)) * h[n - 1];
  return h;
}

/// Eigenfunctions phi_0..phi_nmax of the oscillator with frequency omega0
/// at coordinate Q: phi_n(Q) = omega0^(1/4) h_n(sqrt(omega0) Q).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> oscillator_eigenfunctions(
    Scalar q, Scalar omega0, int n_max) {
  const Scalar root = std::sqrt(omega0);
  return std::sqrt(root) * hermite_functions(root * q, n_max);
}

}  // namespace qpr
