#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <numbers>
#include <unsupported/Eigen/FFT>

#include "qpr/drive.hpp"
#include "qpr/errors.hpp"
#include "qpr/gaussian.hpp"
#include "qpr/hermite.hpp"

namespace qpr {

/// Spatial grid and step size of the split-step solver.
template <typename Scalar = double>
struct GridSpec {
  Scalar half_width = Scalar(15);
  int points = 2048;
  Scalar dt{};  // <= 0 selects period/4096

  static bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

  Scalar step_for(const DriveClock<Scalar>& clock) const {
    return dt > Scalar(0) ? dt : clock.period() / Scalar(4096);
  }

  void validate(const ModeParams<Scalar>& mode,
                const DriveClock<Scalar>& clock) const {
    if (!(half_width >= Scalar(10) / std::sqrt(mode.omega0)))
      throw ConfigError("grid half_width must be >= 10/sqrt(omega0)");
    if (points < 1024 || !is_pow2(points))
      throw ConfigError("grid points must be a power of two >= 1024");
    if (!(step_for(clock) <= clock.period() / Scalar(1024)))
      throw ConfigError("grid dt must be <= drive period / 1024");
  }
};

using GridSpecd = GridSpec<double>;

/// Sampled wavefunction on the uniform grid q in [-L, L).
template <typename Scalar = double>
struct GridState {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> q;
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> psi;
  Scalar dx{};
  Scalar tau{};
};

using GridStated = GridState<double>;

template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> gaussian_on_grid(
    const GaussianModeState<Scalar>& s,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& q) {
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> psi(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i)
    psi[i] = s.a * std::exp(-s.b * q[i] * q[i]);
  return psi;
}

template <typename Scalar>
Scalar grid_norm_sq(const GridState<Scalar>& g) {
  return g.psi.squaredNorm() * g.dx;
}

/// |<psi1|psi2>|^2 / (|psi1|^2 |psi2|^2) on a common grid.
template <typename Scalar>
Scalar fidelity(const Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>& a,
                const Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>& b) {
  const std::complex<Scalar> ov = a.adjoint() * b;
  return std::norm(ov) / (a.squaredNorm() * b.squaredNorm());
}

/// Second-order split-step (Strang) propagation of one mode through the
/// drive window: half potential / full kinetic / half potential per step,
/// with the frequency sampled at the interval midpoint. The kinetic
/// factor acts in the spectral basis. Throws GridOverflow when more than
/// 1e-8 of the probability reaches the outer 10% of the box.
template <typename Scalar>
GridState<Scalar> evolve_grid(const ModeParams<Scalar>& mode,
                              const DriveClock<Scalar>& clock,
                              const GridSpec<Scalar>& grid) {
  using C = std::complex<Scalar>;
  using VecC = Eigen::Matrix<C, Eigen::Dynamic, 1>;
  grid.validate(mode, clock);

  const int n = grid.points;
  const Scalar L = grid.half_width;
  const Scalar dx = Scalar(2) * L / Scalar(n);
  GridState<Scalar> g;
  g.q.resize(n);
  for (int i = 0; i < n; ++i) g.q[i] = -L + dx * Scalar(i);
  g.dx = dx;
  g.psi = gaussian_on_grid(initial_state(mode), g.q);

  const Scalar tau_f = clock.tau_final();
  const long steps = std::lround(std::ceil(tau_f / grid.step_for(clock)));
  const Scalar dt = tau_f / Scalar(steps);

  // kinetic phase exp(-i k^2 dt / 2) on the fft frequency layout
  VecC kinetic(n);
  const Scalar dk = std::numbers::pi_v<Scalar> / L;
  for (int i = 0; i < n; ++i) {
    const Scalar k = dk * Scalar(i < n / 2 ? i : i - n);
    kinetic[i] = std::exp(C(0, -k * k * dt / Scalar(2)));
  }

  Eigen::FFT<Scalar> fft;
  VecC spectral(n);
  const int edge = n / 10 / 2;  // outer 10% of the box, both sides
  auto check_edges = [&]() {
    Scalar leak = (g.psi.head(edge).squaredNorm() +
                   g.psi.tail(edge).squaredNorm()) *
                  dx;
    if (leak > Scalar(1e-8))
      throw GridOverflow("wavepacket reached the grid edge (leak " +
                         std::to_string(double(leak)) +
                         "); enlarge half_width");
  };

  for (long s = 0; s < steps; ++s) {
    const Scalar t_mid = tau_f * ((Scalar(s) + Scalar(0.5)) / Scalar(steps));
    const Scalar w2 = mode_frequency_sq(mode, clock, t_mid);
    for (int i = 0; i < n; ++i)
      g.psi[i] *= std::exp(C(0, -w2 * g.q[i] * g.q[i] * dt / Scalar(4)));
    fft.fwd(spectral, g.psi);
    spectral.array() *= kinetic.array();
    fft.inv(g.psi, spectral);
    for (int i = 0; i < n; ++i)
      g.psi[i] *= std::exp(C(0, -w2 * g.q[i] * g.q[i] * dt / Scalar(4)));
    if (s % 256 == 0) check_edges();
  }
  check_edges();
  g.tau = tau_f;
  return g;
}

/// Projections |<n|psi>|^2 onto the static eigenstates by grid
/// quadrature.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> fock_probabilities(
    const GridState<Scalar>& g, Scalar omega0, int n_max) {
  using C = std::complex<Scalar>;
  Eigen::Matrix<C, Eigen::Dynamic, 1> c =
      Eigen::Matrix<C, Eigen::Dynamic, 1>::Zero(n_max + 1);
  for (Eigen::Index i = 0; i < g.q.size(); ++i) {
    const auto phi = oscillator_eigenfunctions(g.q[i], omega0, n_max);
    c += phi.template cast<C>() * (g.psi[i] * g.dx);
  }
  return c.cwiseAbs2();
}

/// Excess kurtosis of |psi|^2; zero for a Gaussian density.
template <typename Scalar>
Scalar excess_kurtosis(const GridState<Scalar>& g) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w = g.psi.cwiseAbs2() * g.dx;
  const Scalar mass = w.sum();
  const Scalar mean = g.q.dot(w) / mass;
  Scalar m2 = 0, m4 = 0;
  for (Eigen::Index i = 0; i < g.q.size(); ++i) {
    const Scalar d = g.q[i] - mean;
    m2 += d * d * w[i];
    m4 += d * d * d * d * w[i];
  }
  m2 /= mass;
  m4 /= mass;
  return m4 / (m2 * m2) - Scalar(3);
}

}  // namespace qpr
