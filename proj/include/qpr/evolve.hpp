#pragma once

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "qpr/drive.hpp"
#include "qpr/gaussian.hpp"
#include "qpr/integrate.hpp"

namespace qpr {

/// Mode parameters sampled along an evolution.
template <typename Scalar = double>
struct Trajectory {
  std::vector<Scalar> tau;
  std::vector<std::complex<Scalar>> a;
  std::vector<std::complex<Scalar>> b;

  void push(Scalar t, const GaussianVec<Scalar>& y) {
    tau.push_back(t);
    a.emplace_back(y[0], y[1]);
    b.emplace_back(y[2], y[3]);
  }
};

namespace detail {

template <typename Scalar>
void check_gaussian_vec(const GaussianVec<Scalar>& y, Scalar t) {
  if (!y.allFinite())
    throw IntegrationFailure("non-finite mode parameters", double(t));
  const Scalar br = y[2], bi = y[3];
  if (!(br > Scalar(0)))
    throw IntegrationFailure("width parameter Re(b) lost positivity",
                             double(t));
  if (br < Scalar(1e-300))
    throw IntegrationFailure("width parameter Re(b) underflow", double(t));
  if (std::hypot(br, bi) > Scalar(1e12))
    throw IntegrationFailure("width parameter |b| overflow", double(t));
}

// Integrates one segment [t0, t1] with the configured method.
template <typename Scalar, typename Rhs, typename Inspect>
GaussianVec<Scalar> gaussian_segment(Rhs&& rhs, GaussianVec<Scalar> y,
                                     Scalar t0, Scalar t1, Scalar period,
                                     const IntegratorConfig<Scalar>& cfg,
                                     long fixed_steps, Inspect&& inspect) {
  if (cfg.method == IntegratorMethod::FixedRk4)
    return rk4_fixed(rhs, y, t0, t1, fixed_steps, inspect);
  return rk45_adaptive(rhs, y, t0, t1, cfg.rel_tol, cfg.abs_tol,
                       period / Scalar(256), inspect);
}

}  // namespace detail

/// Integrates the Gaussian parameters of one mode through the drive
/// window, from tau = 0 to tau_final. Optionally records the trajectory
/// at samples_per_cycle points per drive cycle.
template <typename Scalar>
GaussianModeState<Scalar> evolve(const ModeParams<Scalar>& mode,
                                 const DriveClock<Scalar>& clock,
                                 const IntegratorConfig<Scalar>& cfg,
                                 Trajectory<Scalar>* traj = nullptr,
                                 int samples_per_cycle = 8) {
  cfg.validate();
  const Scalar tau_f = clock.tau_final();
  const Scalar period = clock.period();
  auto rhs = [&](Scalar t, const GaussianVec<Scalar>& y) {
    return derivatives(y, mode_frequency_sq(mode, clock, t));
  };
  auto inspect = [](Scalar t, const GaussianVec<Scalar>& y) {
    detail::check_gaussian_vec(y, t);
  };

  GaussianVec<Scalar> y = pack(initial_state(mode));
  if (traj) traj->push(Scalar(0), y);

  const int per_cycle = traj ? std::max(1, samples_per_cycle) : 1;
  const long segments = long(clock.cycles) * per_cycle;
  const long fixed_steps =
      std::max<long>(1, (cfg.steps_per_cycle + per_cycle - 1) / per_cycle);
  for (long s = 0; s < segments; ++s) {
    const Scalar t0 = tau_f * (Scalar(s) / Scalar(segments));
    const Scalar t1 =
        (s + 1 == segments) ? tau_f : tau_f * (Scalar(s + 1) / Scalar(segments));
    y = detail::gaussian_segment(rhs, y, t0, t1, period, cfg, fixed_steps,
                                 inspect);
    if (traj) traj->push(t1, y);
  }
  return unpack(y, tau_f);
}

template <typename Scalar>
GaussianModeState<Scalar> evolve(const ModeParams<Scalar>& mode,
                                 const DriveSpec<Scalar>& drive,
                                 const IntegratorConfig<Scalar>& cfg,
                                 Trajectory<Scalar>* traj = nullptr,
                                 int samples_per_cycle = 8) {
  drive.validate();
  return evolve(mode, drive.clock(), cfg, traj, samples_per_cycle);
}

/// Both normal modes of the coupled pair at the end of the drive.
template <typename Scalar>
std::pair<GaussianModeState<Scalar>, GaussianModeState<Scalar>> evolve_pair(
    const DriveSpec<Scalar>& drive, const IntegratorConfig<Scalar>& cfg) {
  return {evolve(plus_mode(drive), drive, cfg),
          evolve(minus_mode(drive), drive, cfg)};
}

/// Independent route to the final width parameter: solves the linear
/// oscillator equation u'' + omega_sq(tau) u = 0 with u(0) = 1,
/// u'(0) = i omega0 and returns b = -(i/2) u'/u at tau_final. Equivalent
/// to the Riccati flow of the width but free of its near-pole passages.
template <typename Scalar>
std::complex<Scalar> riccati_oracle(const ModeParams<Scalar>& mode,
                                    const DriveClock<Scalar>& clock,
                                    const IntegratorConfig<Scalar>& cfg) {
  cfg.validate();
  using Vec = Eigen::Matrix<Scalar, 4, 1>;  // (Re u, Im u, Re u', Im u')
  const Scalar tau_f = clock.tau_final();
  auto rhs = [&](Scalar t, const Vec& y) {
    const Scalar w2 = mode_frequency_sq(mode, clock, t);
    Vec dy;
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = -w2 * y[0];
    dy[3] = -w2 * y[1];
    return dy;
  };
  auto inspect = [](Scalar t, const Vec& y) {
    if (!y.allFinite())
      throw IntegrationFailure("non-finite linear solution", double(t));
    if (y.template lpNorm<Eigen::Infinity>() > Scalar(1e150))
      throw IntegrationFailure("linear solution overflow", double(t));
  };

  Vec y;
  y << Scalar(1), Scalar(0), Scalar(0), mode.omega0;
  if (cfg.method == IntegratorMethod::FixedRk4) {
    y = rk4_fixed(rhs, y, Scalar(0), tau_f,
                  long(cfg.steps_per_cycle) * clock.cycles, inspect);
  } else {
    y = rk45_adaptive(rhs, y, Scalar(0), tau_f, cfg.rel_tol, cfg.abs_tol,
                      clock.period() / Scalar(256), inspect);
  }

  const std::complex<Scalar> u(y[0], y[1]), du(y[2], y[3]);
  if (std::abs(u) < Scalar(1e-12))
    throw DegenerateSolution(
        "linear solution vanishes at tau_final; retry with a perturbed "
        "step count");
  return std::complex<Scalar>(0, Scalar(-0.5)) * du / u;
}

template <typename Scalar>
std::complex<Scalar> riccati_oracle(const ModeParams<Scalar>& mode,
                                    const DriveSpec<Scalar>& drive,
                                    const IntegratorConfig<Scalar>& cfg) {
  drive.validate();
  return riccati_oracle(mode, drive.clock(), cfg);
}

}  // namespace qpr
