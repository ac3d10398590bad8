#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "qpr/errors.hpp"

namespace qpr {

enum class IntegratorMethod { FixedRk4, AdaptiveRk45 };

/// Step-size policy for the mode-parameter ODEs. The fixed method takes
/// steps_per_cycle equal steps per drive cycle; the adaptive method is a
/// Dormand-Prince 5(4) pair with the given tolerances.
template <typename Scalar = double>
struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::FixedRk4;
  int steps_per_cycle = 4096;
  Scalar rel_tol = Scalar(1e-9);
  Scalar abs_tol = Scalar(1e-12);

  void validate() const {
    if (method == IntegratorMethod::FixedRk4 && steps_per_cycle < 256)
      throw ConfigError("steps_per_cycle must be >= 256");
    if (method == IntegratorMethod::AdaptiveRk45) {
      if (!(rel_tol > Scalar(0) && rel_tol <= Scalar(1e-4)))
        throw ConfigError("rel_tol must lie in (0, 1e-4]");
      if (!(abs_tol > Scalar(0) && abs_tol <= Scalar(1e-4)))
        throw ConfigError("abs_tol must lie in (0, 1e-4]");
    }
  }

  static IntegratorConfig fixed(int steps) {
    return {IntegratorMethod::FixedRk4, steps, Scalar(1e-9), Scalar(1e-12)};
  }
  static IntegratorConfig adaptive(Scalar rtol = Scalar(1e-9),
                                   Scalar atol = Scalar(1e-12)) {
    return {IntegratorMethod::AdaptiveRk45, 4096, rtol, atol};
  }
};

// The `inspect` callback below runs after every accepted step as
// inspect(t, y); it may throw to abort the integration (blowup guards).

/// Classic fourth-order Runge-Kutta with a fixed number of equal steps.
template <typename Rhs, typename Vec, typename Scalar, typename Inspect>
Vec rk4_fixed(Rhs&& f, Vec y, Scalar t0, Scalar t1, long steps,
              Inspect&& inspect) {
  const Scalar h = (t1 - t0) / Scalar(steps);
  Scalar t = t0;
  for (long i = 0; i < steps; ++i) {
    // reconstruct t from the index so roundoff does not accumulate
    t = t0 + (t1 - t0) * (Scalar(i) / Scalar(steps));
    const Scalar tn = (i + 1 == steps)
                          ? t1
                          : t0 + (t1 - t0) * (Scalar(i + 1) / Scalar(steps));
    const Vec k1 = f(t, y);
    const Vec k2 = f(t + h / 2, Vec(y + (h / 2) * k1));
    const Vec k3 = f(t + h / 2, Vec(y + (h / 2) * k2));
    const Vec k4 = f(tn, Vec(y + h * k3));
    y += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    inspect(tn, y);
  }
  return y;
}

/// Dormand-Prince 5(4) adaptive step with FSAL. Controls the local error
/// to abs_tol + rel_tol * |y| componentwise.
template <typename Rhs, typename Vec, typename Scalar, typename Inspect>
Vec rk45_adaptive(Rhs&& f, Vec y, Scalar t0, Scalar t1, Scalar rel_tol,
                  Scalar abs_tol, Scalar h_init, Inspect&& inspect) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b* (error weights of the embedded fourth-order solution)
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                          e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  const Scalar span = t1 - t0;
  if (!(span > Scalar(0))) return y;
  const Scalar h_min = span * Scalar(1e-15);
  Scalar t = t0;
  Scalar h = std::min(h_init, span);
  Vec k1 = f(t, y);
  while (t < t1) {
    if (h < h_min)
      throw IntegrationFailure("step size underflow in rk45", double(t));
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }
    const Vec k2 = f(t + c2 * h, Vec(y + h * (Scalar(a21) * k1)));
    const Vec k3 =
        f(t + c3 * h, Vec(y + h * (Scalar(a31) * k1 + Scalar(a32) * k2)));
    const Vec k4 = f(t + c4 * h, Vec(y + h * (Scalar(a41) * k1 +
                                              Scalar(a42) * k2 +
                                              Scalar(a43) * k3)));
    const Vec k5 =
        f(t + c5 * h,
          Vec(y + h * (Scalar(a51) * k1 + Scalar(a52) * k2 + Scalar(a53) * k3 +
                       Scalar(a54) * k4)));
    const Vec k6 =
        f(t + h,
          Vec(y + h * (Scalar(a61) * k1 + Scalar(a62) * k2 + Scalar(a63) * k3 +
                       Scalar(a64) * k4 + Scalar(a65) * k5)));
    const Vec y5 =
        y + h * (Scalar(b1) * k1 + Scalar(b3) * k3 + Scalar(b4) * k4 +
                 Scalar(b5) * k5 + Scalar(b6) * k6);
    const Vec k7 = f(t + h, y5);
    const Vec err =
        h * (Scalar(e1) * k1 + Scalar(e3) * k3 + Scalar(e4) * k4 +
             Scalar(e5) * k5 + Scalar(e6) * k6 + Scalar(e7) * k7);

    Scalar err_norm = Scalar(0);
    bool finite = y5.allFinite();
    if (finite) {
      for (int i = 0; i < y.size(); ++i) {
        const Scalar sc =
            abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
        const Scalar q = err[i] / sc;
        err_norm += q * q;
      }
      err_norm = std::sqrt(err_norm / Scalar(y.size()));
    }

    if (finite && err_norm <= Scalar(1)) {
      t = last ? t1 : t + h;
      y = y5;
      k1 = k7;  // FSAL
      inspect(t, y);
      const Scalar grow =
          err_norm == Scalar(0)
              ? Scalar(5)
              : std::min(Scalar(5), Scalar(0.9) * std::pow(err_norm,
                                                           Scalar(-0.2)));
      h = std::min(h * std::max(grow, Scalar(0.2)), span);
    } else {
      const Scalar shrink =
          finite ? std::max(Scalar(0.1),
                            Scalar(0.9) * std::pow(err_norm, Scalar(-0.2)))
                 : Scalar(0.1);
      h *= std::min(shrink, Scalar(0.9));
    }
  }
  return y;
}

}  // namespace qpr
