#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "qpr/drive.hpp"
#include "qpr/gaussian.hpp"
#include "qpr/spectrum.hpp"

namespace qpr {

/// Expectation of the static Hamiltonian, in units of the reference
/// quantum. Bounded below by the zero-point energy.
template <typename Scalar = double>
struct EnergyReport {
  Scalar total{};
  Scalar plus{};
  Scalar minus{};
  Scalar zero_point{};
};

using EnergyReportd = EnergyReport<double>;

/// Per-mode energy (omega0^2 + 4|b|^2) / (8 Re b).
template <typename Scalar>
Scalar mode_energy(const GaussianModeState<Scalar>& state, Scalar omega0_sq) {
  return (omega0_sq + Scalar(4) * std::norm(state.b)) /
         (Scalar(8) * state.b.real());
}

template <typename Scalar>
EnergyReport<Scalar> energy(const GaussianModeState<Scalar>& plus_state,
                            const GaussianModeState<Scalar>& minus_state,
                            const ModeParams<Scalar>& plus,
                            const ModeParams<Scalar>& minus) {
  EnergyReport<Scalar> e;
  e.plus = mode_energy(plus_state, plus.omega0_sq);
  e.minus = mode_energy(minus_state, minus.omega0_sq);
  e.total = e.plus + e.minus;
  e.zero_point = (plus.omega0 + minus.omega0) / Scalar(2);
  return e;
}

/// Probability of remaining in the joint ground state.
template <typename Scalar>
Scalar ground_survival(const SpectrumGrid<Scalar>& grid) {
  return grid.probs(0, 0);
}

/// First-order resonance window of one mode: the drive frequency
/// 2 + detuning matches twice the mode frequency at the center, and the
/// classical instability condition gives the half-width depth*omega0/2.
template <typename Scalar = double>
struct Window {
  Scalar center{};
  Scalar half_width{};
  Scalar lo() const { return center - half_width; }
  Scalar hi() const { return center + half_width; }
};

template <typename Scalar>
Window<Scalar> predict_window(const ModeParams<Scalar>& mode) {
  return {Scalar(2) * (mode.omega0 - Scalar(1)),
          mode.depth * mode.omega0 / Scalar(2)};
}

/// Both predicted windows of the coupled pair and whether they overlap
/// (selective excitation requires disjoint windows, beta1 < 2 beta0).
template <typename Scalar = double>
struct WindowPrediction {
  Window<Scalar> plus;
  Window<Scalar> minus;
  bool overlap{};
};

using WindowPredictiond = WindowPrediction<double>;

template <typename Scalar>
WindowPrediction<Scalar> predict_windows(const DriveSpec<Scalar>& drive) {
  WindowPrediction<Scalar> w;
  w.plus = predict_window(plus_mode(drive));
  w.minus = predict_window(minus_mode(drive));
  w.overlap = w.plus.lo() <= w.minus.hi() && w.minus.lo() <= w.plus.hi();
  return w;
}

/// A resonance window located empirically from a ground-survival curve.
template <typename Scalar = double>
struct MeasuredWindow {
  Scalar lo{};          // threshold crossings, bisection refined
  Scalar hi{};
  Scalar center() const { return (lo + hi) / Scalar(2); }
  Scalar eps_min{};     // detuning of the smallest p00 sample
  Scalar p00_min{};
};

using MeasuredWindowd = MeasuredWindow<double>;

/// Scans p00 on a uniform detuning grid, finds the regions below the
/// threshold and refines their edges by bisection. p00_fn must be a pure
/// function of the detuning.
template <typename Scalar>
std::vector<MeasuredWindow<Scalar>> measure_windows(
    const std::function<Scalar(Scalar)>& p00_fn, Scalar eps_lo, Scalar eps_hi,
    int grid_points = 400, Scalar threshold = Scalar(0.5),
    int refine_iters = 20) {
  std::vector<Scalar> eps(grid_points + 1), p(grid_points + 1);
  for (int i = 0; i <= grid_points; ++i) {
    eps[i] = eps_lo + (eps_hi - eps_lo) * Scalar(i) / Scalar(grid_points);
    p[i] = p00_fn(eps[i]);
  }

  auto bisect = [&](Scalar a, Scalar b, Scalar pa) {
    // keeps the invariant: one endpoint below threshold, the other above
    for (int it = 0; it < refine_iters; ++it) {
      const Scalar m = (a + b) / Scalar(2);
      const Scalar pm = p00_fn(m);
      if ((pm < threshold) == (pa < threshold)) {
        a = m;
        pa = pm;
      } else {
        b = m;
      }
    }
    return (a + b) / Scalar(2);
  };

  std::vector<MeasuredWindow<Scalar>> out;
  bool inside = false;
  MeasuredWindow<Scalar> cur;
  for (int i = 0; i <= grid_points; ++i) {
    const bool below = p[i] < threshold;
    if (below && !inside) {
      inside = true;
      cur = MeasuredWindow<Scalar>{};
      cur.lo = i == 0 ? eps[0] : bisect(eps[i - 1], eps[i], p[i - 1]);
      cur.eps_min = eps[i];
      cur.p00_min = p[i];
    }
    if (below && p[i] < cur.p00_min) {
      cur.p00_min = p[i];
      cur.eps_min = eps[i];
    }
    if (!below && inside) {
      inside = false;
      cur.hi = bisect(eps[i - 1], eps[i], p[i - 1]);
      out.push_back(cur);
    }
  }
  if (inside) {
    cur.hi = eps.back();
    out.push_back(cur);
  }
  return out;
}

}  // namespace qpr
