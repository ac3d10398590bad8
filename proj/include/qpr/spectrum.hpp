#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

#include "qpr/overlap.hpp"

namespace qpr {

/// Joint excitation probabilities p(n_plus, n_minus) on a truncated grid.
/// Rows index n_plus. Entries at odd indices are exactly zero.
template <typename Scalar = double>
struct SpectrumGrid {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> probs;
  int n_max = 0;
  Scalar captured_mass{};  // product of the per-mode captured masses
};

using SpectrumGridd = SpectrumGrid<double>;

template <typename Scalar>
SpectrumGrid<Scalar> spectrum_grid(const OverlapSet<Scalar>& plus,
                                   const OverlapSet<Scalar>& minus) {
  if (plus.n_max != minus.n_max)
    throw std::invalid_argument("overlap sets must share n_max");
  SpectrumGrid<Scalar> g;
  g.n_max = plus.n_max;
  const auto pp = plus.c.cwiseAbs2().eval();
  const auto pm = minus.c.cwiseAbs2().eval();
  g.probs = pp * pm.transpose();
  g.captured_mass = plus.mass * minus.mass;
  return g;
}

/// Per-mode level distributions p(n_plus), p(n_minus): sums of the grid
/// over the other index. Each sums to captured_mass.
template <typename Scalar>
std::pair<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>,
          Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>
marginals(const SpectrumGrid<Scalar>& grid) {
  return {grid.probs.rowwise().sum(), grid.probs.colwise().sum().transpose()};
}

/// One level shell: all allowed states with n_plus + n_minus = N.
template <typename Scalar = double>
struct Shell {
  int level;       // N, even
  Scalar prob;     // P_N, total probability in the shell (within the grid)
  int degeneracy;  // g_N = N/2 + 1, states allowed by the selection rule
  Scalar per_state() const { return prob / Scalar(degeneracy); }
};

template <typename Scalar = double>
struct ShellDistribution {
  std::vector<Shell<Scalar>> shells;  // even N = 0, 2, ..., 2 n_max
};

using ShellDistributiond = ShellDistribution<double>;

/// Sums anti-diagonals of the grid over even (n_plus, n_minus) pairs.
/// Shells with N > n_max are clipped by the truncation; captured_mass
/// makes the missing weight observable.
template <typename Scalar>
ShellDistribution<Scalar> shell_distribution(const SpectrumGrid<Scalar>& grid) {
  ShellDistribution<Scalar> d;
  d.shells.reserve(grid.n_max + 1);
  for (int N = 0; N <= 2 * grid.n_max; N += 2) {
    Shell<Scalar> s;
    s.level = N;
    s.degeneracy = N / 2 + 1;
    Scalar p = 0;
    for (int np = 0; np <= N; np += 2) {
      const int nm = N - np;
      if (np <= grid.n_max && nm <= grid.n_max) p += grid.probs(np, nm);
    }
    s.prob = p;
    d.shells.push_back(s);
  }
  return d;
}

}  // namespace qpr
