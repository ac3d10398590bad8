#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <vector>

#include "qpr/errors.hpp"
#include "qpr/spectrum.hpp"

namespace qpr {

enum class DecayModel { PowerLaw, Exponential };
enum class Regime { ParametricResonance, OffResonant };

inline const char* to_string(Regime r) {
  return r == Regime::ParametricResonance ? "PR" : "off-resonant";
}

/// Least-squares decay fit of a level distribution:
///   power law    log v = const - exponent * log N
///   exponential  log v = const - exponent * N
template <typename Scalar = double>
struct DecayFit {
  DecayModel model{};
  Scalar exponent{};
  Scalar r_squared{};
  Scalar intercept{};
  int n_lo = 0, n_hi = 0;  // level range actually used
  int points = 0;
};

using DecayFitd = DecayFit<double>;

/// Level range for the fits. Levels below n_lo, above n_hi, or with
/// values at or below floor are excluded. n_lo >= 2 keeps log N finite.
template <typename Scalar = double>
struct FitRange {
  int n_lo = 2;
  int n_hi = 100;
  Scalar floor = Scalar(1e-12);
};

namespace detail {

template <typename Scalar>
struct LinFit {
  Scalar slope, intercept, r_squared;
};

// Unweighted least squares with the flat-data convention r^2 = 1 when
// the residuals vanish along with the variance.
template <typename Scalar>
LinFit<Scalar> linear_fit(const std::vector<Scalar>& x,
                          const std::vector<Scalar>& y) {
  const int n = int(x.size());
  Scalar sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const Scalar mx = sx / n, my = sy / n;
  Scalar sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinFit<Scalar> f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  Scalar ssr = 0, sst = 0;
  for (int i = 0; i < n; ++i) {
    const Scalar e = y[i] - f.slope * x[i] - f.intercept;
    ssr += e * e;
    sst += (y[i] - my) * (y[i] - my);
  }
  f.r_squared = sst > Scalar(0) ? std::max(Scalar(0), 1 - ssr / sst)
                                : Scalar(ssr == Scalar(0) ? 1 : 0);
  return f;
}

template <typename Scalar>
DecayFit<Scalar> decay_fit(DecayModel model, const std::vector<int>& levels,
                           const std::vector<Scalar>& values,
                           const FitRange<Scalar>& range) {
  std::vector<Scalar> xs, ys;
  int lo = 0, hi = 0;
  for (size_t i = 0; i < levels.size(); ++i) {
    const int N = levels[i];
    if (N < std::max(range.n_lo, 2) || N > range.n_hi) continue;
    if (!(values[i] > range.floor)) continue;
    xs.push_back(model == DecayModel::PowerLaw ? std::log(Scalar(N))
                                               : Scalar(N));
    ys.push_back(std::log(values[i]));
    if (xs.size() == 1) lo = N;
    hi = N;
  }
  if (xs.size() < 4)
    throw InsufficientData("decay fit needs at least 4 levels above the "
                           "floor, got " +
                           std::to_string(xs.size()));
  const auto lf = linear_fit(xs, ys);
  DecayFit<Scalar> f;
  f.model = model;
  f.exponent = -lf.slope;
  f.r_squared = lf.r_squared;
  f.intercept = lf.intercept;
  f.n_lo = lo;
  f.n_hi = hi;
  f.points = int(xs.size());
  return f;
}

}  // namespace detail

template <typename Scalar>
DecayFit<Scalar> fit_power_law(const std::vector<int>& levels,
                               const std::vector<Scalar>& values,
                               const FitRange<Scalar>& range = {}) {
  return detail::decay_fit(DecayModel::PowerLaw, levels, values, range);
}

template <typename Scalar>
DecayFit<Scalar> fit_exponential(const std::vector<int>& levels,
                                 const std::vector<Scalar>& values,
                                 const FitRange<Scalar>& range = {}) {
  return detail::decay_fit(DecayModel::Exponential, levels, values, range);
}

template <typename Scalar>
DecayFit<Scalar> fit_power_law(const ShellDistribution<Scalar>& dist,
                               const FitRange<Scalar>& range = {}) {
  std::vector<int> levels;
  std::vector<Scalar> values;
  for (const auto& s : dist.shells) {
    levels.push_back(s.level);
    values.push_back(s.per_state());
  }
  return fit_power_law(levels, values, range);
}

template <typename Scalar>
DecayFit<Scalar> fit_exponential(const ShellDistribution<Scalar>& dist,
                                 const FitRange<Scalar>& range = {}) {
  std::vector<int> levels;
  std::vector<Scalar> values;
  for (const auto& s : dist.shells) {
    levels.push_back(s.level);
    values.push_back(s.per_state());
  }
  return fit_exponential(levels, values, range);
}

/// Outcome of the decay-shape diagnostic. A power-law-shaped distribution
/// signals resonant pumping; an exponential one an off-resonant response.
/// When there are too few populated levels to fit (an undriven or barely
/// driven state), the regime is off-resonant with degenerate_data set.
template <typename Scalar = double>
struct RegimeReport {
  Regime regime{};
  bool degenerate_data = false;
  std::optional<DecayFit<Scalar>> power;
  std::optional<DecayFit<Scalar>> exponential;
};

using RegimeReportd = RegimeReport<double>;

template <typename Scalar>
RegimeReport<Scalar> classify_levels(const std::vector<int>& levels,
                                     const std::vector<Scalar>& values,
                                     const FitRange<Scalar>& range = {}) {
  RegimeReport<Scalar> rep;
  try {
    rep.power = fit_power_law(levels, values, range);
    rep.exponential = fit_exponential(levels, values, range);
  } catch (const InsufficientData&) {
    rep.regime = Regime::OffResonant;
    rep.degenerate_data = true;
    return rep;
  }
  rep.regime = rep.power->r_squared > rep.exponential->r_squared
                   ? Regime::ParametricResonance
                   : Regime::OffResonant;
  return rep;
}

template <typename Scalar>
RegimeReport<Scalar> classify_regime(const ShellDistribution<Scalar>& dist,
                                     const FitRange<Scalar>& range = {}) {
  std::vector<int> levels;
  std::vector<Scalar> values;
  for (const auto& s : dist.shells) {
    levels.push_back(s.level);
    values.push_back(s.per_state());
  }
  return classify_levels(levels, values, range);
}

/// Classifies a single mode's marginal distribution p(n), n even.
template <typename Scalar, typename Derived>
RegimeReport<Scalar> classify_marginal(const Eigen::MatrixBase<Derived>& p,
                                       const FitRange<Scalar>& range = {}) {
  std::vector<int> levels;
  std::vector<Scalar> values;
  for (int n = 0; n < p.size(); n += 2) {
    levels.push_back(n);
    values.push_back(p[n]);
  }
  return classify_levels(levels, values, range);
}

}  // namespace qpr
