#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qpr/errors.hpp"
#include "qpr/evolve.hpp"

namespace qpr {

/// Static (k0) and modulation (k1) coupling matrices of N oscillators in
/// dimensionless form: k0 has unit diagonal, k1 holds the modulated
/// couplings on its off-diagonal.
template <typename Scalar = double>
struct CouplingMatrices {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> k0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> k1;

  Eigen::Index size() const { return k0.rows(); }

  void validate(Scalar symmetry_tol = Scalar(1e-12)) const {
    if (k0.rows() != k0.cols() || k1.rows() != k1.cols() ||
        k0.rows() != k1.rows() || k0.rows() < 1)
      throw ConfigError("coupling matrices must be square and equally sized");
    const Scalar scale = std::max(
        {Scalar(1), k0.template lpNorm<Eigen::Infinity>(),
         k1.template lpNorm<Eigen::Infinity>()});
    if ((k0 - k0.transpose()).template lpNorm<Eigen::Infinity>() >
        symmetry_tol * scale)
      throw ConfigError("k0 is not symmetric");
    if ((k1 - k1.transpose()).template lpNorm<Eigen::Infinity>() >
        symmetry_tol * scale)
      throw ConfigError("k1 is not symmetric");
  }
};

using CouplingMatricesd = CouplingMatrices<double>;

/// Normal-mode reduction: k0 = eigvecs diag(lambda0) eigvecs^T with
/// lambda1 the diagonal of the rotated k1 and residual its largest
/// remaining off-diagonal entry.
template <typename Scalar = double>
struct ModeReduction {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> eigvecs;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lambda0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lambda1;
  Scalar residual{};

  std::vector<ModeParams<Scalar>> modes() const {
    std::vector<ModeParams<Scalar>> out;
    out.reserve(lambda0.size());
    for (Eigen::Index i = 0; i < lambda0.size(); ++i)
      out.push_back(ModeParams<Scalar>::from_lambdas(lambda0[i], lambda1[i]));
    return out;
  }
};

using ModeReductiond = ModeReduction<double>;

namespace detail {

/// Cyclic Jacobi sweeps for a symmetric matrix; deterministic rotation
/// order, converged when the largest off-diagonal drops below
/// 1e-14 * max|a_ij|. Eigenpairs are returned unsorted. An optional
/// companion matrix receives the same rotations; its (p,p), (q,q), (p,q)
/// entries are updated through half-angle rationals of t (2cs = 2t/(1+t^2)
/// and c^2 - s^2 = (1-t^2)/(1+t^2)), which keeps the rotation of a hollow
/// companion exact for the equal-diagonal quarter-turn case.
template <typename Scalar>
void jacobi_sweeps(
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v,
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* companion =
        nullptr) {
  const Eigen::Index n = a.rows();
  v.setIdentity(n, n);
  if (n < 2) return;
  const Scalar scale =
      std::max(a.template lpNorm<Eigen::Infinity>(), Scalar(1e-30));
  const Scalar stop = Scalar(1e-14) * scale;
  for (int sweep = 0; sweep < 64; ++sweep) {
    Scalar off = 0;
    for (Eigen::Index p = 0; p + 1 < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q)
        off = std::max(off, std::abs(a(p, q)));
    if (off <= stop) return;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= stop) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const Scalar t =
            (theta >= 0 ? Scalar(1) : Scalar(-1)) /
            (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        const Scalar apq = a(p, q);
        const Scalar app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = Scalar(0);
        for (Eigen::Index i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const Scalar aip = a(i, p), aiq = a(i, q);
          a(i, p) = a(p, i) = c * aip - s * aiq;
          a(i, q) = a(q, i) = s * aip + c * aiq;
        }
        if (companion) {
          auto& b = *companion;
          const Scalar denom = Scalar(1) + t * t;
          const Scalar bpp = b(p, p), bqq = b(q, q), bpq = b(p, q);
          b(p, p) = (bpp - 2 * t * bpq + t * t * bqq) / denom;
          b(q, q) = (t * t * bpp + 2 * t * bpq + bqq) / denom;
          b(p, q) = b(q, p) =
              (t * (bpp - bqq) + (Scalar(1) - t * t) * bpq) / denom;
          for (Eigen::Index i = 0; i < n; ++i) {
            if (i == p || i == q) continue;
            const Scalar bip = b(i, p), biq = b(i, q);
            b(i, p) = b(p, i) = c * bip - s * biq;
            b(i, q) = b(q, i) = s * bip + c * biq;
          }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const Scalar vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  throw Error("jacobi eigensolver failed to converge");
}

}  // namespace detail

/// Eigenvalues (ascending) and eigenvectors of a symmetric matrix by
/// cyclic Jacobi rotations.
template <typename Scalar>
std::pair<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>,
          Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>
jacobi_eigen_symmetric(
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> v;
  detail::jacobi_sweeps(a, v);
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) {
                     return a(i, i) < a(j, j);
                   });
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vals(n);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vecs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    vals[i] = a(order[i], order[i]);
    vecs.col(i) = v.col(order[i]);
  }
  return {vals, vecs};
}

/// Diagonalizes k0 and rotates k1 into its eigenbasis. Within degenerate
/// eigenspaces of k0 the basis is fixed by diagonalizing the restriction
/// of k1, so a pair of identical oscillators lands on the symmetric /
/// antisymmetric modes. Fails if k1 is not diagonal in the resulting
/// basis: the system then does not reduce to independent modes.
template <typename Scalar>
ModeReduction<Scalar> reduce(const CouplingMatrices<Scalar>& cm,
                             Scalar tol = Scalar(1e-10)) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  cm.validate();
  const Eigen::Index n = cm.size();

  Mat a = cm.k0, k1r = cm.k1, v;
  detail::jacobi_sweeps(a, v, &k1r);

  // ascending lambda0, applied consistently to the rotated k1
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) {
                     return a(i, i) < a(j, j);
                   });
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vals(n);
  Mat vecs(n, n), k1s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    vals[i] = a(order[size_t(i)], order[size_t(i)]);
    vecs.col(i) = v.col(order[size_t(i)]);
    for (Eigen::Index j = 0; j < n; ++j)
      k1s(i, j) = k1r(order[size_t(i)], order[size_t(j)]);
  }

  for (Eigen::Index i = 0; i < n; ++i)
    if (!(vals[i] > Scalar(0)))
      throw NotPositiveDefinite("static coupling matrix has eigenvalue " +
                                std::to_string(double(vals[i])));

  // fix the basis inside degenerate groups of lambda0 by diagonalizing
  // the restriction of k1
  const Scalar deg_tol =
      Scalar(1e-10) * std::max(Scalar(1), vals.cwiseAbs().maxCoeff());
  Eigen::Index lo = 0;
  while (lo < n) {
    Eigen::Index hi = lo + 1;
    while (hi < n && vals[hi] - vals[lo] <= deg_tol) ++hi;
    const Eigen::Index len = hi - lo;
    if (len > 1) {
      Mat block = k1s.block(lo, lo, len, len), w;
      detail::jacobi_sweeps(block, w);
      std::vector<Eigen::Index> border(static_cast<size_t>(len));
      std::iota(border.begin(), border.end(), 0);
      std::stable_sort(border.begin(), border.end(),
                       [&](Eigen::Index i, Eigen::Index j) {
                         return block(i, i) < block(j, j);
                       });
      Mat ws(len, len);
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bvals(len);
      for (Eigen::Index i = 0; i < len; ++i) {
        ws.col(i) = w.col(border[size_t(i)]);
        bvals[i] = block(border[size_t(i)], border[size_t(i)]);
      }
      vecs.middleCols(lo, len) = (vecs.middleCols(lo, len) * ws).eval();
      // rotate the off-group strips; the group block becomes diag(bvals)
      if (lo > 0)
        k1s.block(0, lo, lo, len) = (k1s.block(0, lo, lo, len) * ws).eval();
      if (hi < n)
        k1s.block(hi, lo, n - hi, len) =
            (k1s.block(hi, lo, n - hi, len) * ws).eval();
      k1s.block(lo, lo, len, len).setZero();
      k1s.block(lo, lo, len, len).diagonal() = bvals;
      if (lo > 0)
        k1s.block(lo, 0, len, lo) = k1s.block(0, lo, lo, len).transpose();
      if (hi < n)
        k1s.block(lo, hi, len, n - hi) =
            k1s.block(hi, lo, n - hi, len).transpose();
    }
    lo = hi;
  }

  ModeReduction<Scalar> red;
  red.eigvecs = vecs;
  red.lambda0 = vals;
  red.lambda1 = k1s.diagonal();
  Scalar resid = 0;
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      resid = std::max(resid, std::abs(k1s(i, j)));
  red.residual = resid;
  if (resid >= tol)
    throw NotSimultaneouslyDiagonalizable(
        "modulation matrix is not diagonal in the static eigenbasis "
        "(residual " +
        std::to_string(double(resid)) + ", tol " + std::to_string(double(tol)) +
        "); the modes re-couple and the reduction does not apply");
  return red;
}

/// Evolves every reduced mode independently through the common drive
/// window. Joint probabilities are products of the per-mode overlaps.
template <typename Scalar>
std::vector<GaussianModeState<Scalar>> evolve_all(
    const ModeReduction<Scalar>& red, const DriveClock<Scalar>& clock,
    const IntegratorConfig<Scalar>& cfg) {
  std::vector<GaussianModeState<Scalar>> out;
  out.reserve(red.lambda0.size());
  for (const auto& mode : red.modes()) out.push_back(evolve(mode, clock, cfg));
  return out;
}

}  // namespace qpr
