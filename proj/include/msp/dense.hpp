#pragma once

// Small dense linear-algebra kit shared by the verification modules:
// generalized symmetric eigenvalue bounds, numerical null spaces and
// principal angles, and generators for random (semi-)definite test data.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "msp/errors.hpp"

namespace msp {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Two-sided spectral bounds lo <= hi.
template <typename Scalar = double>
struct SpectralBounds {
  Scalar lo{};
  Scalar hi{};
};

template <typename Derived>
typename Derived::Scalar symmetry_defect(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Scalar scale = std::max<Scalar>(m.cwiseAbs().maxCoeff(), Scalar(1e-300));
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

/// Lower Cholesky factor of an SPD matrix; DomainError if it is not SPD.
template <typename Scalar>
Eigen::LLT<DenseMatrix<Scalar>> spd_factor(const DenseMatrix<Scalar>& n, const std::string& what) {
  Eigen::LLT<DenseMatrix<Scalar>> llt(n);
  if (llt.info() != Eigen::Success) throw DomainError(what + ": matrix is not positive definite");
  const auto d = llt.matrixLLT().diagonal().cwiseAbs();
  if (d.size() > 0 && d.minCoeff() <= std::numeric_limits<Scalar>::epsilon() * d.maxCoeff() * Scalar(1e-2))
    throw DomainError(what + ": matrix is numerically singular");
  return llt;
}

/// Congruence L^{-1} M L^{-T} where N = L L^T.
template <typename Scalar>
DenseMatrix<Scalar> congruence(const Eigen::LLT<DenseMatrix<Scalar>>& n_factor, const DenseMatrix<Scalar>& m) {
  const auto l = n_factor.matrixL();
  DenseMatrix<Scalar> tmp = l.solve(m);
  DenseMatrix<Scalar> out = l.solve(tmp.transpose());
  return Scalar(0.5) * (out + out.transpose());
}

/// Eigenvalues (ascending) of the pencil (M, N), N SPD.
template <typename Scalar>
DenseVector<Scalar> generalized_eigenvalues(const DenseMatrix<Scalar>& m, const DenseMatrix<Scalar>& n) {
  if (m.rows() != m.cols() || n.rows() != n.cols() || m.rows() != n.rows())
    throw StructuralError("generalized_eigenvalues: dimension mismatch");
  const auto llt = spd_factor<Scalar>(n, "generalized_eigenvalues");
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(congruence(llt, m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Best constants lo, hi with lo*N <= M <= hi*N.
template <typename Scalar>
SpectralBounds<Scalar> generalized_bounds(const DenseMatrix<Scalar>& m, const DenseMatrix<Scalar>& n) {
  const auto ev = generalized_eigenvalues<Scalar>(m, n);
  return {ev.minCoeff(), ev.maxCoeff()};
}

/// Smallest eigenvalue, relative to the operator norm; >= -tol means "semi-definite".
template <typename Scalar>
Scalar relative_min_eigenvalue(const DenseMatrix<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(Scalar(0.5) * (m + m.transpose()),
                                                        Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const Scalar norm = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
  if (norm == Scalar(0)) return Scalar(0);
  return ev.minCoeff() / norm;
}

template <typename Scalar>
struct NullSpace {
  DenseMatrix<Scalar> basis;  // orthonormal columns
  bool indeterminate = false;  // a singular value sits within a factor 10 of the threshold
};

/// Orthonormal basis of ker(M) with singular-value threshold rel_tol * sigma_max.
template <typename Scalar>
NullSpace<Scalar> null_space(const DenseMatrix<Scalar>& m, Scalar rel_tol) {
  const Eigen::Index n = m.cols();
  NullSpace<Scalar> out;
  if (n == 0) {
    out.basis.resize(0, 0);
    return out;
  }
  // Pad to a square matrix so that the full right singular basis is available.
  DenseMatrix<Scalar> work = DenseMatrix<Scalar>::Zero(std::max(m.rows(), n), n);
  work.topRows(m.rows()) = m;
  Eigen::JacobiSVD<DenseMatrix<Scalar>> svd(work, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const Scalar smax = s.size() > 0 ? s(0) : Scalar(0);
  if (smax == Scalar(0)) {
    out.basis = DenseMatrix<Scalar>::Identity(n, n);
    return out;
  }
  const Scalar threshold = rel_tol * smax;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++rank;
    if (s(i) > threshold / Scalar(10) && s(i) < threshold * Scalar(10)) out.indeterminate = true;
  }
  out.basis = svd.matrixV().rightCols(n - rank);
  return out;
}

/// Largest principal angle between span(U) and span(V) (orthonormal columns).
/// Returns pi/2 when the dimensions differ and exactly 0 when both are trivial.
template <typename Scalar>
Scalar max_principal_angle(const DenseMatrix<Scalar>& u, const DenseMatrix<Scalar>& v) {
  if (u.cols() != v.cols()) return Scalar(M_PI / 2);
  if (u.cols() == 0) return Scalar(0);
  // sin of the largest angle is the spectral norm of (I - U U^T) V.
  const DenseMatrix<Scalar> residual = v - u * (u.transpose() * v);
  Eigen::JacobiSVD<DenseMatrix<Scalar>> svd(residual);
  const Scalar s = std::min<Scalar>(svd.singularValues()(0), Scalar(1));
  return std::asin(s);
}

template <typename Scalar, typename Rng>
DenseMatrix<Scalar> gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix<Scalar> g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = Scalar(normal(rng));
  return g;
}

/// G^T G with G Gaussian; `zero_columns` columns of G are zeroed to force a kernel.
template <typename Scalar, typename Rng>
DenseMatrix<Scalar> random_semidefinite(Rng& rng, Eigen::Index n, Eigen::Index zero_columns = 0) {
  DenseMatrix<Scalar> g = gaussian_matrix<Scalar>(rng, n, n);
  for (Eigen::Index j = 0; j < std::min(zero_columns, n); ++j) g.col(j).setZero();
  DenseMatrix<Scalar> a = g.transpose() * g;
  return Scalar(0.5) * (a + a.transpose());
}

template <typename Scalar, typename Rng>
DenseMatrix<Scalar> random_spd(Rng& rng, Eigen::Index n) {
  DenseMatrix<Scalar> a = random_semidefinite<Scalar>(rng, n);
  a.diagonal().array() += Scalar(0.1) * Scalar(n);
  return a;
}

}  // namespace msp
