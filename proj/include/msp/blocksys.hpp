#pragma once

// Dense realization of block tridiagonal multiple saddle point operators
//
//        [ A_1   B_1^T                       ]
//        [ B_1  -A_2   B_2^T                 ]
//   A =  [       B_2    A_3    ...           ]
//        [              ...    ...  B_{n-1}^T]
//        [                B_{n-1} (-1)^{n-1}A_n]
//
// together with the splitting A = D~ + B, the sign flip x -> x~, and the
// two-way translation between the well-posedness constants (c_lo, c_hi) of
// A in a block diagonal P-norm and the spectral constants (gamma_lo,
// gamma_hi) of D + B P^{-1} B against P. Small instances only.

#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "msp/dense.hpp"

namespace msp {

template <typename Scalar = double>
class BlockTridiagonalSystem {
 public:
  using Matrix = DenseMatrix<Scalar>;

  BlockTridiagonalSystem(std::vector<Matrix> diag, std::vector<Matrix> off)
      : diag_(std::move(diag)), off_(std::move(off)) {
    if (diag_.size() < 2) throw StructuralError("BlockTridiagonalSystem: need n >= 2 blocks");
    if (off_.size() + 1 != diag_.size())
      throw StructuralError("BlockTridiagonalSystem: need n-1 off-diagonal blocks");
    offsets_.push_back(0);
    for (const auto& a : diag_) {
      if (a.rows() != a.cols() || a.rows() == 0)
        throw StructuralError("BlockTridiagonalSystem: diagonal blocks must be square and non-empty");
      const Scalar scale = std::max<Scalar>(a.cwiseAbs().maxCoeff(), Scalar(0));
      if (scale > 0 && symmetry_defect(a) > Scalar(1e-12))
        throw StructuralError("BlockTridiagonalSystem: diagonal block is not symmetric");
      if (scale > 0 && relative_min_eigenvalue<Scalar>(a) < Scalar(-1e-10))
        throw DomainError("BlockTridiagonalSystem: diagonal block is not positive semi-definite");
      dims_.push_back(a.rows());
      offsets_.push_back(offsets_.back() + a.rows());
    }
    for (std::size_t i = 0; i < off_.size(); ++i) {
      if (off_[i].rows() != dims_[i + 1] || off_[i].cols() != dims_[i])
        throw StructuralError("BlockTridiagonalSystem: off-diagonal block " + std::to_string(i) +
                              " must be dims[i+1] x dims[i]");
    }
  }

  int blocks() const { return static_cast<int>(diag_.size()); }
  const std::vector<Eigen::Index>& dims() const { return dims_; }
  Eigen::Index offset(int i) const { return offsets_[i]; }
  Eigen::Index total_dim() const { return offsets_.back(); }
  const Matrix& diag(int i) const { return diag_[i]; }
  const Matrix& off(int i) const { return off_[i]; }

 private:
  std::vector<Matrix> diag_;
  std::vector<Matrix> off_;
  std::vector<Eigen::Index> dims_;
  std::vector<Eigen::Index> offsets_;
};

template <typename Scalar = double>
struct BlockVector {
  std::vector<DenseVector<Scalar>> segments;
};

/// Sign of block i (0-based) in the alternating diagonal: (-1)^i.
inline int block_sign(int i) { return (i % 2 == 0) ? 1 : -1; }

template <typename Scalar>
DenseMatrix<Scalar> assemble_full(const BlockTridiagonalSystem<Scalar>& sys) {
  DenseMatrix<Scalar> a = DenseMatrix<Scalar>::Zero(sys.total_dim(), sys.total_dim());
  for (int i = 0; i < sys.blocks(); ++i) {
    const auto oi = sys.offset(i);
    const auto ni = sys.dims()[i];
    a.block(oi, oi, ni, ni) = Scalar(block_sign(i)) * sys.diag(i);
    if (i + 1 < sys.blocks()) {
      const auto oj = sys.offset(i + 1);
      const auto nj = sys.dims()[i + 1];
      a.block(oj, oi, nj, ni) = sys.off(i);
      a.block(oi, oj, ni, nj) = sys.off(i).transpose();
    }
  }
  return a;
}

/// The unsigned block diagonal D and the off-diagonal part B; A = D~ + B.
template <typename Scalar>
std::pair<DenseMatrix<Scalar>, DenseMatrix<Scalar>> split_D_B(const BlockTridiagonalSystem<Scalar>& sys) {
  const auto n = sys.total_dim();
  DenseMatrix<Scalar> d = DenseMatrix<Scalar>::Zero(n, n);
  DenseMatrix<Scalar> b = DenseMatrix<Scalar>::Zero(n, n);
  for (int i = 0; i < sys.blocks(); ++i) {
    const auto oi = sys.offset(i);
    const auto ni = sys.dims()[i];
    d.block(oi, oi, ni, ni) = sys.diag(i);
    if (i + 1 < sys.blocks()) {
      const auto oj = sys.offset(i + 1);
      const auto nj = sys.dims()[i + 1];
      b.block(oj, oi, nj, ni) = sys.off(i);
      b.block(oi, oj, ni, nj) = sys.off(i).transpose();
    }
  }
  return {std::move(d), std::move(b)};
}

/// Segment i multiplied by (-1)^i (0-based).
template <typename Scalar>
BlockVector<Scalar> tilde(const BlockVector<Scalar>& x) {
  BlockVector<Scalar> out = x;
  for (std::size_t i = 1; i < out.segments.size(); i += 2) out.segments[i] = -out.segments[i];
  return out;
}

template <typename Scalar>
DenseVector<Scalar> flatten(const BlockVector<Scalar>& x) {
  Eigen::Index n = 0;
  for (const auto& s : x.segments) n += s.size();
  DenseVector<Scalar> out(n);
  Eigen::Index o = 0;
  for (const auto& s : x.segments) {
    out.segment(o, s.size()) = s;
    o += s.size();
  }
  return out;
}

template <typename Scalar>
BlockVector<Scalar> split(const DenseVector<Scalar>& v, const std::vector<Eigen::Index>& dims) {
  BlockVector<Scalar> out;
  Eigen::Index o = 0;
  for (auto d : dims) {
    if (o + d > v.size()) throw StructuralError("split: vector shorter than block dims");
    out.segments.emplace_back(v.segment(o, d));
    o += d;
  }
  if (o != v.size()) throw StructuralError("split: vector longer than block dims");
  return out;
}

enum class KernelVerdict { kEqual, kDifferent, kIndeterminate };

template <typename Scalar = double>
struct KernelCheck {
  KernelVerdict verdict = KernelVerdict::kIndeterminate;
  Scalar max_angle = 0;
  Eigen::Index dim_ker_a = 0;
  Eigen::Index dim_ker_db = 0;
};

/// Witness ker A = ker D  intersect  ker B numerically.
template <typename Scalar>
KernelCheck<Scalar> kernel_equality_check(const BlockTridiagonalSystem<Scalar>& sys, Scalar rel_tol = Scalar(1e-10)) {
  const auto a = assemble_full(sys);
  const auto [d, b] = split_D_B(sys);
  DenseMatrix<Scalar> stacked(2 * d.rows(), d.cols());
  stacked << d, b;
  const auto ker_a = null_space<Scalar>(a, rel_tol);
  const auto ker_db = null_space<Scalar>(stacked, rel_tol);

  KernelCheck<Scalar> out;
  out.dim_ker_a = ker_a.basis.cols();
  out.dim_ker_db = ker_db.basis.cols();
  out.max_angle = max_principal_angle<Scalar>(ker_a.basis, ker_db.basis);
  if (ker_a.indeterminate || ker_db.indeterminate)
    out.verdict = KernelVerdict::kIndeterminate;
  else
    out.verdict = (out.max_angle <= Scalar(1e-8)) ? KernelVerdict::kEqual : KernelVerdict::kDifferent;
  return out;
}

/// (gamma_lo, gamma_hi) implied by well-posedness constants (c_lo, c_hi).
template <typename Scalar = double>
SpectralBounds<Scalar> gamma_from_c(Scalar c_lo, Scalar c_hi) {
  if (!(c_lo > 0) || !(c_hi > 0)) throw DomainError("gamma_from_c: constants must be positive");
  if (c_lo > c_hi) throw DomainError("gamma_from_c: need c_lo <= c_hi");
  return {c_lo * c_lo / (c_hi + 1), c_hi + 4 * c_hi * c_hi};
}

/// (c_lo, c_hi) implied by spectral constants (gamma_lo, gamma_hi).
template <typename Scalar = double>
SpectralBounds<Scalar> c_from_gamma(Scalar gamma_lo, Scalar gamma_hi) {
  if (!(gamma_lo > 0) || !(gamma_hi > 0)) throw DomainError("c_from_gamma: constants must be positive");
  if (gamma_lo > gamma_hi) throw DomainError("c_from_gamma: need gamma_lo <= gamma_hi");
  const Scalar delta = std::min(gamma_lo * gamma_lo, gamma_lo / 2);
  return {Scalar(0.29) * delta / gamma_hi, std::sqrt(gamma_hi * (gamma_hi + 1))};
}

template <typename Scalar>
DenseMatrix<Scalar> block_diagonal(const std::vector<DenseMatrix<Scalar>>& blocks) {
  Eigen::Index n = 0;
  for (const auto& p : blocks) n += p.rows();
  DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(n, n);
  Eigen::Index o = 0;
  for (const auto& p : blocks) {
    if (p.rows() != p.cols()) throw StructuralError("block_diagonal: blocks must be square");
    out.block(o, o, p.rows(), p.rows()) = p;
    o += p.rows();
  }
  return out;
}

namespace detail {
template <typename Scalar>
DenseMatrix<Scalar> checked_preconditioner(const BlockTridiagonalSystem<Scalar>& sys,
                                           const std::vector<DenseMatrix<Scalar>>& p) {
  if (static_cast<int>(p.size()) != sys.blocks())
    throw StructuralError("preconditioner block count does not match the system");
  for (int i = 0; i < sys.blocks(); ++i)
    if (p[i].rows() != sys.dims()[i] || p[i].cols() != sys.dims()[i])
      throw StructuralError("preconditioner block " + std::to_string(i) + " has the wrong size");
  return block_diagonal(p);
}
}  // namespace detail

/// Best (c_lo, c_hi) with c_lo |x|_P <= |A x|_{P^{-1}} <= c_hi |x|_P.
template <typename Scalar>
SpectralBounds<Scalar> measure_c(const BlockTridiagonalSystem<Scalar>& sys,
                                 const std::vector<DenseMatrix<Scalar>>& p) {
  const auto pm = detail::checked_preconditioner(sys, p);
  const auto llt = spd_factor<Scalar>(pm, "measure_c");
  // |A x|^2_{P^{-1}} / |x|^2_P are the squared eigenvalues of L^{-1} A L^{-T}.
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(congruence(llt, assemble_full(sys)),
                                                        Eigen::EigenvaluesOnly);
  const DenseVector<Scalar> mags = es.eigenvalues().cwiseAbs();
  return {mags.minCoeff(), mags.maxCoeff()};
}

/// Best (gamma_lo, gamma_hi) with gamma_lo P <= D + B P^{-1} B <= gamma_hi P.
template <typename Scalar>
SpectralBounds<Scalar> measure_gamma(const BlockTridiagonalSystem<Scalar>& sys,
                                     const std::vector<DenseMatrix<Scalar>>& p) {
  const auto pm = detail::checked_preconditioner(sys, p);
  const auto llt = spd_factor<Scalar>(pm, "measure_gamma");
  const auto [d, b] = split_D_B(sys);
  const DenseMatrix<Scalar> bt = congruence(llt, b);
  DenseMatrix<Scalar> s = congruence(llt, d) + bt * bt;
  s = Scalar(0.5) * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(s, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

/// phi(x, y) = max(|y - x|, x^2).
template <typename Scalar = double>
Scalar phi(Scalar x, Scalar y) {
  return std::max(std::abs(y - x), x * x);
}

template <typename Scalar = double>
struct PhiMinimum {
  Scalar value{};
  Scalar x{};
  Scalar y{};
};

/// Minimum of phi on the quarter circle x, y >= 0, x^2 + y^2 = 1.
///
/// On the arc |y - x| decreases and x^2 increases while x < 1/sqrt(2), and
/// beyond that x^2 >= 1/2 dominates, so the minimum sits at the crossing
/// sqrt(1 - x^2) - x = x^2, located here by bisection.
template <typename Scalar = double>
PhiMinimum<Scalar> phi_min() {
  auto f = [](Scalar x) { return std::sqrt(1 - x * x) - x - x * x; };
  Scalar lo = 0, hi = Scalar(1) / std::sqrt(Scalar(2));
  for (int it = 0; it < 200 && hi - lo > std::numeric_limits<Scalar>::epsilon(); ++it) {
    const Scalar mid = (lo + hi) / 2;
    (f(mid) > 0 ? lo : hi) = mid;
  }
  const Scalar x = (lo + hi) / 2;
  const Scalar y = std::sqrt(1 - x * x);
  return {phi(x, y), x, y};
}

}  // namespace msp
