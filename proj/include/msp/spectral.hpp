#pragma once

// Numerical witnesses for the auxiliary operator identities used by the
// block-diagonal preconditioning theory:
//  - <B A^{-1} B^T q, q> equals the supremum of <Bv, q>^2 / <Av, v>,
//  - B A^{-1} B^T <= C  iff  B^T C^{-1} B <= A,
//  - the 2x2 block criterion for M ~ blockdiag(D11, D22) through M11 ~ D11,
//    M22 ~ D22 and M11 <~ M11 - M12 M22^{-1} M21,
// and the per-parity conditions equivalent to P ~ D + B P^{-1} B.

#include <vector>

#include "msp/blocksys.hpp"

namespace msp {

template <typename Scalar = double>
struct SchurInstance {
  DenseMatrix<Scalar> a;  // SPD on V
  DenseMatrix<Scalar> b;  // dim Q x dim V
  DenseMatrix<Scalar> c;  // SPD on Q
};

template <typename Scalar = double>
struct SupIdentity {
  Scalar lhs{};
  Scalar rhs{};
  DenseVector<Scalar> maximizer;
};

template <typename Scalar>
SupIdentity<Scalar> schur_sup_identity(const SchurInstance<Scalar>& inst, const DenseVector<Scalar>& q) {
  if (inst.b.rows() != q.size() || inst.b.cols() != inst.a.rows())
    throw StructuralError("schur_sup_identity: dimension mismatch");
  const auto llt = spd_factor<Scalar>(inst.a, "schur_sup_identity");
  const DenseVector<Scalar> btq = inst.b.transpose() * q;
  SupIdentity<Scalar> out;
  out.maximizer = llt.solve(btq);
  out.lhs = btq.dot(out.maximizer);
  const Scalar energy = out.maximizer.dot(inst.a * out.maximizer);
  if (energy > 0) {
    const Scalar num = q.dot(inst.b * out.maximizer);
    out.rhs = num * num / energy;
  }
  return out;
}

template <typename Scalar = double>
struct DominationFlags {
  bool forward = false;   // B A^{-1} B^T <= C
  bool backward = false;  // B^T C^{-1} B <= A
  Scalar forward_margin{};   // relative min eigenvalue of C - B A^{-1} B^T
  Scalar backward_margin{};  // relative min eigenvalue of A - B^T C^{-1} B
};

template <typename Scalar>
DominationFlags<Scalar> domination_equivalence(const SchurInstance<Scalar>& inst, Scalar tol = Scalar(1e-10)) {
  if (inst.b.rows() != inst.c.rows() || inst.b.cols() != inst.a.rows())
    throw StructuralError("domination_equivalence: dimension mismatch");
  const auto la = spd_factor<Scalar>(inst.a, "domination_equivalence (A)");
  const auto lc = spd_factor<Scalar>(inst.c, "domination_equivalence (C)");
  const DenseMatrix<Scalar> fwd = inst.c - inst.b * la.solve(inst.b.transpose());
  const DenseMatrix<Scalar> bwd = inst.a - inst.b.transpose() * lc.solve(inst.b);
  DominationFlags<Scalar> out;
  out.forward_margin = relative_min_eigenvalue<Scalar>(fwd);
  out.backward_margin = relative_min_eigenvalue<Scalar>(bwd);
  out.forward = out.forward_margin >= -tol;
  out.backward = out.backward_margin >= -tol;
  return out;
}

template <typename Scalar = double>
struct Block2x2Instance {
  DenseMatrix<Scalar> m11, m12, m22;  // M21 = M12^T
  DenseMatrix<Scalar> d11, d22;

  DenseMatrix<Scalar> assembled() const {
    DenseMatrix<Scalar> m(m11.rows() + m22.rows(), m11.cols() + m22.cols());
    m << m11, m12, m12.transpose(), m22;
    return m;
  }
  DenseMatrix<Scalar> diagonal() const { return block_diagonal<Scalar>({d11, d22}); }
};

template <typename Scalar = double>
struct Block2x2Report {
  SpectralBounds<Scalar> m11_vs_d11;
  SpectralBounds<Scalar> m22_vs_d22;
  /// Smallest s with M11 <= s (M11 - M12 M22^{-1} M21); s >= 1.
  Scalar schur_constant{};
  /// Largest canonical correlation between the two blocks of M.
  Scalar correlation{};
  SpectralBounds<Scalar> direct;  // M vs blockdiag(D11, D22)
  /// Direct bounds implied by the three conditions.
  SpectralBounds<Scalar> implied;
  /// Bounds on the three condition constants implied by the direct bounds.
  SpectralBounds<Scalar> m11_implied;
  SpectralBounds<Scalar> m22_implied;
  Scalar schur_implied{};
  bool consistent = false;
};

template <typename Scalar>
Block2x2Report<Scalar> block2x2_equivalence_check(const Block2x2Instance<Scalar>& inst, Scalar slack = Scalar(1e-10)) {
  const auto n1 = inst.m11.rows();
  const auto n2 = inst.m22.rows();
  if (inst.m12.rows() != n1 || inst.m12.cols() != n2 || inst.d11.rows() != n1 || inst.d22.rows() != n2)
    throw StructuralError("block2x2_equivalence_check: dimension mismatch");
  const auto l22 = spd_factor<Scalar>(inst.m22, "block2x2_equivalence_check (M22)");

  Block2x2Report<Scalar> r;
  r.m11_vs_d11 = generalized_bounds<Scalar>(inst.m11, inst.d11);
  r.m22_vs_d22 = generalized_bounds<Scalar>(inst.m22, inst.d22);
  const DenseMatrix<Scalar> schur = inst.m11 - inst.m12 * l22.solve(inst.m12.transpose());
  r.schur_constant = generalized_bounds<Scalar>(inst.m11, schur).hi;
  // M11 <= s S  with  S = M11^{1/2}(I - C C^T)M11^{1/2}  gives  s = 1 / (1 - rho^2).
  r.correlation = std::sqrt(std::max<Scalar>(0, 1 - 1 / r.schur_constant));
  r.direct = generalized_bounds<Scalar>(inst.assembled(), inst.diagonal());

  // Sufficiency: M vs blockdiag(M11, M22) has spectrum in [1 - rho, 1 + rho].
  r.implied.lo = (1 - r.correlation) * std::min(r.m11_vs_d11.lo, r.m22_vs_d22.lo);
  r.implied.hi = (1 + r.correlation) * std::max(r.m11_vs_d11.hi, r.m22_vs_d22.hi);
  // Necessity: restrictions to each block, and the Schur complement as a minimum over x2.
  r.m11_implied = r.direct;
  r.m22_implied = r.direct;
  r.schur_implied = r.m11_vs_d11.hi / r.direct.lo;

  const auto le = [slack](Scalar a, Scalar b) { return a <= b + slack * std::max<Scalar>(1, std::abs(b)); };
  r.consistent = le(r.implied.lo, r.direct.lo) && le(r.direct.hi, r.implied.hi) &&
                 le(r.direct.lo, r.m11_vs_d11.lo) && le(r.m11_vs_d11.hi, r.direct.hi) &&
                 le(r.direct.lo, r.m22_vs_d22.lo) && le(r.m22_vs_d22.hi, r.direct.hi) &&
                 le(r.schur_constant, r.schur_implied);
  return r;
}

template <typename Scalar = double>
struct ConditionBounds {
  std::vector<int> blocks;  // 0-based block indices coupled in this condition
  SpectralBounds<Scalar> bounds;
};

/// Left and right sides of the conditions equivalent to P ~ D + B P^{-1} B.
///
/// B P^{-1} B couples block i only with i and i +- 2, so the relation splits
/// into one condition for the odd and one for the even blocks (n = 2: two
/// single-block conditions; n = 3: a 2x2-block and a single-block condition;
/// n = 4: two 2x2-block conditions). Each side is built entry by entry from
/// the blocks A_i, B_i, P_i.
template <typename Scalar>
std::vector<ConditionBounds<Scalar>> check_condition_n(const BlockTridiagonalSystem<Scalar>& sys,
                                                       const std::vector<DenseMatrix<Scalar>>& p) {
  const int n = sys.blocks();
  if (static_cast<int>(p.size()) != n) throw StructuralError("check_condition_n: block count mismatch");
  std::vector<Eigen::LLT<DenseMatrix<Scalar>>> pinv;
  for (int i = 0; i < n; ++i) {
    if (p[i].rows() != sys.dims()[i]) throw StructuralError("check_condition_n: P block has the wrong size");
    pinv.push_back(spd_factor<Scalar>(p[i], "check_condition_n (P_" + std::to_string(i + 1) + ")"));
  }
  // Entry (i, j) of D + B P^{-1} B for |i - j| in {0, 2}.
  auto entry = [&](int i, int j) -> DenseMatrix<Scalar> {
    if (i == j) {
      DenseMatrix<Scalar> m = sys.diag(i);
      if (i > 0) m += sys.off(i - 1) * pinv[i - 1].solve(sys.off(i - 1).transpose());
      if (i + 1 < n) m += sys.off(i).transpose() * pinv[i + 1].solve(sys.off(i));
      return m;
    }
    if (j == i + 2) return sys.off(i).transpose() * pinv[i + 1].solve(sys.off(i + 1).transpose());
    return sys.off(i - 1) * pinv[i - 1].solve(sys.off(i - 2));
  };

  std::vector<ConditionBounds<Scalar>> out;
  for (int parity = 0; parity < 2; ++parity) {
    ConditionBounds<Scalar> cond;
    for (int i = parity; i < n; i += 2) cond.blocks.push_back(i);
    std::vector<Eigen::Index> offs{0};
    for (int i : cond.blocks) offs.push_back(offs.back() + sys.dims()[i]);
    DenseMatrix<Scalar> lhs = DenseMatrix<Scalar>::Zero(offs.back(), offs.back());
    DenseMatrix<Scalar> rhs = DenseMatrix<Scalar>::Zero(offs.back(), offs.back());
    for (std::size_t a = 0; a < cond.blocks.size(); ++a) {
      const int i = cond.blocks[a];
      lhs.block(offs[a], offs[a], sys.dims()[i], sys.dims()[i]) = p[i];
      for (std::size_t b = 0; b < cond.blocks.size(); ++b) {
        const int j = cond.blocks[b];
        if (std::abs(i - j) <= 2)
          rhs.block(offs[a], offs[b], sys.dims()[i], sys.dims()[j]) = entry(i, j);
      }
    }
    cond.bounds = generalized_bounds<Scalar>(Scalar(0.5) * (rhs + rhs.transpose()), lhs);
    out.push_back(std::move(cond));
  }
  return out;
}

}  // namespace msp
