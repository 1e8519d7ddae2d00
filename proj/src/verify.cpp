#include "msp/verify.hpp"

#include <Eigen/LU>

#include <cmath>

#include "msp/dense.hpp"
#include "msp/errors.hpp"
#include "msp/krylov.hpp"

namespace msp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd blkdiag(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out = MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

MatrixXd dual_gram(const MatrixXd& k, const MatrixXd& gram) {
  const auto llt = spd_factor<double>(gram, "dual_gram");
  MatrixXd g = k.transpose() * llt.solve(k);
  return 0.5 * (g + g.transpose());
}

}  // namespace

DenseBlocks dense_blocks(const ProblemSpec& spec, const DiscreteSpaces& spaces, const SystemBlocks& blocks,
                         Index max_dim) {
  const Index ny = spaces.dim_y(), nu = spaces.dim_u();
  if (ny + nu > max_dim)
    throw DomainError("dense_blocks: instance too large for dense measurements (dim " + std::to_string(ny + nu) + ")");
  DenseBlocks d;
  d.observation = MatrixXd(blocks.observation);
  d.control_mass = MatrixXd(blocks.control_mass);
  d.k_u = MatrixXd(blocks.k_u);
  const bool wave = spec.kind == ProblemKind::kWave;
  const Index nr1 = spaces.dim_r1(), nr2 = spaces.dim_r2();
  d.k_r.resize(nr1 + nr2, ny);
  d.k_r.topRows(nr1) = MatrixXd(blocks.k_r1);
  d.r_gram = MatrixXd(blocks.r1_stiffness);
  if (wave) {
    d.k_r.bottomRows(nr2) = MatrixXd(blocks.k_r2);
    d.r_gram = blkdiag(d.r_gram, MatrixXd(blocks.r2_mass));
  }
  const auto parts = state_norm_parts(spec, spaces, blocks);
  d.state_norm = MatrixXd(parts.gram + parts.traces);
  d.state_norm = 0.5 * (d.state_norm + d.state_norm.transpose()).eval();
  return d;
}

double measure_discrete_K1(const ProblemSpec& spec, const DiscreteSpaces& spaces, const SystemBlocks& blocks) {
  const auto d = dense_blocks(spec, spaces, blocks);
  const MatrixXd stacked = dual_gram(d.k_u, d.control_mass) + dual_gram(d.k_r, d.r_gram);
  const double lo = generalized_bounds<double>(stacked, d.state_norm).lo;
  if (!(lo > 0)) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(lo);
}

InfSupReport measure_discrete_infsup(const ProblemSpec& spec, const DiscreteSpaces& spaces,
                                     const SystemBlocks& blocks, bool restrict_to_ker_ku) {
  const auto d = dense_blocks(spec, spaces, blocks);
  MatrixXd basis = MatrixXd::Identity(d.state_norm.rows(), d.state_norm.rows());
  InfSupReport out;
  if (restrict_to_ker_ku) {
    const auto ker = null_space<double>(d.k_u, 1e-10);
    basis = ker.basis;
    out.kernel_dim = basis.cols();
    if (basis.cols() == 0) {
      out.degenerate = true;
      return out;
    }
  } else {
    out.kernel_dim = basis.cols();
  }
  // c_R^2 = min over r of |K_R^T r|^2_{Y'} / |r|^2_R.
  const MatrixXd kz = d.k_r * basis;
  const MatrixXd nz = basis.transpose() * d.state_norm * basis;
  const auto llt = spd_factor<double>(MatrixXd(0.5 * (nz + nz.transpose())), "measure_discrete_infsup");
  MatrixXd s = kz * llt.solve(kz.transpose());
  s = 0.5 * (s + s.transpose()).eval();
  const VectorXd ev = generalized_eigenvalues<double>(s, d.r_gram);
  out.raw_value = std::sqrt(std::max(ev(0), 0.0));
  out.cokernel_dim = null_space<double>(MatrixXd(kz.transpose()), 1e-10).basis.cols();
  const double lo = out.cokernel_dim < ev.size() ? ev(out.cokernel_dim) : 0.0;
  out.value = std::sqrt(std::max(lo, 0.0));
  out.degenerate = !(lo > 0);
  return out;
}

BrezziReport measure_brezzi(const ProblemSpec& spec, const DiscreteSpaces& spaces, const SystemBlocks& blocks,
                            double alpha) {
  if (!(alpha > 0)) throw DomainError("measure_brezzi: alpha must be positive");
  const auto d = dense_blocks(spec, spaces, blocks);
  const Index ny = d.observation.rows(), nu = d.control_mass.rows(), nr = d.k_r.rows();

  const MatrixXd g_u = dual_gram(d.k_u, d.control_mass);
  const MatrixXd g_r = dual_gram(d.k_r, d.r_gram);
  const MatrixXd ptilde = d.observation + alpha * g_u + g_r;
  const MatrixXd x_norm = blkdiag(ptilde, alpha * d.control_mass);
  const MatrixXd a_form = blkdiag(d.observation, alpha * d.control_mass);
  const MatrixXd m_norm = blkdiag(d.control_mass / alpha, d.r_gram);

  MatrixXd b = MatrixXd::Zero(nu + nr, ny + nu);
  b.topLeftCorner(nu, ny) = d.k_u;
  b.topRightCorner(nu, nu) = d.control_mass;
  b.bottomLeftCorner(nr, ny) = d.k_r;

  BrezziReport r;
  r.alpha = alpha;
  r.c_a = generalized_bounds<double>(a_form, x_norm).hi;

  const auto m_llt = spd_factor<double>(m_norm, "measure_brezzi (M)");
  MatrixXd btmb = b.transpose() * m_llt.solve(b);
  btmb = 0.5 * (btmb + btmb.transpose()).eval();
  r.c_b = std::sqrt(generalized_bounds<double>(btmb, x_norm).hi);

  // ker B = {(z, -M_U^{-1} K_U z) : K_R z = 0}.
  const auto ker_r = null_space<double>(d.k_r, 1e-10);
  r.kernel_dim = ker_r.basis.cols();
  if (r.kernel_dim > 0) {
    const auto mu_llt = spd_factor<double>(d.control_mass, "measure_brezzi (M_U)");
    MatrixXd w(ny + nu, r.kernel_dim);
    w.topRows(ny) = ker_r.basis;
    w.bottomRows(nu) = -mu_llt.solve(d.k_u * ker_r.basis);
    const MatrixXd aw = w.transpose() * a_form * w;
    const MatrixXd xw = w.transpose() * x_norm * w;
    r.gamma0 = generalized_bounds<double>(MatrixXd(0.5 * (aw + aw.transpose())),
                                          MatrixXd(0.5 * (xw + xw.transpose())))
                   .lo;
  }

  const auto x_llt = spd_factor<double>(x_norm, "measure_brezzi (X)");
  MatrixXd bxb = b * x_llt.solve(b.transpose());
  bxb = 0.5 * (bxb + bxb.transpose()).eval();
  // ker B^T = {(0, q_R) : K_R^T q_R = 0}; k_0 is reported on its complement as well.
  const VectorXd ev = generalized_eigenvalues<double>(bxb, m_norm);
  r.k0_raw = std::sqrt(std::max(ev(0), 0.0));
  r.cokernel_dim = null_space<double>(MatrixXd(d.k_r.transpose()), 1e-10).basis.cols();
  r.k0 = std::sqrt(std::max(ev(r.cokernel_dim), 0.0));

  const double t_norm_sq = generalized_bounds<double>(d.observation, d.state_norm).hi;
  const double c_k = measure_discrete_K1(spec, spaces, blocks);
  r.k0_reference = 1.0 / std::sqrt(t_norm_sq * c_k * c_k + 1.0);
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct RitzExtreme {
  double value = 0;     // largest |Ritz value|
  double residual = 0;  // bound on its distance to the spectrum
  int iterations = 0;
};

/// Lanczos for an operator self-adjoint in the inner product <x, y> = x^T G y, run on the
/// G-orthogonal complement of span(Z) (Z G-orthonormal, possibly empty).
RitzExtreme lanczos_abs_max(const LinearOperator& op, const LinearOperator& gram, const MatrixXd& z, Index n,
                            int max_iter, std::uint64_t seed) {
  MatrixXd gzm(n, z.cols());
  for (Index j = 0; j < z.cols(); ++j) gzm.col(j) = gram(z.col(j));
  const auto deflate = [&](VectorXd& w) {
    if (z.cols() > 0) w -= z * (gzm.transpose() * w);
  };
  const int m_cap = static_cast<int>(std::min<Index>(max_iter, n - z.cols()));
  MatrixXd q(n, m_cap + 1), gq(n, m_cap + 1);
  std::vector<double> alphas, betas;
  VectorXd v = random_start(n, seed);
  deflate(v);
  VectorXd gv = gram(v);
  const double nrm = std::sqrt(v.dot(gv));
  q.col(0) = v / nrm;
  gq.col(0) = gv / nrm;
  int m = 0;
  double beta = 0;
  for (int j = 0; j < m_cap; ++j) {
    VectorXd w = op(q.col(j));
    const double a = gq.col(j).dot(w);
    alphas.push_back(a);
    for (int pass = 0; pass < 2; ++pass) {
      deflate(w);
      w -= q.leftCols(j + 1) * (gq.leftCols(j + 1).transpose() * w);
    }
    const VectorXd gw = gram(w);
    beta = std::sqrt(std::max(w.dot(gw), 0.0));
    m = j + 1;
    if (beta <= 1e-13 * std::abs(a) || m == m_cap) break;
    betas.push_back(beta);
    q.col(j + 1) = w / beta;
    gq.col(j + 1) = gw / beta;
  }
  MatrixXd t = MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    t(i, i) = alphas[i];
    if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = betas[i];
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(t);
  Index k = 0;
  es.eigenvalues().cwiseAbs().maxCoeff(&k);
  RitzExtreme out;
  out.value = std::abs(es.eigenvalues()(k));
  out.residual = (m == n - z.cols()) ? 0.0 : beta * std::abs(es.eigenvectors()(m - 1, k));
  out.iterations = m;
  return out;
}

}  // namespace

MatrixXd system_kernel_basis(const DiscreteSystem& sys) {
  const auto& b = sys.blocks;
  const Index ny = sys.block_sizes.at(0);
  const bool wave = sys.kind == ProblemKind::kWave;
  const Index nr1 = b.k_r1.rows(), nr2 = wave ? b.k_r2.rows() : 0;
  // ker of the system = {(0, 0, 0, q_R) : K_R^T q_R = 0} whenever the state/control part is
  // definite on ker B, which holds for every configuration built here.
  MatrixXd krt(ny, nr1 + nr2);
  krt.leftCols(nr1) = MatrixXd(b.k_r1).transpose();
  if (wave) krt.rightCols(nr2) = MatrixXd(b.k_r2).transpose();
  const auto ker = null_space<double>(krt, 1e-10);
  MatrixXd out = MatrixXd::Zero(sys.dim(), ker.basis.cols());
  out.middleRows(sys.offsets.at(3), nr1 + nr2) = ker.basis;
  return out;
}

ConditionEstimate condition_number_estimate(const SparseMatrix& system, const BlockDiagPreconditioner& precond,
                                            const MatrixXd& kernel, int max_iter, std::uint64_t seed) {
  if (system.rows() != precond.dim()) throw StructuralError("condition_number_estimate: size mismatch");
  const Index n = system.rows();
  if (n > 8000) throw DomainError("condition_number_estimate: desk scale only (dim <= 8000)");
  if (kernel.cols() > 0 && kernel.rows() != n) throw StructuralError("condition_number_estimate: kernel basis");
  if (kernel.cols() > 0 && (system * kernel).norm() > 1e-8 * MatrixXd(system).norm() * kernel.norm())
    throw ContractError("condition_number_estimate: the given basis is not in the kernel");

  // P-orthonormal kernel basis and its rank-k completion A + (P Z)(P Z)^T.
  MatrixXd z = kernel, pz(n, kernel.cols());
  if (kernel.cols() > 0) {
    for (Index j = 0; j < z.cols(); ++j) pz.col(j) = precond.apply(z.col(j));
    const Eigen::LLT<MatrixXd> llt(z.transpose() * pz);
    const MatrixXd linv = llt.matrixL().solve(MatrixXd::Identity(z.cols(), z.cols()));
    z = z * linv.transpose();
    pz = pz * linv.transpose();
  }
  const LinearOperator gram = [&](const VectorXd& x) { return precond.apply(x); };
  const LinearOperator forward = [&](const VectorXd& x) -> VectorXd { return precond.apply_inverse(system * x); };
  MatrixXd completed = MatrixXd(system) + pz * pz.transpose();
  const Eigen::PartialPivLU<MatrixXd> lu(completed);
  const LinearOperator inverse = [&](const VectorXd& x) -> VectorXd { return lu.solve(precond.apply(x)); };

  const auto hi = lanczos_abs_max(forward, gram, z, n, max_iter, seed);
  const auto inv = lanczos_abs_max(inverse, gram, z, n, max_iter, seed + 1);
  ConditionEstimate c;
  c.kernel_dim = kernel.cols();
  c.lambda_max = hi.value;
  c.lambda_min = 1.0 / inv.value;
  c.kappa = hi.value * inv.value;
  c.kappa_lo = c.kappa;
  c.kappa_hi = (hi.value + hi.residual) * (inv.value + inv.residual);
  c.iterations = std::max(hi.iterations, inv.iterations);
  c.converged = std::isfinite(c.kappa) && hi.residual <= 1e-6 * hi.value && inv.residual <= 1e-6 * inv.value;
  return c;
}

StateNormReport state_norm_check(const ProblemSpec& spec) {
  const auto spaces = build_spaces(spec);
  const auto blocks = assemble_blocks(spec, spaces);
  const MatrixXd p(assemble_P_Y(spec, spaces, blocks));
  const MatrixXd ptilde = build_Ptilde_Y(spec, blocks);
  StateNormReport r;
  r.dim_y = p.rows();
  r.max_abs_gap = (ptilde - p).cwiseAbs().maxCoeff();
  r.max_abs_p = p.cwiseAbs().maxCoeff();
  r.relative_gap = r.max_abs_gap / r.max_abs_p;
  return r;
}

InclusionReport inclusion_check(const ProblemSpec& spec, int samples, std::uint64_t seed) {
  const auto spaces = build_spaces(spec);
  const auto ybasis = spaces.state_basis();
  const auto ubasis = spaces.control_basis();
  const SparseMatrix k_u = assemble_K_U(spec, spaces);
  const KroneckerSolver mass(control_mass_factors(spaces));
  const auto terms = state_operator(spec.kind);

  const int npts = spec.degree + 2;
  const auto qt = element_quadrature(spaces.state_t.space, npts);
  const auto qx = element_quadrature(spaces.state_x.space, npts);
  const auto qy = element_quadrature(spaces.state_y.space, npts);

  InclusionReport rep;
  rep.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const VectorXd y = random_start(ybasis.dim(), seed + static_cast<std::uint64_t>(s));
    const VectorXd u = mass.solve(k_u * y);
    double err = 0, ref = 0;
    for (const auto& pt : qt.points)
      for (const auto& px : qx.points)
        for (const auto& py : qy.points) {
          const std::vector<double> point{pt.x, px.x, py.x};
          double ly = 0;
          for (const auto& t : terms) ly += t.coeff * ybasis.evaluate(y, point, {t.dt, t.dx, t.dy});
          const double uc = ubasis.evaluate(u, point, {0, 0, 0});
          const double w = pt.w * px.w * py.w;
          err += w * (ly - uc) * (ly - uc);
          ref += w * ly * ly;
        }
    rep.max_relative_residual = std::max(rep.max_relative_residual, std::sqrt(err / ref));
  }
  return rep;
}

}  // namespace msp
