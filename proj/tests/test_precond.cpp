#include <gtest/gtest.h>

#include <random>

#include "msp/errors.hpp"
#include "msp/precond.hpp"
#include "msp/verify.hpp"

namespace {

struct Setup {
  msp::ProblemSpec spec;
  msp::DiscreteSpaces spaces;
  msp::SystemBlocks blocks;
};

Setup setup(msp::ProblemKind kind, int p, int level, double alpha = 1.0) {
  msp::ProblemSpec spec;
  spec.kind = kind;
  spec.degree = p;
  spec.level = level;
  spec.alpha = alpha;
  auto spaces = msp::build_spaces(spec);
  auto blocks = msp::assemble_blocks(spec, spaces);
  return Setup{spec, std::move(spaces), std::move(blocks)};
}

Eigen::VectorXd random_vector(msp::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

TEST(Precond, InverseUndoesApplication) {
  for (auto kind : {msp::ProblemKind::kWave, msp::ProblemKind::kHeat})
    for (double alpha : {1.0, 1e-3, 1e-9}) {
      const auto s = setup(kind, 2, 1, alpha);
      const auto p = msp::build_preconditioner(s.spec, s.spaces, s.blocks);
      const auto x = random_vector(p.dim(), 3);
      EXPECT_LE((p.apply_inverse(p.apply(x)) - x).norm() / x.norm(), 1e-9) << "alpha=" << alpha;
      const Eigen::VectorXd r = p.materialize() * x;
      EXPECT_LE((p.apply_inverse(r) - x).norm() / x.norm(), 1e-9);
    }
}

TEST(Precond, ApplyInverseIsLinear) {
  const auto s = setup(msp::ProblemKind::kWave, 2, 1, 1e-3);
  const auto p = msp::build_preconditioner(s.spec, s.spaces, s.blocks);
  const auto a = random_vector(p.dim(), 1), b = random_vector(p.dim(), 2);
  const Eigen::VectorXd lhs = p.apply_inverse(a + 2.5 * b);
  const Eigen::VectorXd rhs = p.apply_inverse(a) + 2.5 * p.apply_inverse(b);
  EXPECT_LE((lhs - rhs).norm() / rhs.norm(), 1e-12);
}

TEST(Precond, ControlBlocksScaleWithAlpha) {
  const auto s = setup(msp::ProblemKind::kWave, 2, 1);
  const msp::PreconditionerFactory factory(s.spec, s.spaces, s.blocks);
  const Eigen::MatrixXd mu(s.blocks.control_mass);
  for (double alpha : {1.0, 1e-4}) {
    const auto p = factory.for_alpha(alpha);
    ASSERT_EQ(p.blocks().size(), 5u);
    EXPECT_EQ(p.blocks()[1].name, "alpha_P_U");
    EXPECT_EQ(p.blocks()[2].name, "inv_alpha_P_U");
    EXPECT_LE((Eigen::MatrixXd(p.block_matrix(1)) - alpha * mu).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((Eigen::MatrixXd(p.block_matrix(2)) - mu / alpha).cwiseAbs().maxCoeff(), 1e-12 / alpha);
    EXPECT_EQ(p.blocks()[1].kind, msp::BlockDiagPreconditioner::Kind::kKronecker);
  }
}

TEST(Precond, StateBlockStaysPositiveDefiniteForTinyAlpha) {
  const auto s = setup(msp::ProblemKind::kWave, 2, 1);
  const msp::PreconditionerFactory factory(s.spec, s.spaces, s.blocks);
  const auto p = factory.for_alpha(1e-9);
  const Eigen::MatrixXd py(p.block_matrix(0));
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(py).eigenvalues();
  EXPECT_GT(ev.minCoeff(), 0.0);
  // The factory's P_Y agrees with the direct assembly.
  auto spec = s.spec;
  spec.alpha = 1e-9;
  const Eigen::MatrixXd direct(msp::assemble_P_Y(spec, s.spaces, s.blocks));
  EXPECT_LE((direct - py).cwiseAbs().maxCoeff(), 1e-13 * py.cwiseAbs().maxCoeff());
}

// y^T P_Y y evaluated term by term with pointwise quadrature of the defining integrals.
double state_norm_by_quadrature(const Setup& s, const Eigen::VectorXd& y) {
  const auto basis = s.spaces.state_basis();
  const auto& box = s.spec.observation;
  const auto& st = s.spaces.state_t.space;
  const auto& sx = s.spaces.state_x.space;
  const auto& sy = s.spaces.state_y.space;
  const int n = s.spec.degree + 2;
  const auto qt = msp::element_quadrature(st, n);
  const auto qx = msp::element_quadrature(sx, n), qy = msp::element_quadrature(sy, n);
  const auto ox = msp::element_quadrature(sx, n, std::make_pair(box.x0, box.x1));
  const auto oy = msp::element_quadrature(sy, n, std::make_pair(box.y0, box.y1));
  const int dt = s.spec.kind == msp::ProblemKind::kWave ? 2 : 1;

  double observed = 0, residual = 0;
  for (const auto& t : qt.points) {
    for (const auto& x : ox.points)
      for (const auto& z : oy.points) {
        const double v = basis.evaluate(y, {t.x, x.x, z.x}, {0, 0, 0});
        observed += t.w * x.w * z.w * v * v;
      }
    for (const auto& x : qx.points)
      for (const auto& z : qy.points) {
        const std::vector<double> pt{t.x, x.x, z.x};
        const double ly = basis.evaluate(y, pt, {dt, 0, 0}) - basis.evaluate(y, pt, {0, 2, 0}) -
                          basis.evaluate(y, pt, {0, 0, 2});
        residual += t.w * x.w * z.w * ly * ly;
      }
  }
  double initial = 0;
  for (const auto& x : qx.points)
    for (const auto& z : qy.points) {
      const std::vector<double> pt{0.0, x.x, z.x};
      const double gx = basis.evaluate(y, pt, {0, 1, 0}), gy = basis.evaluate(y, pt, {0, 0, 1});
      initial += x.w * z.w * (gx * gx + gy * gy);
      if (s.spec.kind == msp::ProblemKind::kWave) {
        const double v = basis.evaluate(y, pt, {1, 0, 0});
        initial += x.w * z.w * v * v;
      }
    }
  return observed + s.spec.alpha * residual + initial;
}

TEST(Precond, StateNormMatchesItsDefiningIntegrals) {
  // Level 1 leaves the box edges inside elements.
  for (auto kind : {msp::ProblemKind::kWave, msp::ProblemKind::kHeat})
    for (double alpha : {1.0, 1e-3}) {
      const auto s = setup(kind, 2, 1, alpha);
      const auto py = msp::assemble_P_Y(s.spec, s.spaces, s.blocks);
      for (unsigned seed : {1u, 2u, 3u}) {
        const auto y = random_vector(s.spaces.dim_y(), seed);
        const double expected = state_norm_by_quadrature(s, y);
        EXPECT_NEAR(y.dot(py * y), expected, 1e-11 * expected) << msp::to_string(kind) << " alpha=" << alpha;
      }
    }
}

TEST(Precond, SchurFormOfTheStateBlockEqualsTheNorm) {
  for (int p : {2, 3})
    for (double alpha : {1.0, 1e-6}) {
      const auto s = setup(msp::ProblemKind::kWave, p, 1, alpha);
      const Eigen::MatrixXd py(msp::assemble_P_Y(s.spec, s.spaces, s.blocks));
      const Eigen::MatrixXd pt = msp::build_Ptilde_Y(s.spec, s.blocks);
      EXPECT_LE((pt - py).cwiseAbs().maxCoeff() / py.cwiseAbs().maxCoeff(), 1e-10) << "p=" << p;
    }
}

TEST(Precond, DenseReferenceRefusesLargeSpaces) {
  const auto s = setup(msp::ProblemKind::kWave, 2, 3);
  EXPECT_GT(s.spaces.dim_y(), 200);
  EXPECT_THROW(msp::build_Ptilde_Y(s.spec, s.blocks), msp::DomainError);
}

}  // namespace
