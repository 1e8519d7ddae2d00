#include <gtest/gtest.h>

#include <random>

#include "msp/blocksys.hpp"

namespace {

using msp::BlockTridiagonalSystem;
using msp::DenseMatrix;

template <typename S>
DenseMatrix<S> scalar(double v) {
  return DenseMatrix<S>::Constant(1, 1, S(v));
}

// A = [[2, 1], [1, -0]]: D = diag(2, 0), B couples the two scalar blocks.
template <typename S>
BlockTridiagonalSystem<S> two_by_two() {
  return BlockTridiagonalSystem<S>({scalar<S>(2), scalar<S>(0)}, {scalar<S>(1)});
}

template <typename S>
class BlockSysTyped : public ::testing::Test {};
using Scalars = ::testing::Types<float, double>;
TYPED_TEST_SUITE(BlockSysTyped, Scalars);

TYPED_TEST(BlockSysTyped, MeasuredConstantsOfScalarExample) {
  using S = TypeParam;
  const auto sys = two_by_two<S>();
  const std::vector<DenseMatrix<S>> p{scalar<S>(1), scalar<S>(1)};
  const auto c = msp::measure_c(sys, p);
  const S tol = std::is_same_v<S, float> ? S(1e-5) : S(1e-12);
  // eigenvalues of [[2, 1], [1, 0]] are 1 +- sqrt(2)
  EXPECT_NEAR(c.lo, std::sqrt(S(2)) - 1, tol);
  EXPECT_NEAR(c.hi, std::sqrt(S(2)) + 1, tol);
  // D + B B = diag(2, 0) + I
  const auto g = msp::measure_gamma(sys, p);
  EXPECT_NEAR(g.lo, S(1), tol);
  EXPECT_NEAR(g.hi, S(3), tol);
}

TYPED_TEST(BlockSysTyped, TildeIsANormPreservingInvolution) {
  using S = TypeParam;
  msp::BlockVector<S> x;
  x.segments = {msp::DenseVector<S>::Constant(2, S(1)), msp::DenseVector<S>::Constant(3, S(-2)),
                msp::DenseVector<S>::Constant(1, S(4))};
  const auto t = msp::tilde(x);
  EXPECT_EQ(t.segments[0], x.segments[0]);
  EXPECT_EQ(t.segments[1], -x.segments[1]);
  EXPECT_EQ(t.segments[2], x.segments[2]);
  EXPECT_EQ(msp::flatten(msp::tilde(t)), msp::flatten(x));
  EXPECT_EQ(msp::flatten(t).norm(), msp::flatten(x).norm());
}

TEST(BlockSys, AssembledMatrixHasAlternatingDiagonalSigns) {
  std::mt19937_64 rng(3);
  std::vector<Eigen::MatrixXd> diag{msp::random_spd<double>(rng, 2), msp::random_spd<double>(rng, 3),
                                    msp::random_spd<double>(rng, 1)};
  std::vector<Eigen::MatrixXd> off{msp::gaussian_matrix<double>(rng, 3, 2), msp::gaussian_matrix<double>(rng, 1, 3)};
  BlockTridiagonalSystem<double> sys(diag, off);
  const auto a = msp::assemble_full(sys);
  EXPECT_EQ(a.rows(), 6);
  EXPECT_EQ(a.block(0, 0, 2, 2), diag[0]);
  EXPECT_EQ(a.block(2, 2, 3, 3), -diag[1]);
  EXPECT_EQ(a.block(5, 5, 1, 1), diag[2]);
  EXPECT_EQ(a.block(2, 0, 3, 2), off[0]);
  EXPECT_EQ(a.block(0, 2, 2, 3), off[0].transpose());
  EXPECT_EQ(msp::symmetry_defect(a), 0.0);
  const auto [d, b] = msp::split_D_B(sys);
  EXPECT_TRUE(d.block(2, 2, 3, 3).isApprox(diag[1]));
  EXPECT_TRUE((d.topLeftCorner(2, 2) + b.topLeftCorner(2, 2)).isApprox(a.topLeftCorner(2, 2)));
}

TEST(BlockSys, ConstructorRejectsMalformedInput) {
  using M = Eigen::MatrixXd;
  EXPECT_THROW(BlockTridiagonalSystem<double>({M::Identity(2, 2)}, {}), msp::StructuralError);
  EXPECT_THROW(BlockTridiagonalSystem<double>({M::Identity(2, 2), M::Identity(2, 2)}, {M::Zero(3, 2)}),
               msp::StructuralError);
  M nonsym(2, 2);
  nonsym << 1, 2, 0, 1;
  EXPECT_THROW(BlockTridiagonalSystem<double>({nonsym, M::Identity(2, 2)}, {M::Zero(2, 2)}), msp::StructuralError);
  EXPECT_THROW(BlockTridiagonalSystem<double>({-M::Identity(2, 2), M::Identity(2, 2)}, {M::Zero(2, 2)}),
               msp::DomainError);
}

TEST(BlockSys, ConstantFormulasMatchHandValues) {
  auto g = msp::gamma_from_c(1.0, 1.0);
  EXPECT_DOUBLE_EQ(g.lo, 0.5);
  EXPECT_DOUBLE_EQ(g.hi, 5.0);
  g = msp::gamma_from_c(0.5, 2.0);
  EXPECT_DOUBLE_EQ(g.lo, 0.25 / 3.0);
  EXPECT_DOUBLE_EQ(g.hi, 18.0);
  auto c = msp::c_from_gamma(1.0, 1.0);
  EXPECT_DOUBLE_EQ(c.lo, 0.145);
  EXPECT_DOUBLE_EQ(c.hi, std::sqrt(2.0));
  c = msp::c_from_gamma(0.2, 3.0);
  EXPECT_NEAR(c.lo, 0.29 * 0.04 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(c.hi, std::sqrt(12.0));
  EXPECT_THROW(msp::gamma_from_c(0.0, 1.0), msp::DomainError);
  EXPECT_THROW(msp::gamma_from_c(2.0, 1.0), msp::DomainError);
  EXPECT_THROW(msp::c_from_gamma(-1.0, 1.0), msp::DomainError);
}

TEST(BlockSys, PhiMinimumOnQuarterCircle) {
  const auto m = msp::phi_min<double>();
  EXPECT_GE(m.value, 0.29);
  EXPECT_LE(m.value, 0.30);
  EXPECT_NEAR(m.x * m.x + m.y * m.y, 1.0, 1e-14);
  // at the minimizer both branches of phi coincide
  EXPECT_NEAR(m.y - m.x, m.x * m.x, 1e-14);
  EXPECT_NEAR(m.value, 0.29559774252208477, 1e-12);
  EXPECT_DOUBLE_EQ(msp::phi(0.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(msp::phi(1.0, 0.0), 1.0);
}

TEST(BlockSys, KernelEqualityWithForcedKernel) {
  using M = Eigen::MatrixXd;
  // A_0 = diag(1, 0), B_0 annihilates e_2 of block 0: ker = span(e_2).
  M a0 = M::Zero(2, 2);
  a0(0, 0) = 1;
  M b0(1, 2);
  b0 << 1, 0;
  BlockTridiagonalSystem<double> sys({a0, M::Identity(1, 1)}, {b0});
  const auto check = msp::kernel_equality_check(sys);
  EXPECT_EQ(check.verdict, msp::KernelVerdict::kEqual);
  EXPECT_EQ(check.dim_ker_a, 1);
  EXPECT_EQ(check.dim_ker_db, 1);
  EXPECT_LE(check.max_angle, 1e-12);
}

TEST(BlockSys, ConstantBracketsHoldOnRandomInstances) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 30; ++k) {
    const int n = 2 + k % 3;
    std::vector<Eigen::MatrixXd> diag, off, p;
    std::vector<int> dims;
    for (int i = 0; i < n; ++i) dims.push_back(1 + static_cast<int>(rng() % 4));
    for (int i = 0; i < n; ++i) {
      diag.push_back(msp::random_semidefinite<double>(rng, dims[i]));
      p.push_back(msp::random_spd<double>(rng, dims[i]));
    }
    for (int i = 0; i + 1 < n; ++i) off.push_back(msp::gaussian_matrix<double>(rng, dims[i + 1], dims[i]));
    BlockTridiagonalSystem<double> sys(diag, off);
    const auto c = msp::measure_c(sys, p);
    const auto g = msp::measure_gamma(sys, p);
    const auto gi = msp::gamma_from_c(c.lo, c.hi);
    const auto ci = msp::c_from_gamma(g.lo, g.hi);
    EXPECT_GE(g.lo, gi.lo * (1 - 1e-10));
    EXPECT_LE(g.hi, gi.hi * (1 + 1e-10));
    EXPECT_GE(c.lo, ci.lo * (1 - 1e-10));
    EXPECT_LE(c.hi, ci.hi * (1 + 1e-10));
  }
}

}  // namespace
