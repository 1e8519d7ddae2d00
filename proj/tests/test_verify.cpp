#include <gtest/gtest.h>

#include <sstream>

#include "msp/verify.hpp"

namespace {

struct Setup {
  msp::ProblemSpec spec;
  msp::DiscreteSpaces spaces;
  msp::SystemBlocks blocks;
};

Setup setup(msp::ProblemKind kind, int p, int level, std::optional<int> control_continuity = std::nullopt) {
  msp::ProblemSpec spec;
  spec.kind = kind;
  spec.degree = p;
  spec.level = level;
  spec.control_continuity = control_continuity;
  auto spaces = msp::build_spaces(spec);
  auto blocks = msp::assemble_blocks(spec, spaces);
  return Setup{spec, std::move(spaces), std::move(blocks)};
}

TEST(Verify, ConditionNumberOfThePreconditionerItselfIsOne) {
  const auto s = setup(msp::ProblemKind::kWave, 2, 1);
  const auto p = msp::build_preconditioner(s.spec, s.spaces, s.blocks);
  const auto est = msp::condition_number_estimate(p.materialize(), p);
  EXPECT_TRUE(est.converged);
  EXPECT_NEAR(est.kappa, 1.0, 1e-8);
  EXPECT_NEAR(est.lambda_max, 1.0, 1e-8);
}

TEST(Verify, SystemKernelConsistsOfUnreachableVelocityMultipliers) {
  const auto s = setup(msp::ProblemKind::kWave, 2, 1);
  const auto sys = msp::assemble_system(s.spec, s.spaces, s.blocks, msp::ProjectedData{});
  const Eigen::MatrixXd z = msp::system_kernel_basis(sys);
  ASSERT_GT(z.cols(), 0);
  EXPECT_LE((sys.matrix * z).cwiseAbs().maxCoeff(), 1e-10);
  const auto r2 = sys.offsets[4];
  EXPECT_LE(z.topRows(r2).cwiseAbs().maxCoeff(), 1e-12);
  // Only the H10 traces of the velocity are reachable from Y_h.
  EXPECT_EQ(z.cols(), s.spaces.dim_r2() - s.spaces.dim_r1());
  const auto heat = setup(msp::ProblemKind::kHeat, 2, 1);
  EXPECT_EQ(msp::system_kernel_basis(msp::assemble_system(heat.spec, heat.spaces)).cols(), 0);
}

TEST(Verify, PreconditionedSystemIsWellConditioned) {
  const auto s = setup(msp::ProblemKind::kWave, 2, 1);
  for (double alpha : {1e-3, 1e-6}) {
    auto spec = s.spec;
    spec.alpha = alpha;
    const auto sys = msp::assemble_system(spec, s.spaces, s.blocks, msp::ProjectedData{});
    const auto p = msp::PreconditionerFactory(spec, s.spaces, s.blocks).for_alpha(alpha);
    const auto est = msp::condition_number_estimate(sys.matrix, p, msp::system_kernel_basis(sys));
    EXPECT_TRUE(std::isfinite(est.kappa));
    EXPECT_GE(est.kappa, 1.0);
    EXPECT_LE(est.kappa, 10.0) << "alpha=" << alpha;
  }
}

TEST(Verify, StateOperatorIsAnIsometryOnTheMatchedSpaces) {
  for (auto kind : {msp::ProblemKind::kWave, msp::ProblemKind::kHeat}) {
    const auto s = setup(kind, 2, 1);
    EXPECT_NEAR(msp::measure_discrete_K1(s.spec, s.spaces, s.blocks), 1.0, 1e-8) << msp::to_string(kind);
  }
}

TEST(Verify, SmootherControlSpaceLosesTheIsometry) {
  const auto s = setup(msp::ProblemKind::kWave, 3, 1, 2);
  EXPECT_GT(msp::measure_discrete_K1(s.spec, s.spaces, s.blocks), 1.0 + 1e-6);
  const auto gap = msp::state_norm_check(s.spec);
  EXPECT_GT(gap.relative_gap, 1e-6);
}

TEST(Verify, BrezziConstantsAtLevelOne) {
  const auto s = setup(msp::ProblemKind::kWave, 2, 1);
  for (double alpha : {1e-3, 1e-6}) {
    const auto b = msp::measure_brezzi(s.spec, s.spaces, s.blocks, alpha);
    EXPECT_LE(b.c_a, b.c_a_bound + 1e-8);
    EXPECT_LE(b.c_b, b.c_b_bound + 1e-8);
    EXPECT_GT(b.gamma0, 0.0);
    EXPECT_GT(b.k0, 0.0);
    EXPECT_GE(b.k0_raw, 0.0);
  }
}

TEST(Verify, StateNormAndInclusionAtLevelOne) {
  for (auto kind : {msp::ProblemKind::kWave, msp::ProblemKind::kHeat})
    for (int p : {2, 3}) {
      msp::ProblemSpec spec;
      spec.kind = kind;
      spec.degree = p;
      spec.level = 1;
      EXPECT_LE(msp::state_norm_check(spec).relative_gap, 1e-8);
      const auto inc = msp::inclusion_check(spec, 5, 1);
      EXPECT_EQ(inc.samples, 5);
      EXPECT_LE(inc.max_relative_residual, 1e-10);
    }
}

TEST(Verify, FastSuitesPassAndReport) {
  std::vector<msp::SuiteResult> results;
  for (const char* name : {"schur", "constants", "inclusion", "state-norm"}) {
    results.push_back(msp::run_suite(name, 42));
    EXPECT_TRUE(results.back().passed()) << name;
    EXPECT_FALSE(results.back().checks.empty());
  }
  std::ostringstream csv, md;
  msp::write_suite_csv(results, csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "suite,check,passed,value,threshold,detail");
  msp::write_suite_markdown(results, md);
  EXPECT_NE(md.str().find("schur"), std::string::npos);
  EXPECT_THROW(msp::run_suite("nope"), std::exception);
}

}  // namespace
