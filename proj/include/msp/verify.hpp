#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "msp/precond.hpp"

namespace msp {

/// Dense pieces of the discrete Brezzi setting on Y_h x U_h and the multiplier space.
struct BrezziReport {
  double alpha = 0;
  double c_a = 0, c_b = 0, gamma0 = 0;
  double k0 = 0;      // on the complement of ker B^T
  double k0_raw = 0;  // over the whole multiplier space (0 when B is not onto)
  Index kernel_dim = 0;    // dim ker B
  Index cokernel_dim = 0;  // dim ker B^T
  // Reference values of the continuous theory.
  double c_a_bound = 1.0;
  double c_b_bound = 1.4142135623730951;
  double gamma0_reference = 0.5;
  double k0_reference = 0;  // 1 / sqrt(|T|^2 c_K^2 + 1) with discrete |T| and c_K
};

struct InfSupReport {
  double value = 0;      // smallest singular value on the complement of ker K_R^T
  double raw_value = 0;  // smallest singular value over all of R_h
  bool degenerate = false;
  Index kernel_dim = 0;    // dimension of the state subspace used
  Index cokernel_dim = 0;  // dim ker K_R^T on that subspace
};

struct ConditionEstimate {
  double lambda_max = 0;  // largest |eigenvalue| of P^{-1} A
  double lambda_min = 0;  // smallest |eigenvalue| of P^{-1} A
  double kappa = 0;
  double kappa_lo = 0, kappa_hi = 0;  // interval from the Ritz residual bounds
  int iterations = 0;
  Index kernel_dim = 0;  // deflated null space of the system
  bool converged = false;
};

struct StateNormReport {
  Index dim_y = 0;
  double max_abs_gap = 0;
  double max_abs_p = 0;
  double relative_gap = 0;
};

struct InclusionReport {
  int samples = 0;
  double max_relative_residual = 0;
};

/// Dense matrices the measurements share; desk scale only.
struct DenseBlocks {
  Eigen::MatrixXd observation, control_mass, k_u, k_r, r_gram, state_norm;
};
DenseBlocks dense_blocks(const ProblemSpec& spec, const DiscreteSpaces& spaces, const SystemBlocks& blocks,
                         Index max_dim = 6000);

BrezziReport measure_brezzi(const ProblemSpec& spec, const DiscreteSpaces& spaces, const SystemBlocks& blocks,
                            double alpha);
double measure_discrete_K1(const ProblemSpec& spec, const DiscreteSpaces& spaces, const SystemBlocks& blocks);
InfSupReport measure_discrete_infsup(const ProblemSpec& spec, const DiscreteSpaces& spaces,
                                     const SystemBlocks& blocks, bool restrict_to_ker_ku);

/// Orthonormal basis of the null space of the saddle-point matrix (multipliers q_R with K_R^T q_R = 0).
Eigen::MatrixXd system_kernel_basis(const DiscreteSystem& sys);

/// Lanczos in the P inner product on P^{-1}A (largest) and A^{-1}P (smallest |eigenvalue|),
/// restricted to the P-orthogonal complement of the given kernel basis.
ConditionEstimate condition_number_estimate(const SparseMatrix& system, const BlockDiagPreconditioner& precond,
                                            const Eigen::MatrixXd& kernel = {}, int max_iter = 200,
                                            std::uint64_t seed = 7);

StateNormReport state_norm_check(const ProblemSpec& spec);
InclusionReport inclusion_check(const ProblemSpec& spec, int samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Suites

struct SuiteCheck {
  std::string name;
  bool passed = false;
  double value = 0;      // the measured quantity
  double threshold = 0;  // what it was compared against
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<SuiteCheck> checks;
  int indeterminate = 0;  // rank decisions too close to call; reported, not fatal

  bool passed() const;
};

const std::vector<std::string>& suite_names();
SuiteResult run_suite(const std::string& name, std::uint64_t seed = 42);

SuiteResult suite_constants(int instances, std::uint64_t seed);
SuiteResult suite_kernel(int instances, std::uint64_t seed);
SuiteResult suite_schur(std::uint64_t seed);
SuiteResult suite_brezzi(const std::vector<double>& alphas);
SuiteResult suite_inclusion(std::uint64_t seed);
SuiteResult suite_state_norm();

void write_suite_csv(const std::vector<SuiteResult>& results, std::ostream& out);
void write_suite_markdown(const std::vector<SuiteResult>& results, std::ostream& out);

}  // namespace msp
