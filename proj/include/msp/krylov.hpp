#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace msp {

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct MinresConfig {
  double rel_tol = 1e-8;
  int max_iter = 2000;
  std::uint64_t seed = 42;
  /// True residuals are also recorded every this many iterations (0 = never).
  int check_true_residual_every = 50;
  bool check_symmetry = true;
};

struct MinresReport {
  int iterations = 0;
  bool converged = false;
  /// |eta_j| / |eta_0|, the recurrence estimate of the P^{-1}-norm residual; entry 0 is 1.
  std::vector<double> residual_history;
  /// (iteration, ||b - A x_j|| / ||b - A x_0||) wherever the true residual was computed.
  std::vector<std::pair<int, double>> true_residuals;
  double initial_residual = 0.0;  // Euclidean norm of b - A x0
  double final_true_relres = 0.0;
  double runtime_ms = 0.0;
};

struct MinresResult {
  MinresReport report;
  Eigen::VectorXd x;
};

/// Preconditioned MINRES. Stops once the recurrence estimate has dropped by rel_tol and
/// the Euclidean residual ||b - A x|| has dropped by rel_tol relative to ||b - A x0||.
MinresResult minres(const LinearOperator& apply_A, const LinearOperator& apply_Pinv, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& x0, const MinresConfig& config = {});

/// Name of the generator behind random_start; bumped whenever its output changes.
inline constexpr const char* kRandomStartGenerator = "mt19937_64/v1";

/// Entries uniform in [-1, 1], reproducible for a given seed across platforms.
Eigen::VectorXd random_start(Eigen::Index dim, std::uint64_t seed);

/// CSV with header iteration,estimate,true_residual (empty when not computed).
void write_residual_csv(const MinresReport& report, std::ostream& out);

}  // namespace msp
