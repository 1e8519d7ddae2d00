#pragma once

#include <Eigen/Cholesky>

#include <vector>

#include "msp/splines.hpp"

namespace msp {

/// kron(f[0], kron(f[1], ...)); index of (i_0, i_1, ...) is row-major with f[0] slowest.
SparseMatrix kron(const std::vector<SparseMatrix>& factors);

/// Sum of weighted Kronecker products of univariate factors (time, x, y).
class KroneckerMatrix {
 public:
  struct Term {
    double weight = 1.0;
    std::vector<SparseMatrix> factors;
  };

  KroneckerMatrix() = default;
  explicit KroneckerMatrix(std::vector<Term> terms);

  void add(double weight, std::vector<SparseMatrix> factors);
  const std::vector<Term>& terms() const { return terms_; }
  Index rows() const;
  Index cols() const;

  SparseMatrix materialize() const;

 private:
  std::vector<Term> terms_;
};

/// Inverse of a single Kronecker product of SPD factors, applied mode by mode.
class KroneckerSolver {
 public:
  KroneckerSolver() = default;
  explicit KroneckerSolver(const std::vector<SparseMatrix>& spd_factors);

  Index dim() const { return dim_; }
  Vector solve(const Vector& rhs) const;
  /// Solves in place on a contiguous block of length dim().
  void solve_in_place(double* data) const;

 private:
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors_;
  std::vector<Index> dims_;
  Index dim_ = 0;
};

}  // namespace msp
