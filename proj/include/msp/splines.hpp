#pragma once

// Univariate spline spaces S_{p,l,k}(a,b): degree p, 2^l uniform elements,
// C^k continuity at interior knots (k = -1: discontinuous), open knot vector.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <optional>
#include <utility>
#include <vector>

namespace msp {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class SplineSpace {
 public:
  SplineSpace(int degree, int level, int continuity, double a, double b);

  int degree() const { return p_; }
  int level() const { return level_; }
  int continuity() const { return k_; }
  double a() const { return a_; }
  double b() const { return b_; }
  int elements() const { return 1 << level_; }
  double mesh_size() const { return (b_ - a_) / elements(); }
  /// Multiplicity of interior knots, p - k.
  int interior_multiplicity() const { return p_ - k_; }
  Index dim() const { return static_cast<Index>(knots_.size()) - p_ - 1; }
  const std::vector<double>& knots() const { return knots_; }

  double element_left(int e) const;
  double element_right(int e) const;
  /// Element containing x: right-continuous at interior knots, the last element at b.
  int element_of(double x) const;
  /// Index of the first basis function supported on element e.
  Index first_basis(int e) const { return static_cast<Index>(e) * interior_multiplicity(); }

  /// Derivatives 0..d of the p+1 basis functions alive on element e, at x.
  /// Row j holds the j-th derivative; column i belongs to first_basis(e) + i.
  Eigen::MatrixXd local_derivatives(int e, double x, int d) const;

  /// Same interval, degree-independent mesh.
  bool same_mesh(const SplineSpace& other) const;

 private:
  int p_;
  int level_;
  int k_;
  double a_;
  double b_;
  std::vector<double> knots_;
};

SplineSpace make_space(int degree, int level, int continuity, double a, double b);

/// d-th derivative of every basis function at x (dense, length dim).
Vector eval_basis(const SplineSpace& space, double x, int d);

enum class Endpoint { kLeft, kRight };

/// d-th derivative of the basis at a or b, taken from inside the interval.
Vector endpoint_row(const SplineSpace& space, Endpoint endpoint, int d);

/// Basis indices that vanish at both endpoints: all but the first and last.
std::vector<Index> h10_restriction(const SplineSpace& space);

/// Gauss-Legendre rule with n points on [-1, 1].
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

/// Per-element quadrature with n points per element, optionally clipped to (c, d).
struct QuadratureRule {
  struct Point {
    int element;
    double x;
    double w;
  };
  std::vector<Point> points;
};
QuadratureRule element_quadrature(const SplineSpace& space, int n,
                                  std::optional<std::pair<double, double>> clip = std::nullopt);

/// Matrix of integrals  entry(a, i) = int D^{d_row} sigma_a  D^{d_col} phi_i,
/// sigma_a from row_space, phi_i from col_space.
struct UnivariateMatrix {
  SparseMatrix entries;
  int d_row = 0;
  int d_col = 0;
};

UnivariateMatrix univariate_matrix(const SplineSpace& row_space, const SplineSpace& col_space, int d_row,
                                   int d_col);
UnivariateMatrix univariate_matrix_clipped(const SplineSpace& row_space, const SplineSpace& col_space, int d_row,
                                           int d_col, std::pair<double, double> sub);

/// Rows/columns of m kept at the given indices (in order).
SparseMatrix restrict_matrix(const SparseMatrix& m, const std::vector<Index>& rows, const std::vector<Index>& cols);

}  // namespace msp
