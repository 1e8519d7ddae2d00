#include "msp/splines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msp/errors.hpp"

namespace msp {

SplineSpace::SplineSpace(int degree, int level, int continuity, double a, double b)
    : p_(degree), level_(level), k_(continuity), a_(a), b_(b) {
  if (p_ < 0) throw DomainError("SplineSpace: degree must be >= 0");
  if (level_ < 0 || level_ > 24) throw DomainError("SplineSpace: level must be in [0, 24]");
  if (k_ < -1 || k_ > p_ - 1)
    throw DomainError("SplineSpace: continuity must satisfy -1 <= k <= p-1 (got k=" + std::to_string(k_) +
                      ", p=" + std::to_string(p_) + ")");
  if (!(a_ < b_)) throw DomainError("SplineSpace: need a < b");

  const int nel = elements();
  const int mult = p_ - k_;
  knots_.reserve(2 * (p_ + 1) + (nel - 1) * mult);
  knots_.insert(knots_.end(), p_ + 1, a_);
  for (int j = 1; j < nel; ++j) knots_.insert(knots_.end(), mult, element_left(j));
  knots_.insert(knots_.end(), p_ + 1, b_);
}

double SplineSpace::element_left(int e) const {
  // Exact at dyadic fractions of [a, b].
  return a_ + (b_ - a_) * (static_cast<double>(e) / elements());
}

double SplineSpace::element_right(int e) const { return e + 1 == elements() ? b_ : element_left(e + 1); }

int SplineSpace::element_of(double x) const {
  if (x < a_ || x > b_) throw DomainError("SplineSpace: point outside [a, b]");
  const int nel = elements();
  int e = static_cast<int>(std::floor((x - a_) / (b_ - a_) * nel));
  e = std::clamp(e, 0, nel - 1);
  // Guard against rounding in the division: respect the exact knot values.
  while (e + 1 < nel && x >= element_left(e + 1)) ++e;
  while (e > 0 && x < element_left(e)) --e;
  return e;
}

bool SplineSpace::same_mesh(const SplineSpace& other) const {
  return a_ == other.a_ && b_ == other.b_ && level_ == other.level_;
}

Eigen::MatrixXd SplineSpace::local_derivatives(int e, double x, int d) const {
  // Cox-de Boor triangle with derivatives (Piegl & Tiller, A2.3).
  const int p = p_;
  const auto& u = knots_;
  const int span = p + e * interior_multiplicity();
  Eigen::MatrixXd ndu(p + 1, p + 1);
  std::vector<double> left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - u[span + 1 - j];
    right[j] = u[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }

  Eigen::MatrixXd ders = Eigen::MatrixXd::Zero(d + 1, p + 1);
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);
  const int dmax = std::min(d, p);
  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a.setZero();
    a(0, 0) = 1.0;
    for (int k = 1; k <= dmax; ++k) {
      double acc = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        acc = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        acc += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        acc += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = acc;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= dmax; ++k) {
    ders.row(k) *= factor;
    factor *= (p - k);
  }
  return ders;
}

SplineSpace make_space(int degree, int level, int continuity, double a, double b) {
  return SplineSpace(degree, level, continuity, a, b);
}

Vector eval_basis(const SplineSpace& space, double x, int d) {
  if (d < 0 || d > space.degree()) throw DomainError("eval_basis: derivative order must be in [0, p]");
  const int e = space.element_of(x);
  const auto local = space.local_derivatives(e, x, d);
  Vector out = Vector::Zero(space.dim());
  const Index first = space.first_basis(e);
  for (int i = 0; i <= space.degree(); ++i) out(first + i) = local(d, i);
  return out;
}

Vector endpoint_row(const SplineSpace& space, Endpoint endpoint, int d) {
  if (d < 0 || d > space.degree()) throw DomainError("endpoint_row: derivative order must be in [0, p]");
  const int e = endpoint == Endpoint::kLeft ? 0 : space.elements() - 1;
  const double x = endpoint == Endpoint::kLeft ? space.a() : space.b();
  const auto local = space.local_derivatives(e, x, d);
  Vector out = Vector::Zero(space.dim());
  const Index first = space.first_basis(e);
  for (int i = 0; i <= space.degree(); ++i) out(first + i) = local(d, i);
  return out;
}

std::vector<Index> h10_restriction(const SplineSpace& space) {
  if (space.continuity() < 0) throw DomainError("h10_restriction: discontinuous splines have no trace");
  std::vector<Index> idx;
  for (Index i = 1; i + 1 < space.dim(); ++i) idx.push_back(i);
  return idx;
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one point");
  GaussRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = -x;
    rule.points[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.0;
  return rule;
}

QuadratureRule element_quadrature(const SplineSpace& space, int n, std::optional<std::pair<double, double>> clip) {
  const auto ref = gauss_legendre(n);
  QuadratureRule q;
  for (int e = 0; e < space.elements(); ++e) {
    double lo = space.element_left(e);
    double hi = space.element_right(e);
    if (clip) {
      lo = std::max(lo, clip->first);
      hi = std::min(hi, clip->second);
      if (!(hi > lo)) continue;
    }
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (int i = 0; i < n; ++i) q.points.push_back({e, mid + half * ref.points[i], half * ref.weights[i]});
  }
  return q;
}

namespace {

UnivariateMatrix assemble_univariate(const SplineSpace& row, const SplineSpace& col, int d_row, int d_col,
                                     std::optional<std::pair<double, double>> clip) {
  if (!row.same_mesh(col)) throw DomainError("univariate_matrix: spaces must share interval and mesh");
  if (d_row < 0 || d_row > row.degree() || d_col < 0 || d_col > col.degree())
    throw DomainError("univariate_matrix: derivative order must be in [0, p]");
  const int n = std::max(row.degree(), col.degree()) + 1;
  const auto quad = element_quadrature(row, n, clip);

  // Dense per-element accumulation in a fixed order, then compression.
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(row.dim(), col.dim());
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> touched =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(row.dim(), col.dim(), false);
  for (const auto& qp : quad.points) {
    const auto vr = row.local_derivatives(qp.element, qp.x, d_row);
    const auto vc = col.local_derivatives(qp.element, qp.x, d_col);
    const Index r0 = row.first_basis(qp.element);
    const Index c0 = col.first_basis(qp.element);
    for (int i = 0; i <= row.degree(); ++i)
      for (int j = 0; j <= col.degree(); ++j) {
        dense(r0 + i, c0 + j) += qp.w * (vr(d_row, i) * vc(d_col, j));
        touched(r0 + i, c0 + j) = true;
      }
  }
  std::vector<Eigen::Triplet<double>> trips;
  for (Index j = 0; j < col.dim(); ++j)
    for (Index i = 0; i < row.dim(); ++i)
      if (touched(i, j) && dense(i, j) != 0.0) trips.emplace_back(i, j, dense(i, j));
  UnivariateMatrix m;
  m.entries.resize(row.dim(), col.dim());
  m.entries.setFromTriplets(trips.begin(), trips.end());
  m.d_row = d_row;
  m.d_col = d_col;
  return m;
}

}  // namespace

UnivariateMatrix univariate_matrix(const SplineSpace& row_space, const SplineSpace& col_space, int d_row,
                                   int d_col) {
  return assemble_univariate(row_space, col_space, d_row, d_col, std::nullopt);
}

UnivariateMatrix univariate_matrix_clipped(const SplineSpace& row_space, const SplineSpace& col_space, int d_row,
                                           int d_col, std::pair<double, double> sub) {
  if (sub.first < row_space.a() || sub.second > row_space.b() || sub.first > sub.second)
    throw DomainError("univariate_matrix_clipped: sub-interval must lie inside (a, b)");
  return assemble_univariate(row_space, col_space, d_row, d_col, sub);
}

SparseMatrix restrict_matrix(const SparseMatrix& m, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  std::vector<Index> row_map(m.rows(), -1), col_map(m.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= m.rows()) throw StructuralError("restrict_matrix: row index out of range");
    row_map[rows[i]] = static_cast<Index>(i);
  }
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= m.cols()) throw StructuralError("restrict_matrix: column index out of range");
    col_map[cols[j]] = static_cast<Index>(j);
  }
  std::vector<Eigen::Triplet<double>> trips;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (row_map[it.row()] >= 0 && col_map[it.col()] >= 0)
        trips.emplace_back(row_map[it.row()], col_map[it.col()], it.value());
  SparseMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace msp
