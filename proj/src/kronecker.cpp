#include "msp/kronecker.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include "msp/errors.hpp"

namespace msp {

SparseMatrix kron(const std::vector<SparseMatrix>& factors) {
  if (factors.empty()) throw StructuralError("kron: no factors");
  SparseMatrix out = factors.back();
  for (auto it = factors.rbegin() + 1; it != factors.rend(); ++it) {
    SparseMatrix next = Eigen::kroneckerProduct(*it, out);
    out = std::move(next);
  }
  out.makeCompressed();
  return out;
}

KroneckerMatrix::KroneckerMatrix(std::vector<Term> terms) {
  for (auto& t : terms) add(t.weight, std::move(t.factors));
}

void KroneckerMatrix::add(double weight, std::vector<SparseMatrix> factors) {
  if (factors.empty()) throw StructuralError("KroneckerMatrix: term without factors");
  if (!terms_.empty()) {
    const auto& ref = terms_.front().factors;
    if (ref.size() != factors.size()) throw StructuralError("KroneckerMatrix: terms differ in factor count");
    for (std::size_t i = 0; i < ref.size(); ++i)
      if (ref[i].rows() != factors[i].rows() || ref[i].cols() != factors[i].cols())
        throw StructuralError("KroneckerMatrix: terms differ in factor shape");
  }
  terms_.push_back({weight, std::move(factors)});
}

Index KroneckerMatrix::rows() const {
  if (terms_.empty()) return 0;
  Index r = 1;
  for (const auto& f : terms_.front().factors) r *= f.rows();
  return r;
}

Index KroneckerMatrix::cols() const {
  if (terms_.empty()) return 0;
  Index c = 1;
  for (const auto& f : terms_.front().factors) c *= f.cols();
  return c;
}

SparseMatrix KroneckerMatrix::materialize() const {
  SparseMatrix out(rows(), cols());
  for (const auto& t : terms_) {
    SparseMatrix k = kron(t.factors);
    out += t.weight * k;
  }
  out.prune(0.0);
  out.makeCompressed();
  return out;
}

KroneckerSolver::KroneckerSolver(const std::vector<SparseMatrix>& spd_factors) {
  if (spd_factors.empty()) throw StructuralError("KroneckerSolver: no factors");
  dim_ = 1;
  for (const auto& f : spd_factors) {
    if (f.rows() != f.cols()) throw StructuralError("KroneckerSolver: factors must be square");
    Eigen::MatrixXd dense(f);
    Eigen::LLT<Eigen::MatrixXd> llt(dense);
    if (llt.info() != Eigen::Success) throw DefinitenessError("KroneckerSolver: factor is not SPD");
    factors_.push_back(std::move(llt));
    dims_.push_back(f.rows());
    dim_ *= f.rows();
  }
}

void KroneckerSolver::solve_in_place(double* data) const {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  for (std::size_t m = 0; m < factors_.size(); ++m) {
    Index left = 1, right = 1;
    for (std::size_t i = 0; i < m; ++i) left *= dims_[i];
    for (std::size_t i = m + 1; i < dims_.size(); ++i) right *= dims_[i];
    const Index n = dims_[m];
    for (Index l = 0; l < left; ++l) {
      Eigen::Map<RowMajor> slab(data + l * n * right, n, right);
      factors_[m].solveInPlace(slab);
    }
  }
}

Vector KroneckerSolver::solve(const Vector& rhs) const {
  if (rhs.size() != dim_) throw StructuralError("KroneckerSolver: right-hand side has the wrong size");
  Vector x = rhs;
  solve_in_place(x.data());
  return x;
}

}  // namespace msp
