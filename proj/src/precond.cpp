#include "msp/precond.hpp"

#include <cmath>

#include "msp/errors.hpp"

namespace msp {

namespace {

SparseMatrix outer(const Vector& v) {
  SparseMatrix col(v.size(), 1);
  for (Index i = 0; i < v.size(); ++i)
    if (v(i) != 0.0) col.insert(i, 0) = v(i);
  SparseMatrix out = col * SparseMatrix(col.transpose());
  out.makeCompressed();
  return out;
}

Vector restricted_endpoint(const Factor& f, int d) {
  const Vector full = endpoint_row(f.space, Endpoint::kLeft, d);
  Vector out(f.dim());
  for (Index i = 0; i < f.dim(); ++i) out(i) = full(f.dofs[i]);
  return out;
}

SparseMatrix symmetrized(const SparseMatrix& m) {
  SparseMatrix s = 0.5 * (m + SparseMatrix(m.transpose()));
  s.prune(0.0);
  s.makeCompressed();
  return s;
}

std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> factor_spd(const SparseMatrix& m, const std::string& name) {
  auto f = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(m);
  if (f->info() != Eigen::Success) throw DefinitenessError(name + ": sparse factorization failed");
  if (f->vectorD().minCoeff() <= 0.0) throw DefinitenessError(name + ": matrix is not positive definite");
  return f;
}

}  // namespace

SparseMatrix StateNormParts::assemble(double alpha) const {
  return symmetrized(observation + alpha * gram + traces);
}

StateNormParts state_norm_parts(const ProblemSpec& spec, const DiscreteSpaces& s, const SystemBlocks& blocks) {
  StateNormParts parts;
  parts.observation = blocks.observation;
  parts.gram = operator_gram(s, state_operator(spec.kind)).materialize();
  parts.traces = kron({outer(restricted_endpoint(s.state_t, 0)), r1_stiffness(s)});
  if (spec.kind == ProblemKind::kWave)
    parts.traces += kron({outer(restricted_endpoint(s.state_t, 1)), state_spatial_mass(s)});
  parts.traces.makeCompressed();
  return parts;
}

SparseMatrix assemble_P_Y(const ProblemSpec& spec, const DiscreteSpaces& spaces, const SystemBlocks& blocks) {
  return state_norm_parts(spec, spaces, blocks).assemble(spec.alpha);
}

// ---------------------------------------------------------------------------

BlockDiagPreconditioner::BlockDiagPreconditioner(double alpha, std::vector<Block> blocks)
    : alpha_(alpha), blocks_(std::move(blocks)) {
  offsets_ = {0};
  for (const auto& b : blocks_) {
    if (b.base.rows() != b.base.cols()) throw StructuralError("BlockDiagPreconditioner: block " + b.name);
    if (!(b.scale > 0)) throw DomainError("BlockDiagPreconditioner: nonpositive scale for " + b.name);
    offsets_.push_back(offsets_.back() + b.base.rows());
  }
}

Vector BlockDiagPreconditioner::apply_inverse(const Vector& r) const {
  if (r.size() != dim()) throw StructuralError("apply_inverse: vector has the wrong size");
  Vector z(r.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    const Index o = offsets_[i], n = offsets_[i + 1] - o;
    if (b.kind == Kind::kSparse) {
      z.segment(o, n) = b.sparse->solve(r.segment(o, n));
    } else {
      z.segment(o, n) = r.segment(o, n);
      b.kronecker->solve_in_place(z.data() + o);
    }
    z.segment(o, n) /= b.scale;
  }
  return z;
}

Vector BlockDiagPreconditioner::apply(const Vector& x) const {
  if (x.size() != dim()) throw StructuralError("apply: vector has the wrong size");
  Vector y(x.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Index o = offsets_[i], n = offsets_[i + 1] - o;
    y.segment(o, n) = blocks_[i].scale * (blocks_[i].base * x.segment(o, n));
  }
  return y;
}

SparseMatrix BlockDiagPreconditioner::block_matrix(std::size_t i) const {
  return blocks_.at(i).scale * blocks_.at(i).base;
}

SparseMatrix BlockDiagPreconditioner::materialize() const {
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    for (Index k = 0; k < b.base.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(b.base, k); it; ++it)
        trips.emplace_back(offsets_[i] + it.row(), offsets_[i] + it.col(), b.scale * it.value());
  }
  SparseMatrix out(dim(), dim());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

// ---------------------------------------------------------------------------

PreconditionerFactory::PreconditionerFactory(const ProblemSpec& spec, const DiscreteSpaces& spaces,
                                             const SystemBlocks& blocks)
    : kind_(spec.kind), parts_(state_norm_parts(spec, spaces, blocks)) {
  control_mass_ = blocks.control_mass;
  control_solver_ = std::make_shared<KroneckerSolver>(control_mass_factors(spaces));
  r1_stiffness_ = blocks.r1_stiffness;
  r1_solver_ = factor_spd(r1_stiffness_, "P_R1");
  if (kind_ == ProblemKind::kWave) {
    r2_mass_ = blocks.r2_mass;
    r2_solver_ = std::make_shared<KroneckerSolver>(r2_mass_factors(spaces));
  }
}

BlockDiagPreconditioner PreconditionerFactory::for_alpha(double alpha) const {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw DomainError("preconditioner: alpha must be positive");
  using B = BlockDiagPreconditioner;
  std::vector<B::Block> blocks;
  SparseMatrix py = parts_.assemble(alpha);
  auto py_solver = factor_spd(py, "P_Y");
  blocks.push_back({"P_Y", B::Kind::kSparse, 1.0, std::move(py), py_solver, nullptr});
  blocks.push_back({"alpha_P_U", B::Kind::kKronecker, alpha, control_mass_, nullptr, control_solver_});
  blocks.push_back({"inv_alpha_P_U", B::Kind::kKronecker, 1.0 / alpha, control_mass_, nullptr, control_solver_});
  blocks.push_back({"P_R1", B::Kind::kSparse, 1.0, r1_stiffness_, r1_solver_, nullptr});
  if (kind_ == ProblemKind::kWave)
    blocks.push_back({"P_R2", B::Kind::kKronecker, 1.0, r2_mass_, nullptr, r2_solver_});
  return B(alpha, std::move(blocks));
}

BlockDiagPreconditioner build_preconditioner(const ProblemSpec& spec, const DiscreteSpaces& spaces,
                                             const SystemBlocks& blocks) {
  return PreconditionerFactory(spec, spaces, blocks).for_alpha(spec.alpha);
}

Eigen::MatrixXd build_Ptilde_Y(const ProblemSpec& spec, const SystemBlocks& blocks, Index max_dim) {
  const Index ny = blocks.observation.rows();
  if (ny > max_dim)
    throw DomainError("build_Ptilde_Y: dim Y_h = " + std::to_string(ny) + " exceeds the cap " +
                      std::to_string(max_dim));
  if (!(spec.alpha >= 0)) throw DomainError("build_Ptilde_Y: alpha must be nonnegative");

  const auto dual_gram = [](const SparseMatrix& k, const SparseMatrix& gram, const char* name) {
    Eigen::SimplicialLLT<SparseMatrix> llt(gram);
    if (llt.info() != Eigen::Success) throw DefinitenessError(std::string("build_Ptilde_Y: ") + name);
    const Eigen::MatrixXd kd(k);
    const Eigen::MatrixXd sol = llt.solve(kd);
    return Eigen::MatrixXd(kd.transpose() * sol);
  };

  Eigen::MatrixXd p = Eigen::MatrixXd(blocks.observation);
  if (spec.alpha > 0) p += spec.alpha * dual_gram(blocks.k_u, blocks.control_mass, "M_U");
  p += dual_gram(blocks.k_r1, blocks.r1_stiffness, "S_R1");
  if (spec.kind == ProblemKind::kWave) p += dual_gram(blocks.k_r2, blocks.r2_mass, "M_R2");
  return 0.5 * (p + p.transpose());
}

}  // namespace msp
