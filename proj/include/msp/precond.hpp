#pragma once

#include <Eigen/SparseCholesky>

#include <memory>
#include <string>
#include <vector>

#include "msp/assembly.hpp"

namespace msp {

/// alpha-independent pieces of the state block, kept so that sweeps over
/// alpha only refactor P_Y = base + alpha * gram.
struct StateNormParts {
  SparseMatrix observation;  // M_{q_T}
  SparseMatrix gram;         // (L y, L z)_{L2(Q_T)}
  SparseMatrix traces;       // initial displacement (H10) and velocity (L2) terms

  SparseMatrix assemble(double alpha) const;
};

StateNormParts state_norm_parts(const ProblemSpec& spec, const DiscreteSpaces& spaces, const SystemBlocks& blocks);

/// diag(P_Y, alpha P_U, alpha^{-1} P_U, P_R1[, P_R2]) with an inverse application.
class BlockDiagPreconditioner {
 public:
  enum class Kind { kSparse, kKronecker };
  struct Block {
    std::string name;
    Kind kind;
    double scale;         // block = scale * base
    SparseMatrix base;    // materialized for apply() and export
    std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> sparse;
    std::shared_ptr<const KroneckerSolver> kronecker;
  };

  BlockDiagPreconditioner(double alpha, std::vector<Block> blocks);

  double alpha() const { return alpha_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Index>& offsets() const { return offsets_; }
  Index dim() const { return offsets_.back(); }

  Vector apply_inverse(const Vector& r) const;
  Vector apply(const Vector& x) const;
  /// The scaled block i as a sparse matrix.
  SparseMatrix block_matrix(std::size_t i) const;
  SparseMatrix materialize() const;

 private:
  double alpha_;
  std::vector<Block> blocks_;
  std::vector<Index> offsets_;
};

/// Caches every alpha-independent factorization; for_alpha() only refactors P_Y.
class PreconditionerFactory {
 public:
  PreconditionerFactory(const ProblemSpec& spec, const DiscreteSpaces& spaces, const SystemBlocks& blocks);

  BlockDiagPreconditioner for_alpha(double alpha) const;
  const StateNormParts& state_parts() const { return parts_; }

 private:
  ProblemKind kind_;
  StateNormParts parts_;
  SparseMatrix control_mass_, r1_stiffness_, r2_mass_;
  std::shared_ptr<const KroneckerSolver> control_solver_, r2_solver_;
  std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> r1_solver_;
};

BlockDiagPreconditioner build_preconditioner(const ProblemSpec& spec, const DiscreteSpaces& spaces,
                                             const SystemBlocks& blocks);

/// P_Y assembled directly from the bilinear form.
SparseMatrix assemble_P_Y(const ProblemSpec& spec, const DiscreteSpaces& spaces, const SystemBlocks& blocks);

/// M_q + alpha K_U^T M_U^{-1} K_U + K_R1^T S^{-1} K_R1 + K_R2^T M_R2^{-1} K_R2, densely.
Eigen::MatrixXd build_Ptilde_Y(const ProblemSpec& spec, const SystemBlocks& blocks, Index max_dim = 200);

}  // namespace msp
