#pragma once

// Space-time tensor-product spline discretization of the optimality systems
// for tracking-type optimal control of the wave equation
//
//   [ M_q    0     K_U^T  K_R1^T  K_R2^T ] [ y    ]   [ d   ]
//   [ 0      aM_U  M_U    0       0      ] [ u    ]   [ 0   ]
//   [ K_U    M_U   0      0       0      ] [ p_U  ] = [ g_U ]
//   [ K_R1   0     0      0       0      ] [ p_R1 ]   [ y_0 ]
//   [ K_R2   0     0      0       0      ] [ p_R2 ]   [ y_1 ]
//
// and of the heat equation (no p_R2 block). All operators are Kronecker sums
// of univariate spline matrices with index order (time, x, y), time slowest.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "msp/kronecker.hpp"
#include "msp/splines.hpp"

namespace msp {

enum class ProblemKind { kHeat, kWave };

std::string to_string(ProblemKind kind);
ProblemKind parse_problem_kind(const std::string& name);

struct Box {
  double x0 = 0.25, x1 = 0.75;
  double y0 = 0.25, y1 = 0.75;
};

struct ProblemSpec {
  ProblemKind kind = ProblemKind::kWave;
  int degree = 2;
  int level = 2;
  double alpha = 1.0;
  double final_time = 1.0;
  Box observation{};  // omega inside the unit square
  std::uint64_t seed = 42;
  /// Overrides the continuity p-3 of the control space (counterexamples only).
  std::optional<int> control_continuity;
};

void validate(const ProblemSpec& spec);

/// A univariate spline space together with the basis functions kept.
struct Factor {
  SplineSpace space;
  std::vector<Index> dofs;

  Index dim() const { return static_cast<Index>(dofs.size()); }
  static Factor full(SplineSpace s);
  static Factor h10(SplineSpace s);
};

/// Tensor product of univariate factors with (first factor slowest) ordering.
class TensorBasis {
 public:
  explicit TensorBasis(std::vector<Factor> factors);

  Index dim() const { return dim_; }
  const std::vector<Factor>& factors() const { return factors_; }

  /// Value of the derivative D^{derivs} of sum_i coeffs_i B_i at the point.
  double evaluate(const Vector& coeffs, const std::vector<double>& point, const std::vector<int>& derivs) const;

  /// Load vector int f B_i over the box (clip per direction, nullopt = whole interval).
  Vector load_vector(const std::function<double(const std::vector<double>&)>& f,
                     const std::vector<std::optional<std::pair<double, double>>>& clip, int points) const;

 private:
  std::vector<Factor> factors_;
  std::vector<std::vector<Index>> global_of_local_;  // full basis index -> kept index (or -1)
  Index dim_ = 1;
};

struct DiscreteSpaces {
  ProblemKind kind = ProblemKind::kWave;
  Factor state_t, state_x, state_y;        // Y_h; the spatial pair is also R1_h
  Factor control_t, control_x, control_y;  // U_h
  Factor r2_x, r2_y;                       // R2_h (wave only)

  Index dim_y() const { return state_t.dim() * state_x.dim() * state_y.dim(); }
  Index dim_u() const { return control_t.dim() * control_x.dim() * control_y.dim(); }
  Index dim_r1() const { return state_x.dim() * state_y.dim(); }
  Index dim_r2() const { return kind == ProblemKind::kWave ? r2_x.dim() * r2_y.dim() : 0; }

  TensorBasis state_basis() const;
  TensorBasis control_basis() const;
  TensorBasis r1_basis() const;
  TensorBasis r2_basis() const;
};

DiscreteSpaces build_spaces(const ProblemSpec& spec);
Index dof_count(const ProblemSpec& spec);

/// One term c * D_t^{dt} D_x^{dx} D_y^{dy} of a constant-coefficient differential operator.
struct DiffTerm {
  double coeff;
  int dt, dx, dy;
};
/// d_tt - Laplace (wave) or d_t - Laplace (heat).
std::vector<DiffTerm> state_operator(ProblemKind kind);

/// entry(a, i) = int D^{d_row} row_a D^{d_col} col_i (optionally clipped), on the kept indices.
SparseMatrix factor_matrix(const Factor& row, const Factor& col, int d_row, int d_col,
                           std::optional<std::pair<double, double>> clip = std::nullopt);

/// Kronecker expansion of  (L y, L z)_{L2(Q_T)}  on Y_h for the given operator terms.
KroneckerMatrix operator_gram(const DiscreteSpaces& spaces, const std::vector<DiffTerm>& terms);

SparseMatrix assemble_K_U(const ProblemSpec& spec, const DiscreteSpaces& spaces);
SparseMatrix assemble_K_R1(const ProblemSpec& spec, const DiscreteSpaces& spaces);
SparseMatrix assemble_K_R2(const ProblemSpec& spec, const DiscreteSpaces& spaces);
SparseMatrix assemble_observation(const ProblemSpec& spec, const DiscreteSpaces& spaces);

/// 2-D stiffness (grad, grad) on R1_h, 2-D mass on the state spatial space, and on R2_h.
SparseMatrix r1_stiffness(const DiscreteSpaces& spaces);
SparseMatrix state_spatial_mass(const DiscreteSpaces& spaces);
std::vector<SparseMatrix> r2_mass_factors(const DiscreteSpaces& spaces);
std::vector<SparseMatrix> control_mass_factors(const DiscreteSpaces& spaces);

/// Data of the state equation and the tracking functional; empty = zero.
struct ProblemData {
  std::function<double(double, double, double)> d;         // target on q_T
  std::function<double(double, double)> y0;               // initial displacement
  std::function<std::array<double, 2>(double, double)> y0_grad;  // its gradient (H10 pairing)
  std::function<double(double, double)> y1;               // initial velocity (wave)
  std::function<double(double, double, double)> g_u;      // forcing of the differential part
};

struct ProjectedData {
  Vector d_load, d_coeffs;    // Y_h: int_{q_T} d y_i and the L2(Q_T) projection of d 1_{q_T}
  Vector g_load, g_coeffs;    // U_h
  Vector y0_load, y0_coeffs;  // R1_h, H10 pairing / projection
  Vector y1_load, y1_coeffs;  // R2_h, L2 pairing / projection
};

ProjectedData project_data(const ProblemSpec& spec, const DiscreteSpaces& spaces, const ProblemData& data);

struct SystemBlocks {
  SparseMatrix observation;   // M_{q_T,h} on Y_h
  SparseMatrix control_mass;  // M_{Q_T,h} on U_h
  SparseMatrix k_u;           // U_h x Y_h
  SparseMatrix k_r1;          // R1_h x Y_h
  SparseMatrix k_r2;          // R2_h x Y_h (wave)
  SparseMatrix r1_stiffness;  // on R1_h
  SparseMatrix r2_mass;       // on R2_h (wave)
};

SystemBlocks assemble_blocks(const ProblemSpec& spec, const DiscreteSpaces& spaces);

struct DiscreteSystem {
  ProblemKind kind = ProblemKind::kWave;
  double alpha = 1.0;
  std::vector<std::string> block_names;
  std::vector<Index> block_sizes;
  std::vector<Index> offsets;  // size = blocks + 1
  SparseMatrix matrix;
  Vector rhs;
  SystemBlocks blocks;

  Index dim() const { return offsets.back(); }
};

DiscreteSystem assemble_system(const ProblemSpec& spec, const DiscreteSpaces& spaces, const SystemBlocks& blocks,
                               const ProjectedData& data);
/// Homogeneous data convenience overload.
DiscreteSystem assemble_system(const ProblemSpec& spec, const DiscreteSpaces& spaces);

/// Rough peak memory of a single solve (system, factors, Krylov vectors).
double estimate_memory_bytes(const ProblemSpec& spec);

}  // namespace msp
