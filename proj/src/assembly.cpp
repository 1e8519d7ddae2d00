#include "msp/assembly.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>

#include "msp/errors.hpp"

namespace msp {

std::string to_string(ProblemKind kind) { return kind == ProblemKind::kWave ? "wave" : "heat"; }

ProblemKind parse_problem_kind(const std::string& name) {
  if (name == "wave") return ProblemKind::kWave;
  if (name == "heat") return ProblemKind::kHeat;
  throw ConfigError("unknown problem '" + name + "' (expected heat or wave)");
}

void validate(const ProblemSpec& spec) {
  if (spec.degree < 2) throw DomainError("ProblemSpec: degree must be >= 2");
  if (spec.level < 0) throw DomainError("ProblemSpec: level must be >= 0");
  if (!(spec.alpha > 0)) throw DomainError("ProblemSpec: alpha must be positive");
  if (!(spec.final_time > 0)) throw DomainError("ProblemSpec: final time must be positive");
  const auto& w = spec.observation;
  if (!(0 <= w.x0 && w.x0 < w.x1 && w.x1 <= 1 && 0 <= w.y0 && w.y0 < w.y1 && w.y1 <= 1))
    throw DomainError("ProblemSpec: observation box must be a non-empty box inside (0,1)^2");
}

Factor Factor::full(SplineSpace s) {
  std::vector<Index> idx(s.dim());
  for (Index i = 0; i < s.dim(); ++i) idx[i] = i;
  return {std::move(s), std::move(idx)};
}

Factor Factor::h10(SplineSpace s) {
  auto idx = h10_restriction(s);
  return {std::move(s), std::move(idx)};
}

// ---------------------------------------------------------------------------

TensorBasis::TensorBasis(std::vector<Factor> factors) : factors_(std::move(factors)) {
  for (const auto& f : factors_) {
    std::vector<Index> map(f.space.dim(), -1);
    for (std::size_t i = 0; i < f.dofs.size(); ++i) map[f.dofs[i]] = static_cast<Index>(i);
    global_of_local_.push_back(std::move(map));
    dim_ *= f.dim();
  }
}

namespace {

struct LocalValues {
  Index first;
  Eigen::VectorXd values;  // p + 1 entries
};

LocalValues local_values(const SplineSpace& s, int element, double x, int d) {
  const auto der = s.local_derivatives(element, x, d);
  return {s.first_basis(element), der.row(d).transpose()};
}

/// Calls body(multi_index) for every multi-index of the given extents.
template <typename Body>
void for_each_multi_index(const std::vector<Index>& extents, Body&& body) {
  std::vector<Index> idx(extents.size(), 0);
  for (auto e : extents)
    if (e == 0) return;
  while (true) {
    body(idx);
    int k = static_cast<int>(idx.size()) - 1;
    while (k >= 0 && ++idx[k] == extents[k]) idx[k--] = 0;
    if (k < 0) return;
  }
}

}  // namespace

double TensorBasis::evaluate(const Vector& coeffs, const std::vector<double>& point,
                             const std::vector<int>& derivs) const {
  const std::size_t nf = factors_.size();
  if (point.size() != nf || derivs.size() != nf) throw StructuralError("TensorBasis::evaluate: wrong arity");
  if (coeffs.size() != dim_) throw StructuralError("TensorBasis::evaluate: coefficient vector has the wrong size");
  std::vector<LocalValues> loc;
  std::vector<Index> extents;
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& s = factors_[f].space;
    if (derivs[f] < 0 || derivs[f] > s.degree()) throw DomainError("TensorBasis::evaluate: derivative order");
    loc.push_back(local_values(s, s.element_of(point[f]), point[f], derivs[f]));
    extents.push_back(s.degree() + 1);
  }
  double sum = 0.0;
  for_each_multi_index(extents, [&](const std::vector<Index>& li) {
    Index g = 0;
    double v = 1.0;
    for (std::size_t f = 0; f < nf; ++f) {
      const Index kept = global_of_local_[f][loc[f].first + li[f]];
      if (kept < 0) return;
      g = g * factors_[f].dim() + kept;
      v *= loc[f].values(li[f]);
    }
    sum += coeffs(g) * v;
  });
  return sum;
}

Vector TensorBasis::load_vector(const std::function<double(const std::vector<double>&)>& fn,
                                const std::vector<std::optional<std::pair<double, double>>>& clip,
                                int points) const {
  const std::size_t nf = factors_.size();
  if (clip.size() != nf) throw StructuralError("TensorBasis::load_vector: wrong clip arity");
  std::vector<std::vector<double>> xs(nf), ws(nf);
  std::vector<std::vector<LocalValues>> vals(nf);
  std::vector<Index> extents;
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& s = factors_[f].space;
    const auto q = element_quadrature(s, points, clip[f]);
    for (const auto& qp : q.points) {
      xs[f].push_back(qp.x);
      ws[f].push_back(qp.w);
      vals[f].push_back(local_values(s, qp.element, qp.x, 0));
    }
    extents.push_back(static_cast<Index>(q.points.size()));
  }
  std::vector<Index> basis_extents;
  for (const auto& f : factors_) basis_extents.push_back(f.space.degree() + 1);

  Vector load = Vector::Zero(dim_);
  std::vector<double> pt(nf);
  for_each_multi_index(extents, [&](const std::vector<Index>& qi) {
    double w = 1.0;
    for (std::size_t f = 0; f < nf; ++f) {
      pt[f] = xs[f][qi[f]];
      w *= ws[f][qi[f]];
    }
    const double fw = fn(pt) * w;
    if (fw == 0.0) return;
    for_each_multi_index(basis_extents, [&](const std::vector<Index>& li) {
      Index g = 0;
      double v = fw;
      for (std::size_t f = 0; f < nf; ++f) {
        const auto& lv = vals[f][qi[f]];
        const Index kept = global_of_local_[f][lv.first + li[f]];
        if (kept < 0) return;
        g = g * factors_[f].dim() + kept;
        v *= lv.values(li[f]);
      }
      load(g) += v;
    });
  });
  return load;
}

TensorBasis DiscreteSpaces::state_basis() const { return TensorBasis({state_t, state_x, state_y}); }
TensorBasis DiscreteSpaces::control_basis() const { return TensorBasis({control_t, control_x, control_y}); }
TensorBasis DiscreteSpaces::r1_basis() const { return TensorBasis({state_x, state_y}); }
TensorBasis DiscreteSpaces::r2_basis() const {
  if (kind != ProblemKind::kWave) throw DomainError("r2_basis: the heat problem has no R2 space");
  return TensorBasis({r2_x, r2_y});
}

// ---------------------------------------------------------------------------

DiscreteSpaces build_spaces(const ProblemSpec& spec) {
  validate(spec);
  const int p = spec.degree;
  const int l = spec.level;
  const int kc = spec.control_continuity.value_or(p - 3);
  DiscreteSpaces s{
      spec.kind,
      Factor::full(make_space(p, l, p - 1, 0.0, spec.final_time)),
      Factor::h10(make_space(p, l, p - 1, 0.0, 1.0)),
      Factor::h10(make_space(p, l, p - 1, 0.0, 1.0)),
      Factor::full(make_space(p, l, kc, 0.0, spec.final_time)),
      Factor::full(make_space(p, l, kc, 0.0, 1.0)),
      Factor::full(make_space(p, l, kc, 0.0, 1.0)),
      Factor::full(make_space(p, l, p - 1, 0.0, 1.0)),
      Factor::full(make_space(p, l, p - 1, 0.0, 1.0)),
  };
  return s;
}

Index dof_count(const ProblemSpec& spec) {
  const auto s = build_spaces(spec);
  return s.dim_y() + 2 * s.dim_u() + s.dim_r1() + s.dim_r2();
}

std::vector<DiffTerm> state_operator(ProblemKind kind) {
  const int dt = kind == ProblemKind::kWave ? 2 : 1;
  return {{1.0, dt, 0, 0}, {-1.0, 0, 2, 0}, {-1.0, 0, 0, 2}};
}

SparseMatrix factor_matrix(const Factor& row, const Factor& col, int d_row, int d_col,
                           std::optional<std::pair<double, double>> clip) {
  const auto m = clip ? univariate_matrix_clipped(row.space, col.space, d_row, d_col, *clip)
                      : univariate_matrix(row.space, col.space, d_row, d_col);
  return restrict_matrix(m.entries, row.dofs, col.dofs);
}

KroneckerMatrix operator_gram(const DiscreteSpaces& s, const std::vector<DiffTerm>& terms) {
  KroneckerMatrix g;
  for (const auto& test : terms)
    for (const auto& trial : terms)
      g.add(test.coeff * trial.coeff, {factor_matrix(s.state_t, s.state_t, test.dt, trial.dt),
                                       factor_matrix(s.state_x, s.state_x, test.dx, trial.dx),
                                       factor_matrix(s.state_y, s.state_y, test.dy, trial.dy)});
  return g;
}

SparseMatrix assemble_K_U(const ProblemSpec& spec, const DiscreteSpaces& s) {
  KroneckerMatrix k;
  for (const auto& t : state_operator(spec.kind))
    k.add(t.coeff, {factor_matrix(s.control_t, s.state_t, 0, t.dt), factor_matrix(s.control_x, s.state_x, 0, t.dx),
                    factor_matrix(s.control_y, s.state_y, 0, t.dy)});
  return k.materialize();
}

namespace {

SparseMatrix row_vector(const Vector& v) {
  SparseMatrix r(1, v.size());
  for (Index i = 0; i < v.size(); ++i)
    if (v(i) != 0.0) r.insert(0, i) = v(i);
  r.makeCompressed();
  return r;
}

Vector restrict_vector(const Vector& v, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = v(idx[i]);
  return out;
}

}  // namespace

SparseMatrix r1_stiffness(const DiscreteSpaces& s) {
  KroneckerMatrix k;
  k.add(1.0, {factor_matrix(s.state_x, s.state_x, 1, 1), factor_matrix(s.state_y, s.state_y, 0, 0)});
  k.add(1.0, {factor_matrix(s.state_x, s.state_x, 0, 0), factor_matrix(s.state_y, s.state_y, 1, 1)});
  return k.materialize();
}

SparseMatrix state_spatial_mass(const DiscreteSpaces& s) {
  return kron({factor_matrix(s.state_x, s.state_x, 0, 0), factor_matrix(s.state_y, s.state_y, 0, 0)});
}

std::vector<SparseMatrix> r2_mass_factors(const DiscreteSpaces& s) {
  return {factor_matrix(s.r2_x, s.r2_x, 0, 0), factor_matrix(s.r2_y, s.r2_y, 0, 0)};
}

std::vector<SparseMatrix> control_mass_factors(const DiscreteSpaces& s) {
  return {factor_matrix(s.control_t, s.control_t, 0, 0), factor_matrix(s.control_x, s.control_x, 0, 0),
          factor_matrix(s.control_y, s.control_y, 0, 0)};
}

SparseMatrix assemble_K_R1(const ProblemSpec&, const DiscreteSpaces& s) {
  const Vector e0 = restrict_vector(endpoint_row(s.state_t.space, Endpoint::kLeft, 0), s.state_t.dofs);
  return kron({row_vector(e0), r1_stiffness(s)});
}

SparseMatrix assemble_K_R2(const ProblemSpec& spec, const DiscreteSpaces& s) {
  if (spec.kind != ProblemKind::kWave) throw DomainError("assemble_K_R2: only the wave problem has a velocity trace");
  const Vector e1 = restrict_vector(endpoint_row(s.state_t.space, Endpoint::kLeft, 1), s.state_t.dofs);
  return kron({row_vector(e1), factor_matrix(s.r2_x, s.state_x, 0, 0), factor_matrix(s.r2_y, s.state_y, 0, 0)});
}

SparseMatrix assemble_observation(const ProblemSpec& spec, const DiscreteSpaces& s) {
  const auto& w = spec.observation;
  return kron({factor_matrix(s.state_t, s.state_t, 0, 0),
               factor_matrix(s.state_x, s.state_x, 0, 0, std::make_pair(w.x0, w.x1)),
               factor_matrix(s.state_y, s.state_y, 0, 0, std::make_pair(w.y0, w.y1))});
}

SystemBlocks assemble_blocks(const ProblemSpec& spec, const DiscreteSpaces& s) {
  SystemBlocks b;
  b.observation = assemble_observation(spec, s);
  b.control_mass = kron(control_mass_factors(s));
  b.k_u = assemble_K_U(spec, s);
  b.k_r1 = assemble_K_R1(spec, s);
  b.r1_stiffness = r1_stiffness(s);
  if (spec.kind == ProblemKind::kWave) {
    b.k_r2 = assemble_K_R2(spec, s);
    b.r2_mass = kron(r2_mass_factors(s));
  }
  return b;
}

// ---------------------------------------------------------------------------

ProjectedData project_data(const ProblemSpec& spec, const DiscreteSpaces& s, const ProblemData& data) {
  validate(spec);
  ProjectedData out;
  const int npts = spec.degree + 2;
  const auto& w = spec.observation;
  using Clip = std::optional<std::pair<double, double>>;

  const auto ybasis = s.state_basis();
  out.d_load = Vector::Zero(s.dim_y());
  out.d_coeffs = Vector::Zero(s.dim_y());
  if (data.d) {
    out.d_load = ybasis.load_vector([&](const std::vector<double>& p) { return data.d(p[0], p[1], p[2]); },
                                    {Clip{}, Clip{std::make_pair(w.x0, w.x1)}, Clip{std::make_pair(w.y0, w.y1)}},
                                    npts);
    const SparseMatrix mass = kron({factor_matrix(s.state_t, s.state_t, 0, 0),
                                    factor_matrix(s.state_x, s.state_x, 0, 0),
                                    factor_matrix(s.state_y, s.state_y, 0, 0)});
    Eigen::SimplicialLLT<SparseMatrix> llt(mass);
    out.d_coeffs = llt.solve(out.d_load);
  }

  out.g_load = Vector::Zero(s.dim_u());
  out.g_coeffs = Vector::Zero(s.dim_u());
  if (data.g_u) {
    out.g_load = s.control_basis().load_vector(
        [&](const std::vector<double>& p) { return data.g_u(p[0], p[1], p[2]); }, {Clip{}, Clip{}, Clip{}}, npts);
    out.g_coeffs = KroneckerSolver(control_mass_factors(s)).solve(out.g_load);
  }

  out.y0_load = Vector::Zero(s.dim_r1());
  out.y0_coeffs = Vector::Zero(s.dim_r1());
  if (data.y0_grad) {
    // (grad y0, grad r) = int dx y0 * dx r + int dy y0 * dy r, with r = phi(x) psi(y).
    const auto& fx = s.state_x;
    const auto& fy = s.state_y;
    TensorBasis r1 = s.r1_basis();
    Vector load = Vector::Zero(s.dim_r1());
    const auto qx = element_quadrature(fx.space, npts);
    const auto qy = element_quadrature(fy.space, npts);
    std::vector<Index> mapx(fx.space.dim(), -1), mapy(fy.space.dim(), -1);
    for (std::size_t i = 0; i < fx.dofs.size(); ++i) mapx[fx.dofs[i]] = static_cast<Index>(i);
    for (std::size_t i = 0; i < fy.dofs.size(); ++i) mapy[fy.dofs[i]] = static_cast<Index>(i);
    for (const auto& px : qx.points) {
      const auto vx = fx.space.local_derivatives(px.element, px.x, 1);
      const Index x0 = fx.space.first_basis(px.element);
      for (const auto& py : qy.points) {
        const auto vy = fy.space.local_derivatives(py.element, py.x, 1);
        const Index y0 = fy.space.first_basis(py.element);
        const auto g = data.y0_grad(px.x, py.x);
        const double wgt = px.w * py.w;
        for (int i = 0; i <= fx.space.degree(); ++i) {
          const Index gi = mapx[x0 + i];
          if (gi < 0) continue;
          for (int j = 0; j <= fy.space.degree(); ++j) {
            const Index gj = mapy[y0 + j];
            if (gj < 0) continue;
            load(gi * fy.dim() + gj) += wgt * (g[0] * vx(1, i) * vy(0, j) + g[1] * vx(0, i) * vy(1, j));
          }
        }
      }
    }
    out.y0_load = load;
    Eigen::SimplicialLLT<SparseMatrix> llt(r1_stiffness(s));
    out.y0_coeffs = llt.solve(load);
  }

  out.y1_load = Vector::Zero(s.dim_r2());
  out.y1_coeffs = Vector::Zero(s.dim_r2());
  if (data.y1 && s.kind == ProblemKind::kWave) {
    out.y1_load =
        s.r2_basis().load_vector([&](const std::vector<double>& p) { return data.y1(p[0], p[1]); }, {Clip{}, Clip{}},
                                 npts);
    out.y1_coeffs = KroneckerSolver(r2_mass_factors(s)).solve(out.y1_load);
  }
  return out;
}

namespace {

void place(std::vector<Eigen::Triplet<double>>& trips, const SparseMatrix& m, Index r0, Index c0, double scale,
           bool with_transpose) {
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      const double v = scale * it.value();
      trips.emplace_back(r0 + it.row(), c0 + it.col(), v);
      if (with_transpose) trips.emplace_back(c0 + it.col(), r0 + it.row(), v);
    }
}

}  // namespace

DiscreteSystem assemble_system(const ProblemSpec& spec, const DiscreteSpaces& s, const SystemBlocks& blocks,
                               const ProjectedData& data) {
  validate(spec);
  const bool wave = spec.kind == ProblemKind::kWave;
  DiscreteSystem sys;
  sys.kind = spec.kind;
  sys.alpha = spec.alpha;
  sys.blocks = blocks;
  sys.block_names = {"y", "u", "p_U", "p_R1"};
  sys.block_sizes = {s.dim_y(), s.dim_u(), s.dim_u(), s.dim_r1()};
  if (wave) {
    sys.block_names.push_back("p_R2");
    sys.block_sizes.push_back(s.dim_r2());
  }
  sys.offsets = {0};
  for (auto n : sys.block_sizes) sys.offsets.push_back(sys.offsets.back() + n);

  const auto check = [](const SparseMatrix& m, Index r, Index c, const char* name) {
    if (m.rows() != r || m.cols() != c) throw StructuralError(std::string("assemble_system: block ") + name +
                                                              " has shape " + std::to_string(m.rows()) + "x" +
                                                              std::to_string(m.cols()));
  };
  const Index ny = s.dim_y(), nu = s.dim_u(), nr1 = s.dim_r1(), nr2 = s.dim_r2();
  check(blocks.observation, ny, ny, "M_q");
  check(blocks.control_mass, nu, nu, "M_U");
  check(blocks.k_u, nu, ny, "K_U");
  check(blocks.k_r1, nr1, ny, "K_R1");
  if (wave) check(blocks.k_r2, nr2, ny, "K_R2");

  const auto& o = sys.offsets;
  std::vector<Eigen::Triplet<double>> trips;
  place(trips, blocks.observation, o[0], o[0], 1.0, false);
  place(trips, blocks.control_mass, o[1], o[1], spec.alpha, false);
  place(trips, blocks.k_u, o[2], o[0], 1.0, true);
  place(trips, blocks.control_mass, o[2], o[1], 1.0, true);
  place(trips, blocks.k_r1, o[3], o[0], 1.0, true);
  if (wave) place(trips, blocks.k_r2, o[4], o[0], 1.0, true);
  sys.matrix.resize(sys.dim(), sys.dim());
  sys.matrix.setFromTriplets(trips.begin(), trips.end());
  sys.matrix.makeCompressed();

  sys.rhs = Vector::Zero(sys.dim());
  const auto put = [&](int block, const Vector& v) {
    if (v.size() == 0) return;
    if (v.size() != sys.block_sizes[block]) throw StructuralError("assemble_system: data vector has the wrong size");
    sys.rhs.segment(o[block], v.size()) = v;
  };
  put(0, data.d_load);
  put(2, data.g_load);
  put(3, data.y0_load);
  if (wave) put(4, data.y1_load);
  return sys;
}

DiscreteSystem assemble_system(const ProblemSpec& spec, const DiscreteSpaces& spaces) {
  return assemble_system(spec, spaces, assemble_blocks(spec, spaces), ProjectedData{});
}

double estimate_memory_bytes(const ProblemSpec& spec) {
  const auto s = build_spaces(spec);
  const double p = spec.degree;
  const double ny = static_cast<double>(s.dim_y());
  const double nu = static_cast<double>(s.dim_u());
  const double dofs = static_cast<double>(dof_count(spec));
  const double band = std::pow(p + 2, 3);
  const double nnz_system = 4 * nu * band + ny * std::pow(2 * p + 1, 3);
  const double nnz_py = ny * std::pow(2 * p + 1, 3);
  const double nnz_factor = 4.0 * std::pow(ny, 4.0 / 3.0) * (2 * p + 1) * (2 * p + 1);
  // 12 bytes per stored nonzero (value + index), ~20 work vectors, blocks kept twice.
  return 12.0 * (2 * nnz_system + nnz_py + nnz_factor) + 8.0 * 20 * dofs;
}

}  // namespace msp
