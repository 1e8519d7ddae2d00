#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "msp/blocksys.hpp"
#include "msp/errors.hpp"
#include "msp/spectral.hpp"
#include "msp/verify.hpp"

namespace msp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

bool SuiteResult::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"schur", "constants", "brezzi", "inclusion", "state-norm"};
  return names;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "schur") return suite_schur(seed);
  if (name == "constants") {
    auto r = suite_constants(100, seed);
    auto k = suite_kernel(100, seed + 1);
    r.checks.insert(r.checks.end(), k.checks.begin(), k.checks.end());
    r.indeterminate += k.indeterminate;
    return r;
  }
  if (name == "brezzi") return suite_brezzi({1e-3, 1e-6});
  if (name == "inclusion") return suite_inclusion(seed);
  if (name == "state-norm") return suite_state_norm();
  throw ConfigError("unknown suite '" + name + "'");
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

/// Largest relative violation of `measured >= bound` (lower) or `measured <= bound` (upper).
double violation(double measured, double bound, bool lower) {
  const double gap = lower ? bound - measured : measured - bound;
  return gap / std::max(1.0, std::abs(bound));
}

BlockTridiagonalSystem<double> random_system(std::mt19937_64& rng, int n, int max_dim,
                                             bool force_kernel = false) {
  std::uniform_int_distribution<int> dim_dist(1, max_dim);
  std::uniform_real_distribution<double> log_scale(-1.0, 1.0);
  std::vector<Eigen::Index> dims(n);
  for (auto& d : dims) d = dim_dist(rng);
  std::vector<MatrixXd> diag, off;
  std::vector<Eigen::Index> zero(n, 0);
  if (force_kernel)
    for (int i = 0; i < n; ++i) zero[i] = std::uniform_int_distribution<Eigen::Index>(0, dims[i] - 1)(rng);
  for (int i = 0; i < n; ++i) diag.push_back(random_semidefinite<double>(rng, dims[i], zero[i]));
  for (int i = 0; i + 1 < n; ++i) {
    MatrixXd b = std::pow(10.0, log_scale(rng)) * gaussian_matrix<double>(rng, dims[i + 1], dims[i]);
    b.leftCols(zero[i]).setZero();
    b.topRows(zero[i + 1]).setZero();
    off.push_back(std::move(b));
  }
  return BlockTridiagonalSystem<double>(std::move(diag), std::move(off));
}

}  // namespace

SuiteResult suite_constants(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_dist(2, 4);
  double worst_gamma = -1e300, worst_c = -1e300, worst_split = 0;
  int failures = 0;
  for (int k = 0; k < instances; ++k) {
    const auto sys = random_system(rng, n_dist(rng), 4);
    std::vector<MatrixXd> p;
    for (auto d : sys.dims()) p.push_back(random_spd<double>(rng, d));
    const auto c = measure_c(sys, p);
    const auto g = measure_gamma(sys, p);
    const auto g_impl = gamma_from_c(c.lo, c.hi);
    const auto c_impl = c_from_gamma(g.lo, g.hi);
    const double vg = std::max(violation(g.lo, g_impl.lo, true), violation(g.hi, g_impl.hi, false));
    const double vc = std::max(violation(c.lo, c_impl.lo, true), violation(c.hi, c_impl.hi, false));
    worst_gamma = std::max(worst_gamma, vg);
    worst_c = std::max(worst_c, vc);
    if (vg > 1e-10 || vc > 1e-10) ++failures;

    double lo = 1e300, hi = 0;
    for (const auto& cond : check_condition_n(sys, p)) {
      lo = std::min(lo, cond.bounds.lo);
      hi = std::max(hi, cond.bounds.hi);
    }
    worst_split = std::max({worst_split, std::abs(lo - g.lo) / std::abs(g.hi), std::abs(hi - g.hi) / g.hi});
  }
  SuiteResult r{"constants", {}, 0};
  r.checks.push_back({"gamma bounds implied by c", worst_gamma <= 1e-10, worst_gamma, 1e-10,
                      std::to_string(instances) + " instances, worst relative violation"});
  r.checks.push_back({"c bounds implied by gamma", worst_c <= 1e-10, worst_c, 1e-10,
                      std::to_string(failures) + " failing instances"});
  r.checks.push_back({"parity conditions reproduce gamma", worst_split <= 1e-8, worst_split, 1e-8,
                      "relative gap between the per-parity bounds and the direct bounds"});

  const auto pm = phi_min<double>();
  double grid = 1e300;
  const int samples = 1'000'000;
  for (int i = 0; i <= samples; ++i) {
    const double t = 0.5 * std::numbers::pi * i / samples;
    grid = std::min(grid, phi(std::cos(t), std::sin(t)));
  }
  r.checks.push_back({"phi minimum in [0.29, 0.30]", pm.value >= 0.29 && pm.value <= 0.30, pm.value, 0.29,
                      "x = " + fmt(pm.x) + ", grid minimum " + fmt(grid)});
  r.checks.push_back({"phi minimum matches arc sampling", std::abs(grid - pm.value) <= 1e-6,
                      std::abs(grid - pm.value), 1e-6, ""});
  return r;
}

SuiteResult suite_kernel(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_dist(2, 4);
  double worst = 0;
  int different = 0, indeterminate = 0, nontrivial = 0;
  for (int k = 0; k < instances; ++k) {
    const auto sys = random_system(rng, n_dist(rng), 4, k % 2 == 0);
    const auto check = kernel_equality_check(sys);
    if (check.verdict == KernelVerdict::kIndeterminate) {
      ++indeterminate;
      continue;
    }
    if (check.verdict == KernelVerdict::kDifferent) ++different;
    if (check.dim_ker_a > 0) ++nontrivial;
    worst = std::max(worst, check.max_angle);
  }
  SuiteResult r{"kernel", {}, indeterminate};
  r.checks.push_back({"kernel equality (max principal angle)", different == 0 && worst <= 1e-8, worst, 1e-8,
                      std::to_string(instances) + " instances, " + std::to_string(nontrivial) +
                          " with a nontrivial kernel, " + std::to_string(indeterminate) + " indeterminate"});
  return r;
}

SuiteResult suite_schur(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(1, 5);
  SuiteResult r{"schur", {}, 0};

  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const int nv = dim(rng), nq = dim(rng);
    SchurInstance<double> inst{random_spd<double>(rng, nv), gaussian_matrix<double>(rng, nq, nv), {}};
    const VectorXd q = gaussian_matrix<double>(rng, nq, 1).col(0);
    const auto id = schur_sup_identity(inst, q);
    worst = std::max(worst, std::abs(id.lhs - id.rhs) / std::max(std::abs(id.lhs), 1e-300));
  }
  r.checks.push_back({"supremum identity", worst <= 1e-10, worst, 1e-10, "100 instances, worst relative gap"});

  int disagree = 0, forward_true = 0;
  const double scales[] = {0.5, 0.9, 1.1, 2.0};
  for (int k = 0; k < 100; ++k) {
    const int nv = dim(rng), nq = dim(rng);
    SchurInstance<double> inst{random_spd<double>(rng, nv), gaussian_matrix<double>(rng, nq, nv), {}};
    const MatrixXd s = inst.b * spd_factor<double>(inst.a, "schur").solve(inst.b.transpose());
    inst.c = scales[k % 4] * s + 0.05 * random_spd<double>(rng, nq);
    inst.c = 0.5 * (inst.c + inst.c.transpose()).eval();
    const auto flags = domination_equivalence(inst);
    if (flags.forward != flags.backward) ++disagree;
    if (flags.forward) ++forward_true;
  }
  r.checks.push_back({"domination flags agree", disagree == 0, static_cast<double>(disagree), 0,
                      "100 instances, " + std::to_string(forward_true) + " dominated"});

  int inconsistent = 0;
  for (int k = 0; k < 50; ++k) {
    const int n1 = dim(rng), n2 = dim(rng);
    const MatrixXd m = random_spd<double>(rng, n1 + n2);
    Block2x2Instance<double> inst{m.topLeftCorner(n1, n1), m.topRightCorner(n1, n2), m.bottomRightCorner(n2, n2),
                                  random_spd<double>(rng, n1), random_spd<double>(rng, n2)};
    if (!block2x2_equivalence_check(inst).consistent) ++inconsistent;
  }
  r.checks.push_back({"three conditions consistent with direct bounds", inconsistent == 0,
                      static_cast<double>(inconsistent), 0, "50 instances"});
  return r;
}

SuiteResult suite_brezzi(const std::vector<double>& alphas) {
  SuiteResult r{"brezzi", {}, 0};
  ProblemSpec spec;
  spec.degree = 2;
  spec.level = 2;
  const auto spaces = build_spaces(spec);
  const auto blocks = assemble_blocks(spec, spaces);
  for (double a : alphas) {
    const auto b = measure_brezzi(spec, spaces, blocks, a);
    const std::string tag = " (alpha=" + fmt(a) + ")";
    r.checks.push_back({"c_A <= 1" + tag, b.c_a <= b.c_a_bound + 1e-8, b.c_a, b.c_a_bound, ""});
    r.checks.push_back({"c_B <= sqrt(2)" + tag, b.c_b <= b.c_b_bound + 1e-8, b.c_b, b.c_b_bound, ""});
    r.checks.push_back({"gamma_0 > 0" + tag, b.gamma0 > 0, b.gamma0, b.gamma0_reference,
                        "kernel dim " + std::to_string(b.kernel_dim) + ", continuous value 1/2"});
    r.checks.push_back({"k_0 > 0 on the complement of ker B^T" + tag, b.k0 > 0, b.k0, b.k0_reference,
                        "threshold column: continuous formula; dim ker B^T = " + std::to_string(b.cokernel_dim) +
                            ", k_0 over all multipliers = " + fmt(b.k0_raw)});
  }

  const double ck = measure_discrete_K1(spec, spaces, blocks);
  r.checks.push_back({"c_K = 1 (wave)", std::abs(ck - 1) <= 1e-8, ck, 1.0, ""});
  ProblemSpec heat = spec;
  heat.kind = ProblemKind::kHeat;
  const auto hs = build_spaces(heat);
  const double ck_heat = measure_discrete_K1(heat, hs, assemble_blocks(heat, hs));
  r.checks.push_back({"c_K = 1 (heat)", std::abs(ck_heat - 1) <= 1e-8, ck_heat, 1.0, ""});

  const auto full = measure_discrete_infsup(spec, spaces, blocks, false);
  r.checks.push_back({"c_R > 0 on the complement of ker K_R^T", full.value > 0, full.value, 0,
                      "dim ker K_R^T = " + std::to_string(full.cokernel_dim) + ", over all of R_h " +
                          fmt(full.raw_value)});
  const auto restricted = measure_discrete_infsup(spec, spaces, blocks, true);
  r.checks.push_back({"c_R on ker K_U (reported)", true, restricted.value, 0,
                      restricted.kernel_dim == 0 ? "degenerate: ker K_U has dimension " +
                                                  std::to_string(restricted.kernel_dim)
                                            : "kernel dimension " + std::to_string(restricted.kernel_dim)});

  PreconditionerFactory factory(spec, spaces, blocks);
  double kmin = 1e300, kmax = 0;
  std::string detail;
  for (double a : {1e-3, 1e-6, 1e-9}) {
    ProblemSpec s = spec;
    s.alpha = a;
    const auto sys = assemble_system(s, spaces, blocks, ProjectedData{});
    const auto est = condition_number_estimate(sys.matrix, factory.for_alpha(a), system_kernel_basis(sys));
    if (!std::isfinite(est.kappa)) kmax = std::numeric_limits<double>::infinity();
    kmin = std::min(kmin, est.kappa);
    kmax = std::max(kmax, est.kappa);
    detail += "alpha=" + fmt(a) + ": " + fmt(est.kappa) + (est.converged ? "" : " (unconverged)") + "; ";
  }
  const double ratio = kmax / kmin;
  r.checks.push_back({"condition numbers vary by <= 10x over alpha", std::isfinite(ratio) && ratio <= 10, ratio, 10,
                      detail});
  return r;
}

SuiteResult suite_inclusion(std::uint64_t seed) {
  SuiteResult r{"inclusion", {}, 0};
  for (auto kind : {ProblemKind::kWave, ProblemKind::kHeat})
    for (int p : {2, 3}) {
      ProblemSpec spec;
      spec.kind = kind;
      spec.degree = p;
      spec.level = 2;
      const auto rep = inclusion_check(spec, 20, seed);
      r.checks.push_back({"L Y_h in U_h (" + to_string(kind) + ", p=" + std::to_string(p) + ")",
                          rep.max_relative_residual <= 1e-10, rep.max_relative_residual, 1e-10, "20 samples"});
    }
  return r;
}

SuiteResult suite_state_norm() {
  SuiteResult r{"state-norm", {}, 0};
  for (auto kind : {ProblemKind::kWave, ProblemKind::kHeat})
    for (int p : {2, 3}) {
      ProblemSpec spec;
      spec.kind = kind;
      spec.degree = p;
      spec.level = 2;
      const auto rep = state_norm_check(spec);
      r.checks.push_back({"Ptilde_Y = P_Y (" + to_string(kind) + ", p=" + std::to_string(p) + ")",
                          rep.relative_gap <= 1e-8, rep.relative_gap, 1e-8,
                          "dim Y_h = " + std::to_string(rep.dim_y)});
    }
  ProblemSpec coarse;
  coarse.control_continuity = coarse.degree - 1;
  const auto rep = state_norm_check(coarse);
  r.checks.push_back({"gap detected with a smaller control space", rep.relative_gap > 1e-8, rep.relative_gap, 1e-8,
                      "control continuity p-1"});
  return r;
}

void write_suite_csv(const std::vector<SuiteResult>& results, std::ostream& out) {
  out << "suite,check,passed,value,threshold,detail\n";
  out << std::setprecision(17);
  for (const auto& s : results)
    for (const auto& c : s.checks) {
      std::string detail = c.detail;
      for (auto& ch : detail)
        if (ch == '"') ch = '\'';
      out << s.suite << ",\"" << c.name << "\"," << (c.passed ? "true" : "false") << ',' << c.value << ','
          << c.threshold << ",\"" << detail << "\"\n";
    }
}

void write_suite_markdown(const std::vector<SuiteResult>& results, std::ostream& out) {
  for (const auto& s : results) {
    out << "### " << s.suite << (s.passed() ? " (pass)" : " (FAIL)") << "\n\n";
    out << "| check | result | value | threshold | detail |\n|---|---|---|---|---|\n";
    for (const auto& c : s.checks)
      out << "| " << c.name << " | " << (c.passed ? "pass" : "FAIL") << " | " << fmt(c.value) << " | "
          << fmt(c.threshold) << " | " << c.detail << " |\n";
    if (s.indeterminate > 0) out << "\n" << s.indeterminate << " rank decisions were indeterminate.\n";
    out << "\n";
  }
}

}  // namespace msp
