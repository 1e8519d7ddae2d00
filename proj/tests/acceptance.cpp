// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>

#include "msp/blocksys.hpp"
#include "msp/experiment.hpp"
#include "msp/verify.hpp"

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.passed) ++failures;
  std::printf("[%s] %2d %s: %s (%.1f s)\n", o.passed ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

msp::ProblemSpec wave(int p, int level, double alpha = 1.0) {
  msp::ProblemSpec s;
  s.degree = p;
  s.level = level;
  s.alpha = alpha;
  return s;
}

bool suite_ok(const msp::SuiteResult& r, const std::string& check, std::ostringstream& out) {
  for (const auto& c : r.checks)
    if (c.name == check) {
      out << c.name << " = " << c.value << "; ";
      return c.passed;
    }
  out << check << " missing; ";
  return false;
}

}  // namespace

int main() {
  criterion(1, "DoF counts", [] {
    const std::pair<msp::ProblemSpec, msp::Index> cases[] = {
        {wave(2, 2), 3604}, {wave(2, 3), 28452}, {wave(3, 2), 4643}, {wave(3, 3), 32343}};
    std::ostringstream d;
    bool ok = true;
    for (const auto& [spec, expected] : cases) {
      const auto n = msp::dof_count(spec);
      d << "p=" << spec.degree << ",l=" << spec.level << ": " << n << " ";
      ok = ok && n == expected;
    }
    return Outcome{ok, d.str()};
  });

  msp::RunConfig table;
  table.degrees = {2};
  table.levels = {2, 3};
  table.alphas = {1.0, 1e-3, 1e-6, 1e-9};
  table.workers = std::max(1u, std::min(4u, std::thread::hardware_concurrency()));
  std::vector<msp::RunRow> rows;
  const auto iterations = [&](int level, double alpha) {
    for (const auto& r : rows)
      if (r.level == level && r.alpha == alpha && r.error.empty() && r.converged) return r.iterations;
    return -1;
  };

  criterion(2, "iteration counts within 50% of published counts, max <= 80", [&] {
    rows = msp::run_table(table);
    const double ref[2][3] = {{36, 51, 21}, {38, 48, 33}};
    const double alphas[3] = {1e-3, 1e-6, 1e-9};
    std::ostringstream d;
    bool ok = true;
    for (int li = 0; li < 2; ++li) {
      d << "l=" << li + 2 << ":";
      for (int ai = 0; ai < 3; ++ai) {
        const int it = iterations(li + 2, alphas[ai]);
        d << ' ' << it << "(" << ref[li][ai] << ")";
        ok = ok && it > 0 && std::abs(it - ref[li][ai]) <= 0.5 * ref[li][ai] && it <= 80;
      }
      d << "; ";
    }
    return Outcome{ok, d.str()};
  });

  criterion(3, "alpha = 1 needs >= 1.5x the iterations of alpha = 1e-3", [&] {
    std::ostringstream d;
    bool ok = true;
    for (int level : {2, 3}) {
      const int a = iterations(level, 1.0), b = iterations(level, 1e-3);
      d << "l=" << level << ": " << a << " vs " << b << "; ";
      ok = ok && a > 0 && b > 0 && a >= 1.5 * b;
    }
    return Outcome{ok, d.str()};
  });

  criterion(4, "Schur form of the state block equals P_Y (rel <= 1e-8)", [] {
    std::ostringstream d;
    bool ok = true;
    for (int p : {2, 3}) {
      const auto r = msp::state_norm_check(wave(p, 2));
      d << "p=" << p << " dim=" << r.dim_y << " gap=" << r.relative_gap << "; ";
      ok = ok && r.relative_gap <= 1e-8;
    }
    return Outcome{ok, d.str()};
  });

  criterion(5, "state operator maps Y_h into U_h (rel <= 1e-10)", [] {
    std::ostringstream d;
    bool ok = true;
    for (int p : {2, 3}) {
      const auto r = msp::inclusion_check(wave(p, 2), 20, 42);
      d << "p=" << p << " samples=" << r.samples << " residual=" << r.max_relative_residual << "; ";
      ok = ok && r.samples == 20 && r.max_relative_residual <= 1e-10;
    }
    return Outcome{ok, d.str()};
  });

  msp::SuiteResult t22;
  criterion(6, "constant round trips on 100 random block systems", [&] {
    t22 = msp::suite_constants(100, 42);
    std::ostringstream d;
    const bool a = suite_ok(t22, "gamma bounds implied by c", d);
    const bool b = suite_ok(t22, "c bounds implied by gamma", d);
    return Outcome{a && b, d.str()};
  });

  criterion(7, "kernel equality on 100 random semi-definite systems", [] {
    const auto r = msp::suite_kernel(100, 42);
    std::ostringstream d;
    const bool ok = suite_ok(r, "kernel equality (max principal angle)", d);
    return Outcome{ok && r.indeterminate == 0, d.str() + "indeterminate=" + std::to_string(r.indeterminate)};
  });

  criterion(8, "Schur complement oracles", [] {
    const auto r = msp::suite_schur(42);
    std::ostringstream d;
    const bool a = suite_ok(r, "supremum identity", d);
    const bool b = suite_ok(r, "domination flags agree", d);
    const bool c = suite_ok(r, "three conditions consistent with direct bounds", d);
    return Outcome{a && b && c, d.str()};
  });

  criterion(9, "quarter-circle minimum of max(|y-x|, x^2) in [0.29, 0.30]", [] {
    const auto m = msp::phi_min<double>();
    std::ostringstream d;
    d.precision(8);
    d << "min=" << m.value << " at x=" << m.x;
    return Outcome{m.value >= 0.29 && m.value <= 0.30, d.str()};
  });

  const auto spec = wave(2, 2);
  const auto spaces = msp::build_spaces(spec);
  const auto blocks = msp::assemble_blocks(spec, spaces);

  criterion(10, "Brezzi constants c_A <= 1, c_B <= sqrt(2)", [&] {
    std::ostringstream d;
    bool ok = true;
    for (double alpha : {1e-3, 1e-6}) {
      const auto b = msp::measure_brezzi(spec, spaces, blocks, alpha);
      d << "alpha=" << alpha << ": c_A=" << b.c_a << " c_B=" << b.c_b << " gamma0=" << b.gamma0 << " k0=" << b.k0
        << "; ";
      ok = ok && b.c_a <= b.c_a_bound + 1e-8 && b.c_b <= b.c_b_bound + 1e-8;
    }
    return Outcome{ok, d.str()};
  });

  criterion(11, "condition numbers vary by at most 10x over alpha", [&] {
    const msp::PreconditionerFactory factory(spec, spaces, blocks);
    std::ostringstream d;
    double lo = INFINITY, hi = 0;
    bool ok = true;
    for (double alpha : {1e-3, 1e-6, 1e-9}) {
      auto s = spec;
      s.alpha = alpha;
      const auto sys = msp::assemble_system(s, spaces, blocks, msp::ProjectedData{});
      const auto est = msp::condition_number_estimate(sys.matrix, factory.for_alpha(alpha),
                                                      msp::system_kernel_basis(sys));
      d << "alpha=" << alpha << ": kappa=" << est.kappa << "; ";
      ok = ok && std::isfinite(est.kappa) && est.kappa >= 1;
      lo = std::min(lo, est.kappa);
      hi = std::max(hi, est.kappa);
    }
    d << "ratio=" << hi / lo;
    return Outcome{ok && hi / lo <= 10, d.str()};
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
