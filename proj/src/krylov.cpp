#include "msp/krylov.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <random>

#include "msp/errors.hpp"

namespace msp {

using Eigen::VectorXd;

Eigen::VectorXd random_start(Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v(i) = 2.0 * u - 1.0;
  }
  return v;
}

namespace {

void probe_symmetry(const LinearOperator& apply_A, Eigen::Index n, std::uint64_t seed) {
  for (int k = 0; k < 3; ++k) {
    const VectorXd v = random_start(n, seed + 2 * k + 1000);
    const VectorXd w = random_start(n, seed + 2 * k + 1001);
    const VectorXd av = apply_A(v), aw = apply_A(w);
    const double gap = std::abs(av.dot(w) - v.dot(aw));
    const double scale = std::max(av.norm() * w.norm(), v.norm() * aw.norm());
    if (gap > 1e-10 * scale) throw ContractError("minres: operator is not symmetric");
  }
}

}  // namespace

MinresResult minres(const LinearOperator& apply_A, const LinearOperator& apply_Pinv, const VectorXd& b,
                    const VectorXd& x0, const MinresConfig& config) {
  if (!(config.rel_tol > 0 && config.rel_tol < 1)) throw DomainError("minres: rel_tol must lie in (0, 1)");
  if (config.max_iter < 1) throw DomainError("minres: max_iter must be at least 1");
  if (b.size() != x0.size()) throw StructuralError("minres: b and x0 differ in size");

  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = b.size();
  if (config.check_symmetry && n > 0) probe_symmetry(apply_A, n, config.seed);

  MinresResult result;
  auto& rep = result.report;
  VectorXd& x = result.x;
  x = x0;

  VectorXd v = b - apply_A(x);
  rep.initial_residual = v.norm();
  const double r0 = rep.initial_residual;
  rep.residual_history.push_back(1.0);
  const auto finish = [&](bool converged, double relres) {
    rep.converged = converged;
    rep.final_true_relres = relres;
    rep.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
  };
  if (r0 == 0.0) return finish(true, 0.0);

  VectorXd z = apply_Pinv(v);
  double gamma = std::sqrt(v.dot(z));
  if (!(gamma > 0)) throw ContractError("minres: preconditioner is not positive definite");
  const double gamma1 = gamma;
  double gamma_prev = 1.0;
  double eta = gamma;
  double c_prev = 1.0, c = 1.0, s_prev = 0.0, s = 0.0;
  VectorXd v_prev = VectorXd::Zero(n);
  VectorXd w = VectorXd::Zero(n), w_prev = VectorXd::Zero(n);

  const auto true_relres = [&]() { return (b - apply_A(x)).norm() / r0; };

  for (int j = 1; j <= config.max_iter; ++j) {
    z /= gamma;
    const VectorXd az = apply_A(z);
    const double delta = az.dot(z);
    VectorXd v_next = az - (delta / gamma) * v - (gamma / gamma_prev) * v_prev;
    VectorXd z_next = apply_Pinv(v_next);
    const double g2 = v_next.dot(z_next);
    if (g2 < -1e-12 * gamma1 * gamma1) throw ContractError("minres: preconditioner is not positive definite");
    const double gamma_next = std::sqrt(std::max(g2, 0.0));

    const double a0 = c * delta - c_prev * s * gamma;
    const double a1 = std::hypot(a0, gamma_next);
    const double a2 = s * delta + c_prev * c * gamma;
    const double a3 = s_prev * gamma;
    const double c_next = a0 / a1;
    const double s_next = gamma_next / a1;
    VectorXd w_next = (z - a3 * w_prev - a2 * w) / a1;
    x += c_next * eta * w_next;
    eta = -s_next * eta;

    rep.iterations = j;
    rep.residual_history.push_back(std::abs(eta) / gamma1);

    const bool breakdown = gamma_next <= 1e-14 * gamma1;
    const bool estimate_ok = std::abs(eta) <= config.rel_tol * gamma1;
    const bool periodic = config.check_true_residual_every > 0 && j % config.check_true_residual_every == 0;
    if (estimate_ok || breakdown || periodic) {
      const double rel = true_relres();
      rep.true_residuals.emplace_back(j, rel);
      if (rel <= config.rel_tol) return finish(true, rel);
      if (breakdown) return finish(false, rel);
    }

    v_prev = std::move(v);
    v = std::move(v_next);
    z = std::move(z_next);
    w_prev = std::move(w);
    w = std::move(w_next);
    gamma_prev = gamma;
    gamma = gamma_next;
    c_prev = c;
    c = c_next;
    s_prev = s;
    s = s_next;
  }
  const double rel = true_relres();
  rep.true_residuals.emplace_back(rep.iterations, rel);
  return finish(false, rel);
}

void write_residual_csv(const MinresReport& report, std::ostream& out) {
  std::map<int, double> truth(report.true_residuals.begin(), report.true_residuals.end());
  out << "iteration,estimate,true_residual\n";
  out.precision(17);
  for (std::size_t j = 0; j < report.residual_history.size(); ++j) {
    out << j << ',' << report.residual_history[j] << ',';
    if (auto it = truth.find(static_cast<int>(j)); it != truth.end()) out << it->second;
    out << '\n';
  }
}

}  // namespace msp
