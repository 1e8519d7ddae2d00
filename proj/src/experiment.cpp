#include "msp/experiment.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "msp/errors.hpp"
#include "msp/matrix_market.hpp"
#include "msp/precond.hpp"

namespace msp {

void validate(const RunConfig& c) {
  if (c.degrees.empty()) throw ConfigError("no degrees given");
  if (c.levels.empty()) throw ConfigError("no levels given");
  if (c.alphas.empty()) throw ConfigError("no alphas given");
  if (!(c.tol > 0 && c.tol < 1)) throw ConfigError("tol must lie in (0, 1)");
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  if (!(c.max_memory_gb > 0)) throw ConfigError("max-memory-gb must be positive");
  for (int p : c.degrees)
    if (p < 2) throw ConfigError("degree must be at least 2");
  for (int l : c.levels)
    if (l < 0) throw ConfigError("level must be nonnegative");
  for (int p : c.degrees)
    for (int l : c.levels)
      if (l >= 4 && !c.allow_large) {
        ProblemSpec s;
        s.kind = c.problem;
        s.degree = p;
        s.level = l;
        std::ostringstream msg;
        msg << std::setprecision(3) << "level " << l << " (p=" << p << ", " << dof_count(s) << " dofs, estimated "
            << estimate_memory_bytes(s) / 1e9 << " GB) needs --allow-large";
        throw ConfigError(msg.str());
      }
  for (double a : c.alphas)
    if (!(a > 0) || !std::isfinite(a)) throw ConfigError("alphas must be positive");
}

namespace {

ProblemSpec make_spec(const RunConfig& c, int p, int l, double alpha) {
  ProblemSpec s;
  s.kind = c.problem;
  s.degree = p;
  s.level = l;
  s.alpha = alpha;
  s.seed = c.seed;
  return s;
}

std::string memory_refusal(const ProblemSpec& spec, double cap_gb) {
  const double est = estimate_memory_bytes(spec) / 1e9;
  if (est <= cap_gb) return {};
  std::ostringstream s;
  s << std::setprecision(3) << "refused: estimated " << est << " GB exceeds the cap of " << cap_gb << " GB";
  return s.str();
}

struct Assembled {
  ProblemSpec spec;
  DiscreteSpaces spaces;
  SystemBlocks blocks;
  std::unique_ptr<PreconditionerFactory> factory;
};

Assembled assemble(const ProblemSpec& spec) {
  Assembled a{spec, build_spaces(spec), {}, nullptr};
  a.blocks = assemble_blocks(spec, a.spaces);
  a.factory = std::make_unique<PreconditionerFactory>(spec, a.spaces, a.blocks);
  return a;
}

RunRow solve_cell(const Assembled& a, double alpha, const RunConfig& config, MinresReport* report) {
  ProblemSpec spec = a.spec;
  spec.alpha = alpha;
  RunRow row{spec.kind, spec.degree, spec.level, alpha, dof_count(spec), 0, false, 0, 0, {}};
  const auto sys = assemble_system(spec, a.spaces, a.blocks, ProjectedData{});
  const auto precond = a.factory->for_alpha(alpha);
  MinresConfig mc;
  mc.rel_tol = config.tol;
  mc.seed = config.seed;
  const auto result = minres([&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return sys.matrix * v; },
                             [&](const Eigen::VectorXd& v) { return precond.apply_inverse(v); }, sys.rhs,
                             random_start(sys.dim(), config.seed), mc);
  row.iterations = result.report.iterations;
  row.converged = result.report.converged;
  row.final_relres = result.report.final_true_relres;
  row.runtime_ms = result.report.runtime_ms;
  if (report) *report = result.report;
  return row;
}

}  // namespace

RunRow run_single(const ProblemSpec& spec, const RunConfig& config, MinresReport* report) {
  validate(spec);
  if (auto refusal = memory_refusal(spec, config.max_memory_gb); !refusal.empty()) throw ConfigError(refusal);
  return solve_cell(assemble(spec), spec.alpha, config, report);
}

std::vector<RunRow> run_table(const RunConfig& config) {
  validate(config);
  struct Cell {
    std::size_t group;
    double alpha;
  };
  std::vector<ProblemSpec> groups;
  std::vector<Cell> cells;
  std::vector<RunRow> rows;
  for (int p : config.degrees)
    for (int l : config.levels) {
      groups.push_back(make_spec(config, p, l, config.alphas.front()));
      for (double a : config.alphas) {
        cells.push_back({groups.size() - 1, a});
        RunRow r;
        r.problem = config.problem;
        r.degree = p;
        r.level = l;
        r.alpha = a;
        r.dofs = dof_count(groups.back());
        rows.push_back(r);
      }
    }

  std::vector<std::unique_ptr<Assembled>> assembled(groups.size());
  std::vector<std::string> group_error(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    group_error[g] = memory_refusal(groups[g], config.max_memory_gb);
    if (!group_error[g].empty()) continue;
    try {
      assembled[g] = std::make_unique<Assembled>(assemble(groups[g]));
    } catch (const std::exception& e) {
      group_error[g] = e.what();
    }
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& cell = cells[i];
      if (!group_error[cell.group].empty()) {
        rows[i].error = group_error[cell.group];
        continue;
      }
      try {
        rows[i] = solve_cell(*assembled[cell.group], cell.alpha, config, nullptr);
      } catch (const std::exception& e) {
        rows[i].error = e.what();
      }
    }
  };
  const int n = std::min<int>(config.workers, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

void write_rows_csv(const std::vector<RunRow>& rows, std::ostream& out) {
  out << "problem,p,level,alpha,dofs,iterations,converged,final_relres,runtime_ms\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << to_string(r.problem) << ',' << r.degree << ',' << r.level << ',' << r.alpha << ',' << r.dofs << ',';
    if (r.error.empty())
      out << r.iterations << ',' << (r.converged ? "true" : "false") << ',' << r.final_relres << ',' << r.runtime_ms;
    else
      out << ",false,,";
    out << '\n';
  }
}

void write_rows_markdown(const std::vector<RunRow>& rows, std::ostream& out) {
  std::map<int, std::vector<const RunRow*>> by_degree;
  for (const auto& r : rows) by_degree[r.degree].push_back(&r);
  for (const auto& [p, list] : by_degree) {
    std::vector<double> alphas;
    std::vector<int> levels;
    for (const auto* r : list) {
      if (std::find(alphas.begin(), alphas.end(), r->alpha) == alphas.end()) alphas.push_back(r->alpha);
      if (std::find(levels.begin(), levels.end(), r->level) == levels.end()) levels.push_back(r->level);
    }
    out << "#### " << to_string(list.front()->problem) << ", p = " << p << "\n\n| level | DoFs |";
    for (double a : alphas) out << " alpha = " << a << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < alphas.size(); ++i) out << "---|";
    out << '\n';
    for (int l : levels) {
      Index dofs = 0;
      std::ostringstream cells;
      for (double a : alphas) {
        const auto it = std::find_if(list.begin(), list.end(),
                                     [&](const RunRow* r) { return r->level == l && r->alpha == a; });
        cells << ' ';
        if (it != list.end()) {
          dofs = (*it)->dofs;
          if (!(*it)->error.empty())
            cells << "n/a";
          else
            cells << (*it)->iterations << ((*it)->converged ? "" : "*");
        }
        cells << " |";
      }
      out << "| " << l << " | " << dofs << " |" << cells.str() << '\n';
    }
    out << '\n';
  }
}

std::vector<SuiteResult> run_verify(const RunConfig& config) {
  std::vector<std::string> names;
  if (config.suite == "all")
    names = suite_names();
  else
    names = {config.suite};
  for (const auto& n : names)
    if (std::find(suite_names().begin(), suite_names().end(), n) == suite_names().end())
      throw ConfigError("unknown suite '" + n + "'");
  std::vector<SuiteResult> out;
  for (const auto& n : names) out.push_back(run_suite(n, config.seed));
  return out;
}

ExportResult export_system(const RunConfig& config) {
  validate(config);
  const ProblemSpec spec = make_spec(config, config.degrees.front(), config.levels.front(), config.alphas.front());
  if (auto refusal = memory_refusal(spec, config.max_memory_gb); !refusal.empty()) throw ConfigError(refusal);
  const auto spaces = build_spaces(spec);
  const auto blocks = assemble_blocks(spec, spaces);
  const auto sys = assemble_system(spec, spaces, blocks, ProjectedData{});
  const auto precond = build_preconditioner(spec, spaces, blocks);

  std::error_code ec;
  std::filesystem::create_directories(config.export_dir, ec);
  if (ec) throw std::runtime_error(config.export_dir.string() + ": " + ec.message());

  ExportResult res;
  nlohmann::json manifest;
  manifest["problem"] = to_string(spec.kind);
  manifest["degree"] = spec.degree;
  manifest["level"] = spec.level;
  manifest["alpha"] = spec.alpha;
  manifest["seed"] = spec.seed;
  manifest["final_time"] = spec.final_time;
  manifest["observation"] = {spec.observation.x0, spec.observation.x1, spec.observation.y0, spec.observation.y1};
  manifest["random_start_generator"] = kRandomStartGenerator;
  manifest["dofs"] = sys.dim();

  const auto sys_path = config.export_dir / "system.mtx";
  write_matrix_market(sys_path, sys.matrix);
  res.files.push_back(sys_path);
  manifest["system"] = {{"file", sys_path.filename().string()}, {"rows", sys.dim()}, {"nnz", sys.matrix.nonZeros()}};
  nlohmann::json jblocks = nlohmann::json::array();
  for (std::size_t i = 0; i < sys.block_names.size(); ++i)
    jblocks.push_back({{"name", sys.block_names[i]}, {"size", sys.block_sizes[i]}, {"offset", sys.offsets[i]}});
  manifest["blocks"] = jblocks;

  nlohmann::json jprec = nlohmann::json::array();
  for (std::size_t i = 0; i < precond.blocks().size(); ++i) {
    const auto& b = precond.blocks()[i];
    const auto path = config.export_dir / (b.name + ".mtx");
    write_matrix_market(path, precond.block_matrix(i));
    res.files.push_back(path);
    jprec.push_back({{"name", b.name},
                     {"file", path.filename().string()},
                     {"size", b.base.rows()},
                     {"offset", precond.offsets()[i]},
                     {"solver", b.kind == BlockDiagPreconditioner::Kind::kSparse ? "sparse-ldlt" : "kronecker"}});
  }
  manifest["preconditioner"] = jprec;

  res.manifest = config.export_dir / "manifest.json";
  std::ofstream out(res.manifest);
  if (!out) throw std::runtime_error(res.manifest.string() + ": cannot open for writing");
  out << manifest.dump(2) << '\n';
  return res;
}

}  // namespace msp
