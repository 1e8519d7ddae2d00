#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "msp/errors.hpp"
#include "msp/experiment.hpp"

namespace {

enum Exit { kOk = 0, kFailed = 1, kConfig = 2 };

struct Options {
  std::string problem = "wave";
  std::string format = "csv";
  std::string output;
  std::string history;
  msp::RunConfig run;
};

void add_grid(CLI::App* app, Options& o) {
  app->add_option("--problem", o.problem, "heat or wave")->check(CLI::IsMember({"heat", "wave"}));
  app->add_option("--degree,--degrees", o.run.degrees, "spline degree(s) p");
  app->add_option("--level,--levels", o.run.levels, "refinement level(s)");
  app->add_option("--alpha,--alphas", o.run.alphas, "regularization parameter(s)");
  app->add_option("--tol", o.run.tol, "relative residual reduction")->capture_default_str();
  app->add_option("--seed", o.run.seed, "seed of the random start vector")->capture_default_str();
  app->add_option("--max-memory-gb", o.run.max_memory_gb, "refuse cells whose estimate exceeds this")
      ->capture_default_str();
  app->add_flag("--allow-large", o.run.allow_large, "permit level >= 4");
}

void add_output(CLI::App* app, Options& o) {
  app->add_option("--output", o.output, "write the report here instead of stdout");
  app->add_option("--format", o.format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown"}));
}

template <typename Writer>
void emit(const Options& o, Writer&& write) {
  if (o.output.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(o.output);
  if (!out) throw std::runtime_error(o.output + ": cannot open for writing");
  write(out);
}

void finish_config(Options& o) {
  o.run.problem = msp::parse_problem_kind(o.problem);
  o.run.format = o.format == "markdown" ? msp::OutputFormat::kMarkdown : msp::OutputFormat::kCsv;
  msp::validate(o.run);
  for (int p : o.run.degrees)
    for (int l : o.run.levels)
      if (l >= 4) {
        msp::ProblemSpec s;
        s.kind = o.run.problem;
        s.degree = p;
        s.level = l;
        std::cerr << "p=" << p << " level=" << l << ": " << msp::dof_count(s) << " dofs, estimated "
                  << msp::estimate_memory_bytes(s) / 1e9 << " GB\n";
      }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-diagonal preconditioned MINRES for space-time optimal control"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "solve one configuration");
  add_grid(run, o);
  add_output(run, o);
  run->add_option("--history", o.history, "write the residual history as CSV");

  auto* table = app.add_subcommand("table", "iteration table over degrees, levels and alphas");
  add_grid(table, o);
  add_output(table, o);
  table->add_option("--workers", o.run.workers, "concurrent cells")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "run verification suites");
  verify->add_option("--suite", o.run.suite, "schur | constants | brezzi | inclusion | state-norm | all")
      ->check(CLI::IsMember({"schur", "constants", "brezzi", "inclusion", "state-norm", "all"}));
  verify->add_option("--seed", o.run.seed, "seed for random instances");
  add_output(verify, o);

  auto* exp = app.add_subcommand("export", "write the system and preconditioner blocks as Matrix Market");
  add_grid(exp, o);
  exp->add_option("--export-dir", o.run.export_dir, "target directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    finish_config(o);
    if (run->parsed()) {
      msp::ProblemSpec spec;
      spec.kind = o.run.problem;
      spec.degree = o.run.degrees.front();
      spec.level = o.run.levels.front();
      spec.alpha = o.run.alphas.front();
      spec.seed = o.run.seed;
      msp::MinresReport report;
      const auto row = msp::run_single(spec, o.run, &report);
      emit(o, [&](std::ostream& out) {
        if (o.run.format == msp::OutputFormat::kMarkdown)
          msp::write_rows_markdown({row}, out);
        else
          msp::write_rows_csv({row}, out);
      });
      if (!o.history.empty()) {
        std::ofstream h(o.history);
        if (!h) throw std::runtime_error(o.history + ": cannot open for writing");
        msp::write_residual_csv(report, h);
      }
      return row.converged ? kOk : kFailed;
    }
    if (table->parsed()) {
      const auto rows = msp::run_table(o.run);
      emit(o, [&](std::ostream& out) {
        if (o.run.format == msp::OutputFormat::kMarkdown)
          msp::write_rows_markdown(rows, out);
        else
          msp::write_rows_csv(rows, out);
      });
      bool ok = true;
      for (const auto& r : rows) {
        if (!r.error.empty()) std::cerr << "p=" << r.degree << " level=" << r.level << " alpha=" << r.alpha << ": "
                                        << r.error << '\n';
        ok = ok && r.error.empty() && r.converged;
      }
      return ok ? kOk : kFailed;
    }
    if (verify->parsed()) {
      const auto results = msp::run_verify(o.run);
      emit(o, [&](std::ostream& out) {
        if (o.run.format == msp::OutputFormat::kMarkdown)
          msp::write_suite_markdown(results, out);
        else
          msp::write_suite_csv(results, out);
      });
      bool ok = true;
      for (const auto& r : results) ok = ok && r.passed();
      return ok ? kOk : kFailed;
    }
    if (exp->parsed()) {
      const auto res = msp::export_system(o.run);
      for (const auto& f : res.files) std::cout << f.string() << '\n';
      std::cout << res.manifest.string() << '\n';
      return kOk;
    }
  } catch (const msp::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kOk;
}
