#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "msp/assembly.hpp"
#include "msp/krylov.hpp"
#include "msp/verify.hpp"

namespace msp {

enum class OutputFormat { kCsv, kMarkdown };

struct RunConfig {
  ProblemKind problem = ProblemKind::kWave;
  std::vector<int> degrees{2};
  std::vector<int> levels{2};
  std::vector<double> alphas{1e-3};
  double tol = 1e-8;
  std::uint64_t seed = 42;
  std::string suite = "all";
  OutputFormat format = OutputFormat::kCsv;
  std::filesystem::path export_dir = "export";
  double max_memory_gb = 8.0;
  int workers = 1;
  bool allow_large = false;  // permits level >= 4
};

/// Throws ConfigError on empty lists, tolerances outside (0,1) and similar.
void validate(const RunConfig& config);

struct RunRow {
  ProblemKind problem = ProblemKind::kWave;
  int degree = 0;
  int level = 0;
  double alpha = 0;
  Index dofs = 0;
  int iterations = 0;
  bool converged = false;
  double final_relres = 0;
  double runtime_ms = 0;
  std::string error;  // non-empty when the cell was refused or failed
};

/// One MINRES solve with homogeneous data from a seeded random start.
RunRow run_single(const ProblemSpec& spec, const RunConfig& config, MinresReport* report = nullptr);

/// All (p, level, alpha) cells; cells of one (p, level) share the assembly, cells run on
/// config.workers threads and come back in grid order.
std::vector<RunRow> run_table(const RunConfig& config);

void write_rows_csv(const std::vector<RunRow>& rows, std::ostream& out);
/// One table per degree: rows are levels, columns are alphas, plus the DoF count.
void write_rows_markdown(const std::vector<RunRow>& rows, std::ostream& out);

std::vector<SuiteResult> run_verify(const RunConfig& config);

struct ExportResult {
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest;
};
/// Matrix Market files for the system and each preconditioner block, plus manifest.json.
ExportResult export_system(const RunConfig& config);

}  // namespace msp
