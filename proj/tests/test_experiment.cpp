#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msp/errors.hpp"
#include "msp/experiment.hpp"
#include "msp/matrix_market.hpp"

namespace {

msp::RunConfig small() {
  msp::RunConfig c;
  c.levels = {1};
  c.alphas = {1.0, 1e-3};
  return c;
}

TEST(Experiment, ValidationRejectsBadConfigurations) {
  auto c = small();
  c.alphas.clear();
  EXPECT_THROW(msp::validate(c), msp::ConfigError);
  c = small();
  c.tol = 1.5;
  EXPECT_THROW(msp::validate(c), msp::ConfigError);
  c = small();
  c.degrees = {1};
  EXPECT_THROW(msp::validate(c), msp::ConfigError);
  c = small();
  c.alphas = {-1.0};
  EXPECT_THROW(msp::validate(c), msp::ConfigError);
  c = small();
  c.workers = 0;
  EXPECT_THROW(msp::validate(c), msp::ConfigError);
  c = small();
  c.levels = {4};
  try {
    msp::validate(c);
    FAIL() << "level 4 must need --allow-large";
  } catch (const msp::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("GB"), std::string::npos);
  }
  c.allow_large = true;
  EXPECT_NO_THROW(msp::validate(c));
}

TEST(Experiment, TableIsDeterministicAcrossWorkerCounts) {
  auto c = small();
  c.degrees = {2, 3};
  const auto serial = msp::run_table(c);
  c.workers = 3;
  const auto parallel = msp::run_table(c);
  ASSERT_EQ(serial.size(), 4u);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_TRUE(serial[i].error.empty()) << serial[i].error;
    EXPECT_EQ(serial[i].iterations, parallel[i].iterations);
    EXPECT_EQ(serial[i].final_relres, parallel[i].final_relres);
    EXPECT_EQ(serial[i].dofs, msp::dof_count([&] {
                msp::ProblemSpec s;
                s.degree = serial[i].degree;
                s.level = serial[i].level;
                return s;
              }()));
  }
}

TEST(Experiment, MemoryCapRefusesCells) {
  auto c = small();
  c.max_memory_gb = 1e-9;
  const auto rows = msp::run_table(c);
  for (const auto& r : rows) EXPECT_NE(r.error.find("refused"), std::string::npos);
  std::ostringstream csv;
  msp::write_rows_csv(rows, csv);
  EXPECT_NE(csv.str().find(",false,,"), std::string::npos);
}

TEST(Experiment, ReportsHaveTheDocumentedShape) {
  const auto rows = msp::run_table(small());
  std::ostringstream csv, md;
  msp::write_rows_csv(rows, csv);
  std::istringstream in(csv.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "problem,p,level,alpha,dofs,iterations,converged,final_relres,runtime_ms");
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(line.rfind("wave,2,1,", 0), 0u);
    ++n;
  }
  EXPECT_EQ(n, 2);
  msp::write_rows_markdown(rows, md);
  EXPECT_NE(md.str().find("| level | DoFs |"), std::string::npos);
}

TEST(Experiment, ExportWritesReimportableFiles) {
  auto c = small();
  c.export_dir = std::filesystem::temp_directory_path() / "msp_export_test";
  std::filesystem::remove_all(c.export_dir);
  const auto res = msp::export_system(c);
  EXPECT_EQ(res.files.size(), 6u);
  for (const auto& f : res.files) EXPECT_TRUE(std::filesystem::exists(f)) << f;
  std::ifstream in(res.manifest);
  const auto manifest = nlohmann::json::parse(in);
  EXPECT_EQ(manifest["problem"], "wave");
  EXPECT_EQ(manifest["random_start_generator"], msp::kRandomStartGenerator);
  const auto sys = msp::read_matrix_market(c.export_dir / "system.mtx");
  EXPECT_EQ(sys.rows(), manifest["dofs"].get<msp::Index>());
  EXPECT_TRUE(msp::is_exactly_symmetric(sys));
  EXPECT_EQ(manifest["preconditioner"].size(), 5u);
}

TEST(Experiment, UnknownSuiteIsAConfigError) {
  auto c = small();
  c.suite = "nonsense";
  EXPECT_THROW(msp::run_verify(c), msp::ConfigError);
}

}  // namespace
