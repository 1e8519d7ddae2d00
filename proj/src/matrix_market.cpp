#include "msp/matrix_market.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace msp {

namespace {

std::runtime_error io_error(const std::filesystem::path& path, const std::string& what) {
  return std::runtime_error(path.string() + ": " + what);
}

std::string shortest(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

bool is_exactly_symmetric(const SparseMatrix& m) {
  if (m.rows() != m.cols()) return false;
  const SparseMatrix t = m.transpose();
  SparseMatrix a = m, b = t;
  a.prune(0.0);
  b.prune(0.0);
  if (a.nonZeros() != b.nonZeros()) return false;
  for (Index k = 0; k < a.outerSize(); ++k) {
    SparseMatrix::InnerIterator ia(a, k), ib(b, k);
    for (; ia && ib; ++ia, ++ib)
      if (ia.index() != ib.index() || ia.value() != ib.value()) return false;
    if (ia || ib) return false;
  }
  return true;
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw io_error(path, "cannot open for writing");
  const bool sym = is_exactly_symmetric(m);
  std::vector<std::tuple<Index, Index, double>> entries;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      if (it.value() == 0.0) continue;
      if (sym && it.row() < it.col()) continue;
      entries.emplace_back(it.row(), it.col(), it.value());
    }
  out << "%%MatrixMarket matrix coordinate real " << (sym ? "symmetric" : "general") << '\n';
  out << m.rows() << ' ' << m.cols() << ' ' << entries.size() << '\n';
  for (const auto& [r, c, v] : entries) out << r + 1 << ' ' << c + 1 << ' ' << shortest(v) << '\n';
  if (!out) throw io_error(path, "write failed");
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error(path, "cannot open for reading");
  std::string line;
  if (!std::getline(in, line)) throw io_error(path, "empty file");
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate")
    throw io_error(path, "not a coordinate Matrix Market file");
  field = lower(field);
  symmetry = lower(symmetry);
  if (field != "real" && field != "integer" && field != "double") throw io_error(path, "unsupported field " + field);
  if (symmetry != "general" && symmetry != "symmetric") throw io_error(path, "unsupported symmetry " + symmetry);

  while (std::getline(in, line))
    if (!line.empty() && line[0] != '%') break;
  Index rows = 0, cols = 0, nnz = 0;
  if (!(std::istringstream(line) >> rows >> cols >> nnz)) throw io_error(path, "bad size line");

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(symmetry == "symmetric" ? 2 * nnz : nnz);
  for (Index k = 0; k < nnz; ++k) {
    Index r = 0, c = 0;
    double v = 0;
    if (!(in >> r >> c >> v)) throw io_error(path, "truncated entry list");
    if (r < 1 || r > rows || c < 1 || c > cols) throw io_error(path, "entry out of range");
    trips.emplace_back(r - 1, c - 1, v);
    if (symmetry == "symmetric" && r != c) trips.emplace_back(c - 1, r - 1, v);
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

}  // namespace msp
