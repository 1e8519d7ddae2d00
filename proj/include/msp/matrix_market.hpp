#pragma once

#include <filesystem>

#include "msp/splines.hpp"

namespace msp {

/// True when m equals its transpose entry by entry.
bool is_exactly_symmetric(const SparseMatrix& m);

/// Coordinate real format; symmetric matrices are stored as their lower triangle
/// under the "symmetric" qualifier, everything else as "general".
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m);
SparseMatrix read_matrix_market(const std::filesystem::path& path);

}  // namespace msp
