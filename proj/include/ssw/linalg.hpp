#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ssw/scalar.hpp"

namespace ssw {

// Sparse row: column index -> nonzero entry.
using SparseRow = std::map<int, Scalar>;

// Exact solve of rows * x = rhs over Q or Q(i). Free variables are set to
// zero; nullopt when the system is inconsistent.
std::optional<std::vector<Scalar>> solve_exact(const std::vector<SparseRow>& rows,
                                               const std::vector<Scalar>& rhs, int ncols);

std::size_t rank_exact(const std::vector<SparseRow>& rows);
// Basis of {x : rows * x = 0}.
std::vector<std::vector<Scalar>> nullspace(const std::vector<SparseRow>& rows, int ncols);

}  // namespace ssw
