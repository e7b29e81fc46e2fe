#ifndef NORMFLOW_SRC_LATTICE_HPP
#define NORMFLOW_SRC_LATTICE_HPP

#include <optional>
#include <span>
#include <vector>

#include <normflow/rate.hpp>

// Small exact linear algebra over Q for integer lattices of dimension <= 8.
namespace normflow::lattice
{

using matrix = std::vector<std::vector<rational>>;

matrix from_int_rows(const std::vector<std::vector<int>> &rows);

int rank(matrix m);

// Coefficients x with sum_i x_i rows[i] = target, if any.
std::optional<std::vector<rational>> solve_in_span(const matrix &rows, std::span<const int> target);

// Basis of the rational null space {x : rows x = 0}, each scaled to a
// primitive integer vector.
std::vector<std::vector<std::int64_t>> integer_kernel(const matrix &rows, std::size_t cols);

std::int64_t gcd_all(std::span<const std::int64_t> v);

} // namespace normflow::lattice

#endif
