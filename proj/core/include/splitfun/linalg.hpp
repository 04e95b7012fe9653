#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace splitfun::linalg {

/// Eigen-decomposition of a dense symmetric matrix. `vectors` is row-major
/// n x n with eigenvector j stored in column j; values are ascending.
struct SymEigen {
  std::vector<double> values;
  std::vector<double> vectors;
};

/// Input must be symmetric, row-major n x n; only the lower triangle is read.
SymEigen sym_eigen(std::span<const double> a, std::size_t n);

double sym_operator_norm(std::span<const double> a, std::size_t n);
double sym_nuclear_norm(std::span<const double> a, std::size_t n);

std::vector<double> matmul(std::span<const double> a, std::span<const double> b,
                           std::size_t n);
double trace(std::span<const double> a, std::size_t n);

/// y = A x for square row-major A.
std::vector<double> matvec(std::span<const double> a, std::span<const double> x,
                           std::size_t n);

}  // namespace splitfun::linalg
