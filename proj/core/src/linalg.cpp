#include "splitfun/linalg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "splitfun/errors.hpp"

namespace splitfun::linalg {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

ConstMatrixMap square(std::span<const double> a, std::size_t n, const char* what) {
  if (a.size() != n * n) throw ContractError(std::string(what) + ": size mismatch");
  const auto k = static_cast<Eigen::Index>(n);
  return ConstMatrixMap(a.data(), k, k);
}

}  // namespace

SymEigen sym_eigen(std::span<const double> in, std::size_t n) {
  const auto a = square(in, n, "sym_eigen");
  const Eigen::SelfAdjointEigenSolver<RowMatrix> solver(a);
  if (solver.info() != Eigen::Success)
    throw SolverError("sym_eigen: eigen-decomposition did not converge");
  SymEigen out;
  out.values.assign(solver.eigenvalues().begin(), solver.eigenvalues().end());
  out.vectors.resize(n * n);
  Eigen::Map<RowMatrix>(out.vectors.data(), a.rows(), a.cols()) = solver.eigenvectors();
  return out;
}

double sym_operator_norm(std::span<const double> a, std::size_t n) {
  const auto values = sym_eigen(a, n).values;
  return n == 0 ? 0.0 : std::max(std::abs(values.front()), std::abs(values.back()));
}

double sym_nuclear_norm(std::span<const double> a, std::size_t n) {
  double s = 0.0;
  for (double l : sym_eigen(a, n).values) s += std::abs(l);
  return s;
}

std::vector<double> matmul(std::span<const double> a, std::span<const double> b,
                           std::size_t n) {
  std::vector<double> c(n * n);
  const auto k = static_cast<Eigen::Index>(n);
  Eigen::Map<RowMatrix>(c.data(), k, k).noalias() =
      square(a, n, "matmul") * square(b, n, "matmul");
  return c;
}

double trace(std::span<const double> a, std::size_t n) { return square(a, n, "trace").trace(); }

std::vector<double> matvec(std::span<const double> a, std::span<const double> x,
                           std::size_t n) {
  if (x.size() != n) throw ContractError("matvec: size mismatch");
  std::vector<double> y(n);
  Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n)).noalias() =
      square(a, n, "matvec") * ConstVectorMap(x.data(), static_cast<Eigen::Index>(n));
  return y;
}

}  // namespace splitfun::linalg
