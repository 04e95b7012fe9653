#include <cmath>

#include "splitfun/linalg.hpp"
#include "test_util.hpp"

using namespace splitfun;

TEST_CASE("eigenvalues of a 2x2 matrix") {
  const std::vector<double> a{2, 1, 1, 2};
  const auto e = linalg::sym_eigen(a, 2);
  CHECK(e.values[0] == doctest::Approx(1).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(3).epsilon(1e-14));
  CHECK(linalg::sym_operator_norm(a, 2) == doctest::Approx(3));
  CHECK(linalg::sym_nuclear_norm(a, 2) == doctest::Approx(4));
}

TEST_CASE("diagonal input is returned sorted") {
  const std::vector<double> a{3, 0, 0, 0, -4, 0, 0, 0, 1};
  const auto e = linalg::sym_eigen(a, 3);
  CHECK(e.values == std::vector<double>{-4, 1, 3});
  CHECK(linalg::sym_operator_norm(a, 3) == 4.0);
}

TEST_CASE("decomposition reconstructs random symmetric matrices") {
  RngStream rng(5, 0, 0);
  for (std::size_t n : {1u, 2u, 5u, 12u}) {
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) a[i * n + j] = a[j * n + i] = rng.normal();
    const auto e = linalg::sym_eigen(a, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double rec = 0.0, orth = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          rec += e.vectors[i * n + k] * e.values[k] * e.vectors[j * n + k];
          orth += e.vectors[k * n + i] * e.vectors[k * n + j];
        }
        CHECK(rec == doctest::Approx(a[i * n + j]).epsilon(1e-12).scale(1.0));
        CHECK(orth == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
      }
    for (std::size_t k = 1; k < n; ++k) CHECK(e.values[k - 1] <= e.values[k]);
  }
}

TEST_CASE("matmul, matvec and trace") {
  const std::vector<double> a{1, 2, 3, 4}, b{0, 1, 1, 0};
  CHECK(linalg::matmul(a, b, 2) == std::vector<double>{2, 1, 4, 3});
  CHECK(linalg::matvec(a, std::vector<double>{1, 1}, 2) == std::vector<double>{3, 7});
  CHECK(linalg::trace(a, 2) == 5.0);
}
