#include <cmath>

#include "splitfun/errors.hpp"
#include "splitfun/expfam.hpp"
#include "splitfun/linalg.hpp"
#include "splitfun/models.hpp"
#include "test_util.hpp"

using namespace splitfun;
using namespace splitfun::testing;

namespace {

const double kE = std::exp(1.0);
const double kSig1 = kE / (1 + kE);

std::vector<ExpFamilySpec> families(std::size_t d) {
  return {ExpFamilySpec::bernoulli_product(d), ExpFamilySpec::gaussian_natural(d),
          ExpFamilySpec::spherical(d, PhiProfile::identity()),
          ExpFamilySpec::spherical(d, PhiProfile::logistic_like(1.5))};
}

}  // namespace

TEST_CASE("psi examples") {
  const auto b1 = ExpFamilySpec::bernoulli_product(1);
  CHECK(psi(b1, vec({0})) == 0.0);
  CHECK(psi(ExpFamilySpec::gaussian_natural(2), vec({3, 4})) == 12.5);
  CHECK(psi(b1, vec({1})) == doctest::Approx(std::log((1 + kE) / 2)).epsilon(1e-15));
  CHECK(psi(b1, vec({1})) == doctest::Approx(0.620115).epsilon(1e-6));
  // Large arguments stay finite.
  CHECK(std::isfinite(psi(b1, vec({800}))));
  CHECK(psi(b1, vec({800})) == doctest::Approx(800 - std::log(2.0)));
}

TEST_CASE("big_psi examples") {
  CHECK(big_psi(ExpFamilySpec::bernoulli_product(1), vec({0}))[0] == 0.5);
  CHECK(big_psi(ExpFamilySpec::gaussian_natural(2), vec({1, 2})) == vec({1, 2}));
  const Point th = vec({0.3, -1.2, 2.0});
  const Point out = big_psi(ExpFamilySpec::spherical(3, PhiProfile::identity()), th);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == doctest::Approx(th[i]).epsilon(1e-15));
  CHECK(big_psi(ExpFamilySpec::spherical(2, PhiProfile::logistic_like(1.0)), vec({0, 0})) ==
        vec({0, 0}));
}

TEST_CASE("big_psi_inverse examples") {
  const auto b1 = ExpFamilySpec::bernoulli_product(1);
  CHECK(big_psi_inverse(b1, vec({0.5}))[0] == 0.0);
  CHECK(big_psi_inverse(b1, vec({kSig1}))[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(big_psi_inverse(ExpFamilySpec::gaussian_natural(2), vec({4, 5})) == vec({4, 5}));
  CHECK_THROWS_AS(big_psi_inverse(b1, vec({1.0})), DomainError);
  CHECK_THROWS_AS(big_psi_inverse(b1, vec({0.0})), DomainError);
  const auto sph = ExpFamilySpec::spherical(2, PhiProfile::logistic_like(1.0));
  CHECK_THROWS_AS(big_psi_inverse(sph, vec({0.6, 0.8})), DomainError);
  CHECK(big_psi_inverse(sph, vec({0, 0})) == vec({0, 0}));
}

TEST_CASE("bisection oracle for the logit") {
  double lo = -10, hi = 10;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (1 / (1 + std::exp(-mid)) < kSig1 ? lo : hi) = mid;
  }
  CHECK(std::abs(big_psi_inverse(ExpFamilySpec::bernoulli_product(1), vec({kSig1}))[0] - lo) <=
        1e-10);
}

TEST_CASE("sigma_theta examples") {
  const Point b0 = sigma_theta(ExpFamilySpec::bernoulli_product(3), vec({0, 0, 0}));
  const auto full = to_full_matrix(b0.space(), b0.coords());
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(full[i * 3 + j] == (i == j ? 0.25 : 0.0));
  const Point g = sigma_theta(ExpFamilySpec::gaussian_natural(2), vec({5, 6}));
  CHECK(g == point_from_matrix(2, std::vector<double>{1, 0, 0, 1}));
  CHECK(sigma_theta(ExpFamilySpec::bernoulli_product(1), vec({1}))[0] ==
        doctest::Approx(0.196612).epsilon(1e-6));
}

TEST_CASE("psi_star and entropy examples") {
  const auto b1 = ExpFamilySpec::bernoulli_product(1);
  CHECK(psi_star(b1, vec({0.5})) == 0.0);
  CHECK(psi_star(ExpFamilySpec::gaussian_natural(2), vec({3, 4})) == doctest::Approx(12.5));
  CHECK(psi_star(b1, vec({kSig1})) == doctest::Approx(0.110944).epsilon(1e-6));
  CHECK(entropy(b1, vec({0})) == 0.0);
  CHECK(entropy(ExpFamilySpec::gaussian_natural(3), vec({0, 0, 0})) == 0.0);
  CHECK(entropy(b1, vec({1})) == doctest::Approx(-0.110944).epsilon(1e-6));
}

TEST_CASE("round trip, Fenchel identity and PSD covariance on grids") {
  for (const auto& fam : families(3)) {
    CAPTURE(fam.tag());
    RngStream rng(1, 0, static_cast<std::uint32_t>(fam.kind()));
    for (int i = 0; i < 100; ++i) {
      const Point th = random_point(fam.space(), rng, 1.5);
      const Point t = big_psi(fam, th);
      CHECK(norm(big_psi_inverse(fam, t) - th) <= 1e-10);
      const double resid = psi(fam, th) + psi_star(fam, t) - pairing(t, as_dual(th));
      CHECK(std::abs(resid) <= 1e-12 * std::max(1.0, std::abs(pairing(t, as_dual(th)))));
      const Point s = sigma_theta(fam, th);
      const auto full = to_full_matrix(s.space(), s.coords());
      CHECK(linalg::sym_eigen(full, 3).values.front() >= -1e-12);
    }
  }
}

TEST_CASE("mean map is strictly monotone") {
  for (const auto& fam : families(2)) {
    RngStream rng(2, 0, static_cast<std::uint32_t>(fam.kind()));
    for (int i = 0; i < 1000; ++i) {
      const Point a = random_point(fam.space(), rng, 2.0), b = random_point(fam.space(), rng, 2.0);
      CHECK(pairing(big_psi(fam, a) - big_psi(fam, b), as_dual(a - b)) > 0.0);
    }
  }
}

TEST_CASE("sigma_theta matches finite differences of big_psi") {
  const double h = 1e-5;
  for (const auto& fam : families(3)) {
    CAPTURE(fam.tag());
    RngStream rng(3, 0, static_cast<std::uint32_t>(fam.kind()));
    for (int rep = 0; rep < 20; ++rep) {
      const Point th = random_point(fam.space(), rng);
      const Point s = sigma_theta(fam, th);
      const auto full = to_full_matrix(s.space(), s.coords());
      for (std::size_t j = 0; j < 3; ++j) {
        std::vector<double> e(3, 0.0);
        e[j] = h;
        const Point step(fam.space(), e);
        const Point diff = (1.0 / (2 * h)) * (big_psi(fam, th + step) - big_psi(fam, th - step));
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(diff[i] - full[i * 3 + j]) <= 1e-6);
      }
    }
  }
}

TEST_CASE("sigma_theta matches the Monte Carlo covariance of T(X)") {
  for (const auto& fam : {ExpFamilySpec::bernoulli_product(2), ExpFamilySpec::gaussian_natural(2),
                          ExpFamilySpec::spherical(2, PhiProfile::identity())}) {
    CAPTURE(fam.tag());
    const Point th = vec({0.7, -0.4});
    const auto model = ModelSpec::expfam(fam, th);
    RngStream rng(4, 0, static_cast<std::uint32_t>(fam.kind()));
    const std::size_t n = 200000;
    const Dataset d = sample(model, n, rng);
    const Point mu = big_psi(fam, th);
    const Point s = sigma_theta(fam, th);
    const auto full = to_full_matrix(s.space(), s.coords());
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        double acc = 0.0, acc2 = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          const double z = (d.row(r)[i] - mu[i]) * (d.row(r)[j] - mu[j]);
          acc += z;
          acc2 += z * z;
        }
        const double m = acc / n;
        const double se = std::sqrt((acc2 / n - m * m) / n);
        CHECK(std::abs(m - full[i * 2 + j]) <= 4 * se);
      }
  }
}

TEST_CASE("sigma_theta_solve and sigma_theta_form are consistent") {
  for (const auto& fam : families(3)) {
    RngStream rng(5, 0, static_cast<std::uint32_t>(fam.kind()));
    for (int rep = 0; rep < 20; ++rep) {
      const Point th = random_point(fam.space(), rng);
      const Point v = random_point(fam.space(), rng), w = random_point(fam.space(), rng);
      const Point x = sigma_theta_solve(fam, th, v);
      CHECK(sigma_theta_form(fam, th, x, w) == doctest::Approx(inner(v, w)).epsilon(1e-10));
    }
  }
}

TEST_CASE("psi_third matches finite differences of the covariance form") {
  const double h = 1e-5;
  for (const auto& fam : families(3)) {
    CAPTURE(fam.tag());
    RngStream rng(6, 0, static_cast<std::uint32_t>(fam.kind()));
    for (int rep = 0; rep < 20; ++rep) {
      const Point th = rep == 0 ? Point::zeros(fam.space())
                                : (rep == 1 ? 1e-4 * random_point(fam.space(), rng)
                                            : random_point(fam.space(), rng));
      const Point u = random_point(fam.space(), rng), v = random_point(fam.space(), rng),
                  w = random_point(fam.space(), rng);
      const double fd = (sigma_theta_form(fam, th + h * w, u, v) -
                         sigma_theta_form(fam, th - h * w, u, v)) /
                        (2 * h);
      CHECK(std::abs(psi_third(fam, th, u, v, w) - fd) <= 1e-6 * (1 + std::abs(fd)));
    }
  }
}

TEST_CASE("phi profiles") {
  const auto p = PhiProfile::logistic_like(2.0);
  CHECK(p.value(0.0) == 0.0);
  CHECK(p.range_limit() == 2.0);
  CHECK(PhiProfile::identity().range_limit() == INFINITY);
  const double h = 1e-5;
  for (double rho : {0.1, 0.7, 2.5}) {
    CHECK((p.integral(rho + h) - p.integral(rho - h)) / (2 * h) ==
          doctest::Approx(p.value(rho)).epsilon(1e-8));
    CHECK((p.value(rho + h) - p.value(rho - h)) / (2 * h) ==
          doctest::Approx(p.derivative(1, rho)).epsilon(1e-8));
    CHECK((p.derivative(1, rho + h) - p.derivative(1, rho - h)) / (2 * h) ==
          doctest::Approx(p.derivative(2, rho)).epsilon(1e-6));
    CHECK((p.derivative(2, rho + h) - p.derivative(2, rho - h)) / (2 * h) ==
          doctest::Approx(p.derivative(3, rho)).epsilon(1e-6));
  }
  CHECK_THROWS(PhiProfile::logistic_like(0.0));
}
