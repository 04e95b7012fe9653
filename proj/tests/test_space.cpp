#include <algorithm>
#include <cmath>
#include <numbers>

#include "splitfun/errors.hpp"
#include "splitfun/linalg.hpp"
#include "splitfun/space.hpp"
#include "test_util.hpp"

using namespace splitfun;
using namespace splitfun::testing;

namespace {

Point diag2(double a, double b) { return point_from_matrix(2, std::vector<double>{a, 0, 0, b}); }

// Max of |y^T P y| over unit y by repeated grid refinement on the sphere.
double brute_force_opnorm(const Point& p) {
  const std::size_t side = p.space().side();
  const auto full = to_full_matrix(p.space(), p.coords());
  auto quad = [&](const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < side; ++i)
      for (std::size_t j = 0; j < side; ++j) s += y[i] * full[i * side + j] * y[j];
    return std::abs(s);
  };
  if (side == 2) {
    double best_a = 0.0, best = -1.0, lo = 0.0, hi = std::numbers::pi;
    for (int round = 0; round < 8; ++round) {
      const int steps = 400;
      for (int i = 0; i <= steps; ++i) {
        const double a = lo + (hi - lo) * i / steps;
        const double v = quad({std::cos(a), std::sin(a)});
        if (v > best) best = v, best_a = a;
      }
      const double w = (hi - lo) / steps * 2;
      lo = best_a - w, hi = best_a + w;
    }
    return best;
  }
  double best = -1.0, ba = 0.0, bb = 0.0;
  double alo = 0.0, ahi = std::numbers::pi, blo = 0.0, bhi = 2 * std::numbers::pi;
  for (int round = 0; round < 8; ++round) {
    const int steps = 120;
    for (int i = 0; i <= steps; ++i)
      for (int j = 0; j <= steps; ++j) {
        const double a = alo + (ahi - alo) * i / steps, b = blo + (bhi - blo) * j / steps;
        const double v =
            quad({std::sin(a) * std::cos(b), std::sin(a) * std::sin(b), std::cos(a)});
        if (v > best) best = v, ba = a, bb = b;
      }
    const double wa = (ahi - alo) / steps * 2, wb = (bhi - blo) / steps * 2;
    alo = ba - wa, ahi = ba + wa, blo = bb - wb, bhi = bb + wb;
  }
  return best;
}

}  // namespace

TEST_CASE("norm examples") {
  CHECK(norm(vec({3, 4})) == doctest::Approx(5).epsilon(1e-15));
  CHECK(norm(diag2(3, -4)) == doctest::Approx(4).epsilon(1e-12));
  const Point prod(SpaceDescriptor::product({1, 1}), {3, 4});
  CHECK(norm(prod) == doctest::Approx(5).epsilon(1e-15));
}

TEST_CASE("dual norm examples") {
  CHECK(dual_norm(dual_from_matrix(2, std::vector<double>{1, 0, 0, -2})) ==
        doctest::Approx(3).epsilon(1e-12));
  CHECK(dual_norm(dvec({0, 0})) == 0.0);
  CHECK(dual_norm(dual_from_matrix(2, std::vector<double>{1, 0, 0, 1})) ==
        doctest::Approx(2).epsilon(1e-12));
}

TEST_CASE("pairing examples") {
  CHECK(pairing(vec({1, 2}), dvec({3, 4})) == 11.0);
  const std::vector<double> eye{1, 0, 0, 1};
  CHECK(pairing(point_from_matrix(2, eye), dual_from_matrix(2, eye)) == doctest::Approx(2));
  CHECK(pairing(vec({7, -2}), dvec({0, 0})) == 0.0);
}

TEST_CASE("pairing rejects mismatched spaces") {
  CHECK_THROWS_AS(pairing(vec({1, 2}), dvec({1, 2, 3})), ContractError);
  const Point prod(SpaceDescriptor::product({1, 1}), {1, 2});
  CHECK_THROWS_AS(pairing(prod, dvec({1, 2})), ContractError);
}

TEST_CASE("non-finite coordinates are rejected") {
  CHECK_THROWS_AS(vec({1, std::nan("")}), DomainError);
  CHECK_THROWS_AS(vec({INFINITY}), DomainError);
  CHECK_THROWS_AS(Point(SpaceDescriptor::euclidean(2), {1, 2, 3}), ContractError);
}

TEST_CASE("invalid descriptors") {
  CHECK_THROWS(SpaceDescriptor::euclidean(0));
  CHECK_THROWS(SpaceDescriptor::product({2, 0}));
  CHECK_THROWS(SpaceDescriptor::sym_matrix(0));
}

TEST_CASE("sym_matrix packing") {
  const auto s = SpaceDescriptor::sym_matrix(3);
  CHECK(s.dim() == 6);
  CHECK(packed_index(3, 0, 0) == 0);
  CHECK(packed_index(3, 0, 2) == 2);
  CHECK(packed_index(3, 1, 1) == 3);
  CHECK(packed_index(3, 2, 2) == 5);
  CHECK(SpaceDescriptor::sym_matrix(1) == SpaceDescriptor::euclidean(1));

  const std::vector<double> a{1, 2, 3, 2, 5, 6, 3, 6, 9};
  const Point p = point_from_matrix(3, a);
  CHECK(p[1] == doctest::Approx(2 * std::sqrt(2.0)));
  const auto back = to_full_matrix(p.space(), p.coords());
  for (std::size_t i = 0; i < 9; ++i) CHECK(back[i] == doctest::Approx(a[i]).epsilon(1e-15));

  CHECK_THROWS_AS(point_from_matrix(2, std::vector<double>{1, 2, 3, 4}), ContractError);
}

TEST_CASE("packed pairing equals the trace pairing") {
  RngStream rng(1, 0, 0);
  for (std::size_t side : {2u, 3u, 5u}) {
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> a(side * side), b(side * side);
      for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = i; j < side; ++j) {
          a[i * side + j] = a[j * side + i] = rng.normal();
          b[i * side + j] = b[j * side + i] = rng.normal();
        }
      const double direct = linalg::trace(linalg::matmul(a, b, side), side);
      CHECK(pairing(point_from_matrix(side, a), dual_from_matrix(side, b)) ==
            doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("norm axioms and duality inequality on random pairs") {
  RngStream rng(2, 0, 0);
  const SpaceDescriptor spaces[] = {SpaceDescriptor::euclidean(4),
                                    SpaceDescriptor::product({1, 3, 2}),
                                    SpaceDescriptor::sym_matrix(3)};
  for (const auto& s : spaces) {
    CHECK(norm(Point::zeros(s)) == 0.0);
    for (int i = 0; i < 1000; ++i) {
      const Point a = random_point(s, rng), b = random_point(s, rng);
      const double lambda = 3.0 * rng.normal();
      CHECK(norm(a + b) <= norm(a) + norm(b) + 1e-12);
      CHECK(norm(lambda * a) == doctest::Approx(std::abs(lambda) * norm(a)).epsilon(1e-12));
      CHECK(norm(a) > 0.0);
      const DualElement u = random_dual(s, rng);
      CHECK(std::abs(pairing(a, u)) <= norm(a) * dual_norm(u) * (1 + 1e-12));
    }
  }
}

TEST_CASE("operator norm agrees with brute-force maximization") {
  RngStream rng(3, 0, 0);
  for (std::size_t side : {2u, 3u}) {
    for (int rep = 0; rep < 10; ++rep) {
      const Point p = random_point(SpaceDescriptor::sym_matrix(side), rng);
      CHECK(norm(p) == doctest::Approx(brute_force_opnorm(p)).epsilon(1e-6));
    }
  }
}

TEST_CASE("Riesz maps and arithmetic") {
  const Point a = vec({1, 2}), b = vec({3, -1});
  CHECK(as_point(as_dual(a)) == a);
  CHECK((a + b) == vec({4, 1}));
  CHECK((a - b) == vec({-2, 3}));
  CHECK((2.0 * a) == vec({2, 4}));
  CHECK(inner(a, b) == 1.0);
  Point c = a;
  CHECK_THROWS_AS(c += Point(SpaceDescriptor::euclidean(3), {0, 0, 0}), ContractError);
}
