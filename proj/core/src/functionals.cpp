#include "splitfun/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "splitfun/errors.hpp"
#include "splitfun/linalg.hpp"

namespace splitfun {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_space(const SpaceDescriptor& space, const SpaceDescriptor& other,
                   const char* what) {
  if (!(space == other))
    throw ContractError(std::string(what) + " does not live in the functional's space");
}

void require_matrix_space(const SpaceDescriptor& space, const char* what) {
  if (space.kind() != SpaceKind::sym_matrix && space.dim() != 1)
    throw ContractError(std::string(what) + " needs a symmetric-matrix space");
}

std::size_t matrix_side(const SpaceDescriptor& space) {
  return space.kind() == SpaceKind::sym_matrix ? space.side() : 1;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// --- ridge profiles g(x), f(t) = g(<t,u>) -------------------------------

double bump_derivative(int k, double x) {
  const double y = 1.0 - x * x;
  if (y <= 0.0) return 0.0;
  const double phi = std::exp(1.0 - 1.0 / y);
  if (k == 0 || phi == 0.0) return phi;
  const double y2 = y * y;
  const double e1 = -2.0 * x / y2;
  const double e1p = -2.0 / y2 - 8.0 * x * x / (y2 * y);
  const double e1pp = -24.0 * x / (y2 * y) - 48.0 * x * x * x / (y2 * y2);
  switch (k) {
    case 1:
      return phi * e1;
    case 2:
      return phi * (e1 * e1 + e1p);
    case 3:
      return phi * (e1 * e1 * e1 + 3.0 * e1 * e1p + e1pp);
  }
  throw UnsupportedOrderError("bump profile derivatives cover orders 0..3");
}

double falling_factorial(int q, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= static_cast<double>(q - i);
  return r;
}

// k-th derivative of the ridge profile at x.
double ridge_profile(const FunctionalVariant& v, int k, double x) {
  return std::visit(
      overloaded{
          [&](const fn::Linear&) { return k == 0 ? x : (k == 1 ? 1.0 : 0.0); },
          [&](const fn::MatrixLinear&) { return k == 0 ? x : (k == 1 ? 1.0 : 0.0); },
          [&](const fn::MonomialPairing& m) {
            if (k > m.degree) return 0.0;
            return falling_factorial(m.degree, k) * std::pow(x, m.degree - k);
          },
          [&](const fn::SinPairing&) {
            switch (k % 4) {
              case 0:
                return std::sin(x);
              case 1:
                return std::cos(x);
              case 2:
                return -std::sin(x);
              default:
                return -std::cos(x);
            }
          },
          [&](const fn::BumpPairing& b) {
            return bump_derivative(k, (x - b.center) / b.width) / std::pow(b.width, k);
          },
          [](const auto&) -> double { throw ContractError("not a ridge functional"); }},
      v);
}

const DualElement* ridge_direction(const FunctionalVariant& v) {
  return std::visit(
      overloaded{[](const fn::Linear& x) { return &x.u; },
                 [](const fn::MatrixLinear& x) { return &x.u; },
                 [](const fn::MonomialPairing& x) { return &x.u; },
                 [](const fn::SinPairing& x) { return &x.u; },
                 [](const fn::BumpPairing& x) { return &x.u; },
                 [](const auto&) -> const DualElement* { return nullptr; }},
      v);
}

// --- smooth_sqrt: f = h(<t,t>), h(s) = sqrt(1 + s) ----------------------
//
// Faa di Bruno for a quadratic inner map: the only non-zero derivatives of
// q(t) = <t,t> are q'[v] = 2<t,v> and q''[u,v] = 2<u,v>, so f^(k) is a sum
// over partitions of the k slots into singletons and pairs.

double sqrt_profile_derivative(int j, double s) {
  double c = 1.0;
  for (int i = 0; i < j; ++i) c *= 0.5 - i;
  return c * std::pow(1.0 + s, 0.5 - j);
}

double smooth_sqrt_derivative(const Point& t, const std::vector<const Point*>& dirs) {
  const std::size_t k = dirs.size();
  const double s = inner(t, t);
  std::vector<double> lin(k);
  for (std::size_t i = 0; i < k; ++i) lin[i] = 2.0 * inner(t, *dirs[i]);

  std::vector<bool> used(k, false);
  double total = 0.0;
  // depth-first over partitions; `blocks` counts singletons + pairs so far
  auto recurse = [&](auto&& self, std::size_t first, int blocks, double weight) -> void {
    while (first < k && used[first]) ++first;
    if (first == k) {
      total += sqrt_profile_derivative(blocks, s) * weight;
      return;
    }
    used[first] = true;
    self(self, first + 1, blocks + 1, weight * lin[first]);
    for (std::size_t j = first + 1; j < k; ++j) {
      if (used[j]) continue;
      used[j] = true;
      self(self, first + 1, blocks + 1, weight * 2.0 * inner(*dirs[first], *dirs[j]));
      used[j] = false;
    }
    used[first] = false;
  };
  recurse(recurse, 0, 0, 1.0);
  return total;
}

// --- symmetric-matrix helpers --------------------------------------------

std::vector<double> full(const Point& p) { return to_full_matrix(p.space(), p.coords()); }
std::vector<double> full(const DualElement& u) {
  return to_full_matrix(u.space(), u.coords());
}

double trace_product(const std::vector<double>& a, const std::vector<double>& b,
                     std::size_t n) {
  // tr(A B) for square row-major A, B
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * b[j * n + i];
  return s;
}

// --- analytic derivative dispatch ------------------------------------------

double analytic(const FunctionalSpec& f, int k, const Point& t,
                const std::vector<const Point*>& dirs) {
  const auto& v = f.variant();
  if (const DualElement* u = ridge_direction(v)) {
    const double x = pairing(t, *u);
    double prod = 1.0;
    for (const Point* d : dirs) prod *= pairing(*d, *u);
    return ridge_profile(v, k, x) * prod;
  }
  return std::visit(
      overloaded{
          [&](const fn::SquaredNorm&) -> double {
            if (k == 0) return inner(t, t);
            if (k == 1) return 2.0 * inner(t, *dirs[0]);
            if (k == 2) return 2.0 * inner(*dirs[0], *dirs[1]);
            return 0.0;
          },
          [&](const fn::AffineQuadratic& q) -> double {
            const std::size_t n = t.size();
            if (k == 0) {
              const auto at = linalg::matvec(q.a, t.coords(), n);
              return dot(at, t.coords()) + pairing(t, q.b) + q.c;
            }
            if (k == 1) {
              const auto at = linalg::matvec(q.a, t.coords(), n);
              return 2.0 * dot(at, dirs[0]->coords()) + pairing(*dirs[0], q.b);
            }
            if (k == 2) {
              const auto av = linalg::matvec(q.a, dirs[0]->coords(), n);
              return 2.0 * dot(av, dirs[1]->coords());
            }
            return 0.0;
          },
          [&](const fn::SmoothSqrt&) -> double {
            if (k == 0) return std::sqrt(1.0 + inner(t, t));
            return smooth_sqrt_derivative(t, dirs);
          },
          [&](const fn::MatrixQuadratic& m) -> double {
            const std::size_t n = matrix_side(t.space());
            const auto uf = full(m.u);
            const auto tf = full(t);
            if (k == 0) return trace_product(linalg::matmul(tf, tf, n), uf, n);
            if (k == 1) {
              const auto h = full(*dirs[0]);
              return trace_product(linalg::matmul(tf, h, n), uf, n) +
                     trace_product(linalg::matmul(h, tf, n), uf, n);
            }
            if (k == 2) {
              const auto h1 = full(*dirs[0]);
              const auto h2 = full(*dirs[1]);
              return trace_product(linalg::matmul(h1, h2, n), uf, n) +
                     trace_product(linalg::matmul(h2, h1, n), uf, n);
            }
            return 0.0;
          },
          [&](const fn::ExpFamEntropy& e) -> double {
            if (k == 0) return -psi_star(e.family, t);
            const Point theta = big_psi_inverse(e.family, t);
            if (k == 1) return -inner(theta, *dirs[0]);
            const Point w0 = sigma_theta_solve(e.family, theta, *dirs[0]);
            if (k == 2) return -inner(w0, *dirs[1]);
            const Point w1 = sigma_theta_solve(e.family, theta, *dirs[1]);
            const Point w2 = sigma_theta_solve(e.family, theta, *dirs[2]);
            return psi_third(e.family, theta, w0, w1, w2);
          },
          [](const auto&) -> double { throw ContractError("unhandled functional"); }},
      v);
}

std::vector<const Point*> canonical_order(std::span<const Point> dirs) {
  std::vector<const Point*> out;
  out.reserve(dirs.size());
  for (const Point& d : dirs) out.push_back(&d);
  std::sort(out.begin(), out.end(), [](const Point* a, const Point* b) {
    const auto ca = a->coords();
    const auto cb = b->coords();
    return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
  });
  return out;
}

void check_call(const FunctionalSpec& f, int k, const Point& t,
                std::span<const Point> dirs) {
  if (k < 0) throw ContractError("derivative order must be >= 0");
  if (dirs.size() != static_cast<std::size_t>(k))
    throw ContractError("derivative of order " + std::to_string(k) + " needs " +
                        std::to_string(k) + " directions, got " +
                        std::to_string(dirs.size()));
  require_space(f.space(), t.space(), "evaluation point");
  for (const Point& d : dirs) require_space(f.space(), d.space(), "direction");
}

}  // namespace

FunctionalSpec::FunctionalSpec(SpaceDescriptor space, FunctionalVariant variant,
                               std::optional<double> declared_sup_norm,
                               std::optional<double> declared_lip_norm)
    : space_(std::move(space)),
      variant_(std::move(variant)),
      declared_sup_norm_(declared_sup_norm),
      declared_lip_norm_(declared_lip_norm) {
  for (const auto& n : {declared_sup_norm_, declared_lip_norm_})
    if (n && !(*n >= 0.0 && std::isfinite(*n)))
      throw ContractError("declared norms must be finite and nonnegative");

  std::visit(overloaded{
                 [&](const fn::Linear& x) { require_space(space_, x.u.space(), "u"); },
                 [&](const fn::AffineQuadratic& x) {
                   require_space(space_, x.b.space(), "b");
                   const std::size_t n = space_.dim();
                   if (x.a.size() != n * n) throw ContractError("A must be dim x dim");
                   for (std::size_t i = 0; i < n; ++i)
                     for (std::size_t j = 0; j < i; ++j)
                       if (std::abs(x.a[i * n + j] - x.a[j * n + i]) >
                           1e-12 * (1.0 + std::abs(x.a[i * n + j])))
                         throw ContractError("A must be symmetric");
                 },
                 [&](const fn::SquaredNorm&) {},
                 [&](const fn::MonomialPairing& x) {
                   require_space(space_, x.u.space(), "u");
                   if (x.degree < 1) throw ContractError("monomial degree must be >= 1");
                 },
                 [&](const fn::SmoothSqrt&) {},
                 [&](const fn::SinPairing& x) { require_space(space_, x.u.space(), "u"); },
                 [&](const fn::MatrixLinear& x) {
                   require_matrix_space(space_, "matrix_linear");
                   require_space(space_, x.u.space(), "U");
                 },
                 [&](const fn::MatrixQuadratic& x) {
                   require_matrix_space(space_, "matrix_quadratic");
                   require_space(space_, x.u.space(), "U");
                 },
                 [&](const fn::ExpFamEntropy& x) {
                   require_space(space_, x.family.space(), "family");
                 },
                 [&](const fn::BumpPairing& x) {
                   require_space(space_, x.u.space(), "u");
                   if (!(x.width > 0.0)) throw ContractError("bump width must be > 0");
                 }},
             variant_);
}

FunctionalSpec FunctionalSpec::linear(DualElement u) {
  auto space = u.space();
  return FunctionalSpec(std::move(space), fn::Linear{std::move(u)});
}

FunctionalSpec FunctionalSpec::affine_quadratic(std::vector<double> a, DualElement b,
                                                double c) {
  auto space = b.space();
  return FunctionalSpec(std::move(space), fn::AffineQuadratic{std::move(a), std::move(b), c});
}

FunctionalSpec FunctionalSpec::squared_norm(SpaceDescriptor space) {
  return FunctionalSpec(std::move(space), fn::SquaredNorm{});
}

FunctionalSpec FunctionalSpec::monomial_pairing(DualElement u, int degree) {
  auto space = u.space();
  return FunctionalSpec(std::move(space), fn::MonomialPairing{std::move(u), degree});
}

FunctionalSpec FunctionalSpec::smooth_sqrt(SpaceDescriptor space) {
  return FunctionalSpec(std::move(space), fn::SmoothSqrt{});
}

FunctionalSpec FunctionalSpec::sin_pairing(DualElement u) {
  auto space = u.space();
  return FunctionalSpec(std::move(space), fn::SinPairing{std::move(u)});
}

FunctionalSpec FunctionalSpec::matrix_linear(DualElement u) {
  auto space = u.space();
  return FunctionalSpec(std::move(space), fn::MatrixLinear{std::move(u)});
}

FunctionalSpec FunctionalSpec::matrix_quadratic(DualElement u) {
  auto space = u.space();
  return FunctionalSpec(std::move(space), fn::MatrixQuadratic{std::move(u)});
}

FunctionalSpec FunctionalSpec::expfam_entropy(ExpFamilySpec family) {
  auto space = family.space();
  return FunctionalSpec(std::move(space), fn::ExpFamEntropy{family});
}

FunctionalSpec FunctionalSpec::bump_pairing(DualElement u, double center, double width) {
  auto space = u.space();
  return FunctionalSpec(std::move(space), fn::BumpPairing{std::move(u), center, width});
}

FunctionalSpec FunctionalSpec::with_declared_norms(std::optional<double> sup_norm,
                                                   std::optional<double> lip_norm) const {
  return FunctionalSpec(space_, variant_, sup_norm, lip_norm);
}

int FunctionalSpec::max_analytic_order() const {
  return std::visit(overloaded{[](const fn::ExpFamEntropy&) { return 3; },
                               [](const fn::BumpPairing&) { return 3; },
                               [](const auto&) { return kMaxOrder; }},
                    variant_);
}

std::string_view FunctionalSpec::tag() const {
  return std::visit(overloaded{[](const fn::Linear&) { return "linear"; },
                               [](const fn::AffineQuadratic&) { return "affine_quadratic"; },
                               [](const fn::SquaredNorm&) { return "squared_norm"; },
                               [](const fn::MonomialPairing&) { return "monomial_pairing"; },
                               [](const fn::SmoothSqrt&) { return "smooth_sqrt"; },
                               [](const fn::SinPairing&) { return "sin_pairing"; },
                               [](const fn::MatrixLinear&) { return "matrix_linear"; },
                               [](const fn::MatrixQuadratic&) { return "matrix_quadratic"; },
                               [](const fn::ExpFamEntropy&) { return "expfam_entropy"; },
                               [](const fn::BumpPairing&) { return "bump_pairing"; }},
                    variant_);
}

double eval(const FunctionalSpec& f, const Point& t) {
  require_space(f.space(), t.space(), "evaluation point");
  return analytic(f, 0, t, {});
}

double deriv_apply(const FunctionalSpec& f, int k, const Point& t,
                   std::span<const Point> dirs) {
  check_call(f, k, t, dirs);
  if (k > f.max_analytic_order())
    throw UnsupportedOrderError(std::string(f.tag()) + " has analytic derivatives up to order " +
                                std::to_string(f.max_analytic_order()) + ", requested " +
                                std::to_string(k));
  return analytic(f, k, t, canonical_order(dirs));
}

double fd_deriv_apply(const FunctionalSpec& f, int k, const Point& t,
                      std::span<const Point> dirs) {
  check_call(f, k, t, dirs);
  if (k > 4) throw ContractError("finite-difference derivatives are capped at order 4");
  if (k == 0) return eval(f, t);

  const double h = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (k + 2)) *
                   (1.0 + norm(t));
  std::vector<double> inv_len(k);
  for (int i = 0; i < k; ++i) {
    const double len = std::sqrt(inner(dirs[i], dirs[i]));
    if (len == 0.0) return 0.0;
    inv_len[i] = 1.0 / len;
  }

  const auto base = t.coords();
  auto nested = [&](double step) {
    double acc = 0.0;
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      std::vector<double> x(base.begin(), base.end());
      double sign = 1.0;
      for (int i = 0; i < k; ++i) {
        const double s = (mask >> i) & 1u ? -1.0 : 1.0;
        sign *= s;
        const auto dc = dirs[i].coords();
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += s * step * inv_len[i] * dc[j];
      }
      acc += sign * eval(f, Point(t.space(), std::move(x)));
    }
    double denom = 1.0;
    for (double il : inv_len) denom *= 2.0 * step * il;
    return acc / denom;
  };
  // One Richardson step cancels the h^2 term.
  return (4.0 * nested(0.5 * h) - nested(h)) / 3.0;
}

double derivative(const FunctionalSpec& f, int k, const Point& t,
                  std::span<const Point> dirs, bool allow_fd_fallback) {
  if (k > f.max_analytic_order() && allow_fd_fallback) return fd_deriv_apply(f, k, t, dirs);
  return deriv_apply(f, k, t, dirs);
}

HolderBounds holder_bounds(const FunctionalSpec& f, const Ball& ball) {
  HolderBounds out;
  const bool bounded_ball = std::isfinite(ball.radius) && ball.center.has_value();
  const bool matrix = f.space().kind() == SpaceKind::sym_matrix;
  const double center_norm = bounded_ball ? norm(*ball.center) : 0.0;

  std::visit(
      overloaded{
          [&](const fn::Linear& x) {
            out.lip_norm = dual_norm(x.u);
            if (bounded_ball)
              out.sup_norm = std::abs(pairing(*ball.center, x.u)) + ball.radius * *out.lip_norm;
          },
          [&](const fn::MatrixLinear& x) {
            out.lip_norm = dual_norm(x.u);
            if (bounded_ball)
              out.sup_norm = std::abs(pairing(*ball.center, x.u)) + ball.radius * *out.lip_norm;
          },
          [&](const fn::MonomialPairing& x) {
            if (!bounded_ball) return;
            const double un = dual_norm(x.u);
            const double reach = std::abs(pairing(*ball.center, x.u)) + ball.radius * un;
            out.sup_norm = std::pow(reach, x.degree);
            out.lip_norm = x.degree * std::pow(reach, x.degree - 1) * un;
          },
          [&](const fn::SinPairing& x) {
            out.sup_norm = 1.0;
            out.lip_norm = dual_norm(x.u);
          },
          [&](const fn::BumpPairing&) { out.sup_norm = 1.0; },
          [&](const fn::SquaredNorm&) {
            if (!bounded_ball || matrix) return;
            const double reach = center_norm + ball.radius;
            out.sup_norm = reach * reach;
            out.lip_norm = 2.0 * reach;
          },
          [&](const fn::SmoothSqrt&) {
            // |grad| < 1 in the coordinate norm; Frobenius <= sqrt(side) * operator
            out.lip_norm = matrix ? std::sqrt(static_cast<double>(f.space().side())) : 1.0;
            if (bounded_ball && !matrix) {
              const double reach = center_norm + ball.radius;
              out.sup_norm = std::sqrt(1.0 + reach * reach);
            }
          },
          [&](const fn::ExpFamEntropy& e) {
            // entropy relative to the uniform base measure lies in [-d log 2, 0]
            if (e.family.kind() == ExpFamilySpec::Kind::bernoulli_product)
              out.sup_norm = static_cast<double>(e.family.dim()) * std::numbers::ln2;
          },
          [](const auto&) {}},
      f.variant());

  if (f.declared_sup_norm()) out.sup_norm = f.declared_sup_norm();
  if (f.declared_lip_norm()) out.lip_norm = f.declared_lip_norm();
  return out;
}

}  // namespace splitfun
