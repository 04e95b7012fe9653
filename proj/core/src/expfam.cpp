#include "splitfun/expfam.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "splitfun/errors.hpp"

namespace splitfun {

PhiProfile PhiProfile::logistic_like(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw ContractError("logistic_like profile needs a positive finite scale");
  return PhiProfile(Kind::logistic_like, scale);
}

double PhiProfile::value(double rho) const {
  switch (kind_) {
    case Kind::identity:
      return rho;
    case Kind::logistic_like:
      return scale_ * std::tanh(0.5 * rho);
  }
  return 0.0;
}

double PhiProfile::derivative(int j, double rho) const {
  if (j < 1 || j > 3) throw UnsupportedOrderError("profile derivatives cover orders 1..3");
  if (kind_ == Kind::identity) return j == 1 ? 1.0 : 0.0;
  const double tau = std::tanh(0.5 * rho);
  const double sech2 = 1.0 - tau * tau;
  switch (j) {
    case 1:
      return 0.5 * scale_ * sech2;
    case 2:
      return -0.5 * scale_ * tau * sech2;
    default:
      return -0.25 * scale_ * sech2 * (1.0 - 3.0 * tau * tau);
  }
}

double PhiProfile::integral(double rho) const {
  if (kind_ == Kind::identity) return 0.5 * rho * rho;
  // 2 s log cosh(rho/2), evaluated without overflow
  const double x = std::abs(0.5 * rho);
  const double log_cosh = x + std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2;
  return 2.0 * scale_ * log_cosh;
}

double PhiProfile::range_limit() const {
  return kind_ == Kind::identity ? std::numeric_limits<double>::infinity() : scale_;
}

ExpFamilySpec ExpFamilySpec::bernoulli_product(std::size_t d) {
  if (d == 0) throw ContractError("family dimension must be >= 1");
  return ExpFamilySpec(Kind::bernoulli_product, d, PhiProfile::identity());
}

ExpFamilySpec ExpFamilySpec::gaussian_natural(std::size_t d) {
  if (d == 0) throw ContractError("family dimension must be >= 1");
  return ExpFamilySpec(Kind::gaussian_natural, d, PhiProfile::identity());
}

ExpFamilySpec ExpFamilySpec::spherical(std::size_t d, PhiProfile profile) {
  if (d == 0) throw ContractError("family dimension must be >= 1");
  return ExpFamilySpec(Kind::spherical, d, profile);
}

std::string_view ExpFamilySpec::tag() const {
  switch (kind_) {
    case Kind::bernoulli_product:
      return "bernoulli_product";
    case Kind::gaussian_natural:
      return "gaussian_natural";
    case Kind::spherical:
      return "spherical";
  }
  return "";
}

namespace {

void check_space(const ExpFamilySpec& fam, const Point& p) {
  if (!(p.space() == fam.space()))
    throw ContractError("point of dimension " + std::to_string(p.size()) +
                        " does not belong to a family of dimension " +
                        std::to_string(fam.dim()));
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Radial quantities of a spherical family at rho = |theta|:
// a = Phi'(rho), b = Phi(rho)/rho, c = (a - b)/rho = b'(rho), a2 = Phi''(rho).
// Below kSeriesRadius the odd Taylor series of Phi is used to avoid
// cancellation; every shipped profile is odd with Phi(0) = 0.
struct Radial {
  double rho;
  std::vector<double> e;
  double a, b, c, a2;
};

constexpr double kSeriesRadius = 1e-3;

Radial radial(const PhiProfile& prof, std::span<const double> theta) {
  Radial r;
  r.rho = l2(theta);
  r.e.assign(theta.size(), 0.0);
  if (r.rho > 0.0)
    for (std::size_t i = 0; i < theta.size(); ++i) r.e[i] = theta[i] / r.rho;
  r.a = prof.derivative(1, r.rho);
  r.a2 = prof.derivative(2, r.rho);
  if (r.rho < kSeriesRadius) {
    const double phi1 = prof.derivative(1, 0.0);
    const double phi3 = prof.derivative(3, 0.0);
    r.b = phi1 + phi3 * r.rho * r.rho / 6.0;
    r.c = phi3 * r.rho / 3.0;
  } else {
    r.b = prof.value(r.rho) / r.rho;
    r.c = (r.a - r.b) / r.rho;
  }
  return r;
}

}  // namespace

double psi(const ExpFamilySpec& fam, const Point& theta) {
  check_space(fam, theta);
  const auto th = theta.coords();
  switch (fam.kind()) {
    case ExpFamilySpec::Kind::bernoulli_product: {
      double s = 0.0;
      for (double x : th) s += softplus(x) - std::numbers::ln2;
      return s;
    }
    case ExpFamilySpec::Kind::gaussian_natural:
      return 0.5 * dot(th, th);
    case ExpFamilySpec::Kind::spherical:
      return fam.profile().integral(l2(th));
  }
  return 0.0;
}

Point big_psi(const ExpFamilySpec& fam, const Point& theta) {
  check_space(fam, theta);
  const auto th = theta.coords();
  std::vector<double> out(th.size());
  switch (fam.kind()) {
    case ExpFamilySpec::Kind::bernoulli_product:
      for (std::size_t i = 0; i < th.size(); ++i) out[i] = sigmoid(th[i]);
      break;
    case ExpFamilySpec::Kind::gaussian_natural:
      out.assign(th.begin(), th.end());
      break;
    case ExpFamilySpec::Kind::spherical: {
      const double rho = l2(th);
      if (rho > 0.0) {
        const double scale = fam.profile().value(rho) / rho;
        for (std::size_t i = 0; i < th.size(); ++i) out[i] = scale * th[i];
      }
      break;
    }
  }
  return Point(fam.space(), std::move(out));
}

namespace {

// Solves Phi(rho) = target for rho > 0: doubling bracket from rho = 1,
// bisection to width 1e-8, then Newton kept inside the bracket.
double solve_radius(const PhiProfile& prof, double target) {
  constexpr double kMaxRadius = 1e8;
  constexpr int kMaxIterations = 100;

  double lo = 0.0;
  double hi = 1.0;
  while (prof.value(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMaxRadius) throw SolverError("radial solve: bracket exceeded 1e8");
  }

  int iterations = 0;
  while (hi - lo > 1e-8) {
    if (++iterations > kMaxIterations) throw SolverError("radial solve: bisection did not converge");
    const double mid = 0.5 * (lo + hi);
    (prof.value(mid) < target ? lo : hi) = mid;
  }

  double rho = 0.5 * (lo + hi);
  for (; iterations < kMaxIterations; ++iterations) {
    const double residual = prof.value(rho) - target;
    const double slope = prof.derivative(1, rho);
    if (residual == 0.0 || slope <= 0.0) break;
    (residual < 0.0 ? lo : hi) = rho;
    double next = rho - residual / slope;
    if (next < lo || next > hi) next = 0.5 * (lo + hi);
    const double step = std::abs(next - rho);
    rho = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * rho) break;
  }
  if (std::abs(prof.value(rho) - target) > 1e-12)
    throw SolverError("radial solve: residual above 1e-12 after Newton polish");
  return rho;
}

}  // namespace

Point big_psi_inverse(const ExpFamilySpec& fam, const Point& t) {
  check_space(fam, t);
  const auto tc = t.coords();
  std::vector<double> out(tc.size());
  switch (fam.kind()) {
    case ExpFamilySpec::Kind::bernoulli_product:
      for (std::size_t i = 0; i < tc.size(); ++i) {
        const double p = tc[i];
        if (!(p > 0.0 && p < 1.0))
          throw DomainError("bernoulli mean parameter " + std::to_string(p) +
                            " is outside (0, 1)");
        out[i] = std::log(p) - std::log1p(-p);
      }
      break;
    case ExpFamilySpec::Kind::gaussian_natural:
      out.assign(tc.begin(), tc.end());
      break;
    case ExpFamilySpec::Kind::spherical: {
      const double r = l2(tc);
      if (!(r < fam.profile().range_limit()))
        throw DomainError("mean parameter norm " + std::to_string(r) +
                          " is outside the open image of Psi");
      if (r > 0.0) {
        const double rho = solve_radius(fam.profile(), r);
        for (std::size_t i = 0; i < tc.size(); ++i) out[i] = rho * tc[i] / r;
      }
      break;
    }
  }
  return Point(fam.space(), std::move(out));
}

Point sigma_theta(const ExpFamilySpec& fam, const Point& theta) {
  check_space(fam, theta);
  const std::size_t d = fam.dim();
  std::vector<double> full(d * d, 0.0);
  const auto th = theta.coords();
  switch (fam.kind()) {
    case ExpFamilySpec::Kind::bernoulli_product:
      for (std::size_t i = 0; i < d; ++i) {
        const double p = sigmoid(th[i]);
        full[i * d + i] = p * (1.0 - p);
      }
      break;
    case ExpFamilySpec::Kind::gaussian_natural:
      for (std::size_t i = 0; i < d; ++i) full[i * d + i] = 1.0;
      break;
    case ExpFamilySpec::Kind::spherical: {
      const Radial r = radial(fam.profile(), th);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          full[i * d + j] = (i == j ? r.b : 0.0) + (r.a - r.b) * r.e[i] * r.e[j];
      break;
    }
  }
  return point_from_matrix(d, full);
}

double psi_star(const ExpFamilySpec& fam, const Point& t) {
  const Point theta = big_psi_inverse(fam, t);
  return inner(t, theta) - psi(fam, theta);
}

double entropy(const ExpFamilySpec& fam, const Point& theta) {
  return -psi_star(fam, big_psi(fam, theta));
}

Point sigma_theta_solve(const ExpFamilySpec& fam, const Point& theta, const Point& v) {
  check_space(fam, theta);
  check_space(fam, v);
  const auto th = theta.coords();
  const auto vc = v.coords();
  std::vector<double> out(vc.size());
  switch (fam.kind()) {
    case ExpFamilySpec::Kind::bernoulli_product:
      for (std::size_t i = 0; i < vc.size(); ++i) {
        const double p = sigmoid(th[i]);
        out[i] = vc[i] / (p * (1.0 - p));
      }
      break;
    case ExpFamilySpec::Kind::gaussian_natural:
      out.assign(vc.begin(), vc.end());
      break;
    case ExpFamilySpec::Kind::spherical: {
      const Radial r = radial(fam.profile(), th);
      const double ev = dot(r.e, vc);
      for (std::size_t i = 0; i < vc.size(); ++i)
        out[i] = (vc[i] - r.e[i] * ev) / r.b + r.e[i] * ev / r.a;
      break;
    }
  }
  return Point(fam.space(), std::move(out));
}

double sigma_theta_form(const ExpFamilySpec& fam, const Point& theta, const Point& v,
                        const Point& w) {
  check_space(fam, theta);
  const auto th = theta.coords();
  const auto vc = v.coords();
  const auto wc = w.coords();
  switch (fam.kind()) {
    case ExpFamilySpec::Kind::bernoulli_product: {
      double s = 0.0;
      for (std::size_t i = 0; i < vc.size(); ++i) {
        const double p = sigmoid(th[i]);
        s += p * (1.0 - p) * vc[i] * wc[i];
      }
      return s;
    }
    case ExpFamilySpec::Kind::gaussian_natural:
      return dot(vc, wc);
    case ExpFamilySpec::Kind::spherical: {
      const Radial r = radial(fam.profile(), th);
      return r.b * dot(vc, wc) + (r.a - r.b) * dot(r.e, vc) * dot(r.e, wc);
    }
  }
  return 0.0;
}

double psi_third(const ExpFamilySpec& fam, const Point& theta, const Point& u,
                 const Point& v, const Point& w) {
  check_space(fam, theta);
  const auto th = theta.coords();
  const auto uc = u.coords();
  const auto vc = v.coords();
  const auto wc = w.coords();
  switch (fam.kind()) {
    case ExpFamilySpec::Kind::bernoulli_product: {
      double s = 0.0;
      for (std::size_t i = 0; i < uc.size(); ++i) {
        const double p = sigmoid(th[i]);
        s += p * (1.0 - p) * (1.0 - 2.0 * p) * uc[i] * vc[i] * wc[i];
      }
      return s;
    }
    case ExpFamilySpec::Kind::gaussian_natural:
      return 0.0;
    case ExpFamilySpec::Kind::spherical: {
      const Radial r = radial(fam.profile(), th);
      const double eu = dot(r.e, uc);
      const double ev = dot(r.e, vc);
      const double ew = dot(r.e, wc);
      const double sym = ew * dot(uc, vc) + ev * dot(uc, wc) + eu * dot(vc, wc);
      return r.c * sym + (r.a2 - 3.0 * r.c) * eu * ev * ew;
    }
  }
  return 0.0;
}

}  // namespace splitfun
