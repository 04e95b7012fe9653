#pragma once

#include <cstddef>
#include <string_view>

#include "splitfun/space.hpp"

namespace splitfun {

/// Radial profile Phi = phi' of a spherically symmetric family, where the
/// cumulant function is psi(theta) = phi(|theta|).
class PhiProfile {
 public:
  enum class Kind { identity, logistic_like };

  static PhiProfile identity() { return PhiProfile(Kind::identity, 1.0); }
  /// Phi(rho) = scale * tanh(rho / 2); bounded, so Psi maps onto the open
  /// ball of radius `scale`.
  static PhiProfile logistic_like(double scale = 1.0);

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }

  double value(double rho) const;
  /// j-th derivative of Phi, j in 1..3.
  double derivative(int j, double rho) const;
  /// phi(rho) = integral of Phi over [0, rho].
  double integral(double rho) const;
  /// sup Phi over [0, inf); +inf for unbounded profiles.
  double range_limit() const;

  friend bool operator==(const PhiProfile&, const PhiProfile&) = default;

 private:
  PhiProfile(Kind kind, double scale) : kind_(kind), scale_(scale) {}

  Kind kind_;
  double scale_;
};

/// Regular exponential family p_theta(x) = exp(<T(x), theta> - psi(theta))
/// relative to a base measure mu, with natural parameter space all of R^d.
class ExpFamilySpec {
 public:
  enum class Kind { bernoulli_product, gaussian_natural, spherical };

  /// mu = uniform on {0,1}^d, T(x) = x.
  static ExpFamilySpec bernoulli_product(std::size_t d);
  /// mu = standard normal on R^d, T(x) = x, psi = |theta|^2 / 2.
  static ExpFamilySpec gaussian_natural(std::size_t d);
  static ExpFamilySpec spherical(std::size_t d, PhiProfile profile);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const PhiProfile& profile() const { return profile_; }
  SpaceDescriptor space() const { return SpaceDescriptor::euclidean(dim_); }
  std::string_view tag() const;

  friend bool operator==(const ExpFamilySpec&, const ExpFamilySpec&) = default;

 private:
  ExpFamilySpec(Kind kind, std::size_t dim, PhiProfile profile)
      : kind_(kind), dim_(dim), profile_(profile) {}

  Kind kind_;
  std::size_t dim_;
  PhiProfile profile_;
};

/// Cumulant function psi = log Z.
double psi(const ExpFamilySpec& fam, const Point& theta);
/// Mean map Psi = grad psi, theta -> E_theta T(X).
Point big_psi(const ExpFamilySpec& fam, const Point& theta);
/// Inverse mean map. Throws DomainError outside the open image of Psi and
/// SolverError if the radial root solve does not converge.
Point big_psi_inverse(const ExpFamilySpec& fam, const Point& t);
/// Sigma_theta = Psi'(theta) = Cov_theta T(X), as a sym_matrix point.
Point sigma_theta(const ExpFamilySpec& fam, const Point& theta);
/// Legendre transform psi*(t) = <t, Psi^{-1}(t)> - psi(Psi^{-1}(t)).
double psi_star(const ExpFamilySpec& fam, const Point& t);
/// Entropy relative to mu: H(theta) = -psi*(Psi(theta)).
double entropy(const ExpFamilySpec& fam, const Point& theta);

/// Sigma_theta^{-1} v, in closed form for every shipped family.
Point sigma_theta_solve(const ExpFamilySpec& fam, const Point& theta, const Point& v);
/// <Sigma_theta v, w>.
double sigma_theta_form(const ExpFamilySpec& fam, const Point& theta, const Point& v,
                        const Point& w);
/// Third derivative psi'''(theta)[u, v, w].
double psi_third(const ExpFamilySpec& fam, const Point& theta, const Point& u,
                 const Point& v, const Point& w);

}  // namespace splitfun
