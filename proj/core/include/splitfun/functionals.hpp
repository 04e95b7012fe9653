#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "splitfun/expfam.hpp"
#include "splitfun/space.hpp"

namespace splitfun {

namespace fn {

/// f(t) = <t, u>.
struct Linear {
  DualElement u;
};
/// f(t) = <A t, t> + <b, t> + c with A symmetric (dim x dim, row-major, in
/// packed coordinates for matrix spaces).
struct AffineQuadratic {
  std::vector<double> a;
  DualElement b;
  double c = 0.0;
};
/// f(t) = <t, t> (coordinate/Hilbert norm).
struct SquaredNorm {};
/// f(t) = <t, u>^degree.
struct MonomialPairing {
  DualElement u;
  int degree = 1;
};
/// f(t) = sqrt(1 + <t, t>).
struct SmoothSqrt {};
/// f(t) = sin(<t, u>).
struct SinPairing {
  DualElement u;
};
/// f(S) = tr(S U) on symmetric matrices.
struct MatrixLinear {
  DualElement u;
};
/// f(S) = tr(S^2 U) on symmetric matrices.
struct MatrixQuadratic {
  DualElement u;
};
/// f(t) = -psi*(t) on the mean parameter, i.e. the entropy H(Psi^{-1}(t)).
struct ExpFamEntropy {
  ExpFamilySpec family;
};
/// f(t) = phi((<t, u> - center) / width), phi(x) = exp(1 - 1/(1 - x^2)) on
/// |x| < 1 and 0 elsewhere.
struct BumpPairing {
  DualElement u;
  double center = 0.0;
  double width = 1.0;
};

}  // namespace fn

using FunctionalVariant =
    std::variant<fn::Linear, fn::AffineQuadratic, fn::SquaredNorm, fn::MonomialPairing,
                 fn::SmoothSqrt, fn::SinPairing, fn::MatrixLinear, fn::MatrixQuadratic,
                 fn::ExpFamEntropy, fn::BumpPairing>;

/// A smooth functional f: E -> R with analytic derivative access up to
/// max_analytic_order().
class FunctionalSpec {
 public:
  FunctionalSpec(SpaceDescriptor space, FunctionalVariant variant,
                 std::optional<double> declared_sup_norm = std::nullopt,
                 std::optional<double> declared_lip_norm = std::nullopt);

  static FunctionalSpec linear(DualElement u);
  static FunctionalSpec affine_quadratic(std::vector<double> a, DualElement b, double c);
  static FunctionalSpec squared_norm(SpaceDescriptor space);
  static FunctionalSpec monomial_pairing(DualElement u, int degree);
  static FunctionalSpec smooth_sqrt(SpaceDescriptor space);
  static FunctionalSpec sin_pairing(DualElement u);
  static FunctionalSpec matrix_linear(DualElement u);
  static FunctionalSpec matrix_quadratic(DualElement u);
  static FunctionalSpec expfam_entropy(ExpFamilySpec family);
  static FunctionalSpec bump_pairing(DualElement u, double center, double width);

  FunctionalSpec with_declared_norms(std::optional<double> sup_norm,
                                     std::optional<double> lip_norm) const;

  const SpaceDescriptor& space() const { return space_; }
  const FunctionalVariant& variant() const { return variant_; }
  std::optional<double> declared_sup_norm() const { return declared_sup_norm_; }
  std::optional<double> declared_lip_norm() const { return declared_lip_norm_; }
  int max_analytic_order() const;
  std::string_view tag() const;

 private:
  SpaceDescriptor space_;
  FunctionalVariant variant_;
  std::optional<double> declared_sup_norm_;
  std::optional<double> declared_lip_norm_;
};

/// Highest derivative order any estimator may request.
inline constexpr int kMaxOrder = 10;

double eval(const FunctionalSpec& f, const Point& t);

/// f^(k)(t)[dirs[0], ..., dirs[k-1]]. Directions are put in a canonical
/// order first, so the result is bitwise invariant under permutation.
/// Throws UnsupportedOrderError for k > max_analytic_order().
double deriv_apply(const FunctionalSpec& f, int k, const Point& t,
                   std::span<const Point> dirs);

/// Nested central differences along each direction, k <= 4, with one
/// Richardson step (steps h and h/2), so the error is O(h^4). The step along
/// v_i is h / |v_i| with h = eps^(1/(k+2)) (1 + |t|).
double fd_deriv_apply(const FunctionalSpec& f, int k, const Point& t,
                      std::span<const Point> dirs);

/// deriv_apply, falling back to fd_deriv_apply above the analytic order when
/// allowed.
double derivative(const FunctionalSpec& f, int k, const Point& t,
                  std::span<const Point> dirs, bool allow_fd_fallback);

/// Closed ball {t : |t - center| <= radius}; default is the whole space.
struct Ball {
  std::optional<Point> center;
  double radius = std::numeric_limits<double>::infinity();
};

struct HolderBounds {
  std::optional<double> sup_norm;
  std::optional<double> lip_norm;
};

/// Declared norms win; otherwise closed-form bounds for built-ins where they
/// exist on the given ball, else absent.
HolderBounds holder_bounds(const FunctionalSpec& f, const Ball& ball = {});

}  // namespace splitfun
