#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "splitfun/functionals.hpp"
#include "splitfun/models.hpp"
#include "splitfun/space.hpp"

namespace splitfun {

/// Sum in a fixed pairwise tree order: stable rounding, bit-reproducible.
double pairwise_sum(std::span<const double> xs);
double mean(std::span<const double> xs);
/// Sample standard deviation with the n - 1 denominator (0 for n < 2).
double sample_sd(std::span<const double> xs);

/// (mean |e|^p)^(1/p).
double empirical_Lp(std::span<const double> errors, double p);

/// Finite set of dual directions of unit dual norm. Taking a supremum over it
/// gives a lower estimate of the supremum over the whole dual unit ball.
class DirectionSet {
 public:
  /// Canonical coordinate directions (rescaled to unit dual norm) followed by
  /// n_random Gaussian directions normalized to unit dual norm.
  static DirectionSet canonical_plus_random(const SpaceDescriptor& space,
                                            std::size_t n_random, std::uint64_t seed);

  explicit DirectionSet(std::vector<DualElement> dirs);

  const std::vector<DualElement>& directions() const { return dirs_; }
  std::size_t size() const { return dirs_.size(); }

 private:
  std::vector<DualElement> dirs_;
};

struct ApDpEstimate {
  /// Lower estimates of a_p(P) and d_p(P) over the n grid and direction set.
  double a_hat = 0.0;
  double d_hat = 0.0;
  /// Monte Carlo standard errors of the maximizing cells, via the delta method.
  double a_se = 0.0;
  double d_se = 0.0;
};

ApDpEstimate estimate_ap_dp(const ModelSpec& model, const DirectionSet& dirs,
                            std::span<const std::size_t> n_grid, std::size_t reps, double p,
                            std::uint64_t master_seed);

/// Sorted-matching W_p between two equal-size samples.
double wasserstein_1d(std::span<const double> xs, std::span<const double> ys, double p);
/// W_p between a sample and N(mu, sigma^2), matching the i-th order
/// statistic to the normal quantile at (i - 0.5) / n.
double wasserstein_to_normal(std::span<const double> xs, double mu, double sigma, double p);

/// Standard normal quantile function.
double normal_quantile(double prob);

/// Efficient standard deviation sqrt(<I^{-1} f'(theta), f'(theta)>), with the
/// gradient taken coordinate-wise through deriv_apply.
double sigma_f(const ModelSpec& model, const FunctionalSpec& f, const Point& theta);

/// tr(Sigma) / |Sigma|_op.
double effective_rank(const Point& sigma);

struct TailCheckReport {
  std::vector<double> t_grid;
  std::vector<double> quantiles;
  std::vector<double> bounds;
  /// Smallest C with quantile(t) <= C * bound(t) across the grid.
  double constant = 0.0;
};

/// Compares the empirical (1 - e^{-t}) quantile of |samples| with
/// sigma sqrt(t/n) v U t/n for t in {0.5, 1, 2, 3, 5}.
TailCheckReport bernstein_tail_check(std::span<const double> samples, std::size_t n,
                                     double sigma, double u);

/// (n, error) pairs; n strictly increasing and errors positive.
class RateCurve {
 public:
  RateCurve(std::vector<double> ns, std::vector<double> errors);

  const std::vector<double>& ns() const { return ns_; }
  const std::vector<double>& errors() const { return errors_; }

 private:
  std::vector<double> ns_;
  std::vector<double> errors_;
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LogLogFit fit_log_log(const RateCurve& curve);
/// Least-squares slope of log(error) against log(n); needs >= 3 points.
double rate_slope(const RateCurve& curve);

}  // namespace splitfun
