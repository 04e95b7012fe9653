#include "splitfun/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "splitfun/errors.hpp"
#include "splitfun/linalg.hpp"
#include "splitfun/rng.hpp"

namespace splitfun {

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw ContractError("mean of an empty sample");
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mu) * (xs[i] - mu);
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(xs.size() - 1));
}

double empirical_Lp(std::span<const double> errors, double p) {
  if (!(p >= 1.0)) throw ContractError("empirical_Lp: p must be >= 1");
  if (errors.empty()) throw ContractError("empirical_Lp: empty sample");
  std::vector<double> powers(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) powers[i] = std::pow(std::abs(errors[i]), p);
  return std::pow(mean(powers), 1.0 / p);
}

DirectionSet::DirectionSet(std::vector<DualElement> dirs) : dirs_(std::move(dirs)) {
  for (const auto& u : dirs_) {
    const double n = dual_norm(u);
    if (!(n >= 1.0 - 1e-12 && n <= 1.0 + 1e-12))
      throw ContractError("direction set members must have unit dual norm");
  }
}

namespace {

DualElement normalized(DualElement u) {
  const double n = dual_norm(u);
  if (n == 0.0) throw DomainError("cannot normalize a zero direction");
  u *= 1.0 / n;
  // one correction step absorbs the rounding of the first division
  const double again = dual_norm(u);
  if (again > 1.0) u *= 1.0 / again;
  return u;
}

}  // namespace

DirectionSet DirectionSet::canonical_plus_random(const SpaceDescriptor& space,
                                                 std::size_t n_random, std::uint64_t seed) {
  std::vector<DualElement> dirs;
  for (std::size_t i = 0; i < space.dim(); ++i) {
    std::vector<double> c(space.dim(), 0.0);
    c[i] = 1.0;
    dirs.push_back(normalized(DualElement(space, std::move(c))));
  }
  RngStream rng(seed, 0, 0, StreamPurpose::directions);
  for (std::size_t r = 0; r < n_random; ++r) {
    std::vector<double> c(space.dim());
    for (double& x : c) x = rng.normal();
    dirs.push_back(normalized(DualElement(space, std::move(c))));
  }
  return DirectionSet(std::move(dirs));
}

ApDpEstimate estimate_ap_dp(const ModelSpec& model, const DirectionSet& dirs,
                            std::span<const std::size_t> n_grid, std::size_t reps, double p,
                            std::uint64_t master_seed) {
  if (reps < 100) throw ContractError("estimate_ap_dp: reps must be >= 100");
  if (!(p >= 1.0)) throw ContractError("estimate_ap_dp: p must be >= 1");
  const Point theta = true_functional_target(model);
  const bool exact = has_exact_block_sampler(model);

  // n * L_p^2 and its delta-method standard error from |e|^p draws
  auto scaled = [&](std::size_t n, const std::vector<double>& errs) {
    std::vector<double> powers(errs.size());
    for (std::size_t i = 0; i < errs.size(); ++i) powers[i] = std::pow(std::abs(errs[i]), p);
    const double m = mean(powers);
    const double value = static_cast<double>(n) * std::pow(m, 2.0 / p);
    const double se_m = sample_sd(powers) / std::sqrt(static_cast<double>(errs.size()));
    const double slope = m > 0.0 ? static_cast<double>(n) * (2.0 / p) * std::pow(m, 2.0 / p - 1.0)
                                 : 0.0;
    return std::pair{value, slope * se_m};
  };

  ApDpEstimate out;
  for (std::size_t cell = 0; cell < n_grid.size(); ++cell) {
    const std::size_t n = n_grid[cell];
    std::vector<std::vector<double>> proj(dirs.size(), std::vector<double>(reps));
    std::vector<double> norms(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      RngStream rng(master_seed, static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(r));
      Point est = [&] {
        if (exact) {
          const std::size_t sizes[] = {n};
          return sample_block_means(model, sizes, rng).front();
        }
        return base_estimate(model, sample(model, n, rng));
      }();
      const Point err = est - theta;
      for (std::size_t k = 0; k < dirs.size(); ++k) proj[k][r] = pairing(err, dirs.directions()[k]);
      norms[r] = norm(err);
    }
    for (const auto& errs : proj) {
      const auto [value, se] = scaled(n, errs);
      if (value > out.a_hat) out = {value, out.d_hat, se, out.d_se};
    }
    const auto [value, se] = scaled(n, norms);
    if (value > out.d_hat) {
      out.d_hat = value;
      out.d_se = se;
    }
  }
  return out;
}

double wasserstein_1d(std::span<const double> xs, std::span<const double> ys, double p) {
  if (xs.size() != ys.size())
    throw ContractError("wasserstein_1d: samples must have equal sizes (" +
                        std::to_string(xs.size()) + " vs " + std::to_string(ys.size()) + ")");
  if (xs.empty()) throw ContractError("wasserstein_1d: empty samples");
  if (!(p >= 1.0)) throw ContractError("wasserstein_1d: p must be >= 1");
  std::vector<double> a(xs.begin(), xs.end());
  std::vector<double> b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> cost(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) cost[i] = std::pow(std::abs(a[i] - b[i]), p);
  return std::pow(mean(cost), 1.0 / p);
}

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError("normal_quantile: probability outside (0, 1)");
  // Acklam's rational approximation (relative error ~1e-9) followed by one
  // Halley step against erfc, which brings it to full double accuracy.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double low = 0.02425;

  double x;
  if (prob < low) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - low) {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - prob;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double wasserstein_to_normal(std::span<const double> xs, double mu, double sigma, double p) {
  if (xs.empty()) throw ContractError("wasserstein_to_normal: empty sample");
  if (!(sigma >= 0.0)) throw ContractError("wasserstein_to_normal: sigma must be >= 0");
  const std::size_t n = xs.size();
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i)
    q[i] = mu + sigma * normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return wasserstein_1d(xs, q, p);
}

double sigma_f(const ModelSpec& model, const FunctionalSpec& f, const Point& theta) {
  const SpaceDescriptor& space = f.space();
  if (!(space == model.parameter_space()))
    throw ContractError("sigma_f: functional and model live in different spaces");
  std::vector<double> grad(space.dim());
  for (std::size_t i = 0; i < space.dim(); ++i) {
    std::vector<double> e(space.dim(), 0.0);
    e[i] = 1.0;
    const Point dir(space, std::move(e));
    grad[i] = derivative(f, 1, theta, std::span<const Point>(&dir, 1), true);
  }
  const DualElement g(space, std::move(grad));
  if (const auto* e = std::get_if<model::ExpFam>(&model.variant())) {
    // Fisher information of the mean parametrization at t = theta
    const Point nat = big_psi_inverse(e->family, theta);
    const Point gp = as_point(g);
    return std::sqrt(sigma_theta_form(e->family, nat, gp, gp));
  }
  return std::sqrt(observation_variance(model, g));
}

double effective_rank(const Point& sigma) {
  const auto& space = sigma.space();
  if (space.kind() != SpaceKind::sym_matrix && space.dim() != 1)
    throw ContractError("effective_rank needs a symmetric-matrix point");
  const std::size_t n = space.kind() == SpaceKind::sym_matrix ? space.side() : 1;
  const auto full = to_full_matrix(space, sigma.coords());
  const double op = linalg::sym_operator_norm(full, n);
  if (op == 0.0) throw DomainError("effective_rank of the zero matrix");
  return linalg::trace(full, n) / op;
}

TailCheckReport bernstein_tail_check(std::span<const double> samples, std::size_t n,
                                     double sigma, double u) {
  if (n == 0) throw ContractError("bernstein_tail_check: n must be >= 1");
  TailCheckReport out;
  out.t_grid = {0.5, 1.0, 2.0, 3.0, 5.0};
  if (samples.empty()) return out;

  std::vector<double> abs_sorted(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) abs_sorted[i] = std::abs(samples[i]);
  std::sort(abs_sorted.begin(), abs_sorted.end());

  const double nn = static_cast<double>(n);
  for (double t : out.t_grid) {
    const double level = 1.0 - std::exp(-t);
    const auto rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(abs_sorted.size())));
    const double q = abs_sorted[std::clamp<std::size_t>(rank, 1, abs_sorted.size()) - 1];
    const double bound = std::max(sigma * std::sqrt(t / nn), u * t / nn);
    out.quantiles.push_back(q);
    out.bounds.push_back(bound);
    if (q > 0.0)
      out.constant = std::max(out.constant,
                              bound > 0.0 ? q / bound : std::numeric_limits<double>::infinity());
  }
  return out;
}

RateCurve::RateCurve(std::vector<double> ns, std::vector<double> errors)
    : ns_(std::move(ns)), errors_(std::move(errors)) {
  if (ns_.size() != errors_.size()) throw ContractError("RateCurve: size mismatch");
  for (std::size_t i = 0; i < ns_.size(); ++i) {
    if (!(errors_[i] > 0.0)) throw ContractError("RateCurve: errors must be positive");
    if (!(ns_[i] > 0.0)) throw ContractError("RateCurve: n must be positive");
    if (i > 0 && !(ns_[i] > ns_[i - 1]))
      throw ContractError("RateCurve: n must be strictly increasing");
  }
}

LogLogFit fit_log_log(const RateCurve& curve) {
  const std::size_t k = curve.ns().size();
  if (k < 3) throw ContractError("rate_slope needs at least 3 points");
  std::vector<double> x(k), y(k);
  for (std::size_t i = 0; i < k; ++i) {
    x[i] = std::log(curve.ns()[i]);
    y[i] = std::log(curve.errors()[i]);
  }
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

double rate_slope(const RateCurve& curve) { return fit_log_log(curve).slope; }

}  // namespace splitfun
