#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "splitfun/expfam.hpp"
#include "splitfun/rng.hpp"
#include "splitfun/space.hpp"

namespace splitfun {

/// One-dimensional factor of a product model. Both kinds have the sample
/// mean as their maximum-likelihood estimator of the mean.
struct ProductComponent {
  enum class Kind { gaussian, bernoulli };
  Kind kind = Kind::gaussian;
  /// Gaussian mean, or Bernoulli success probability.
  double mean = 0.0;
  /// Gaussian standard deviation (unused for Bernoulli).
  double sigma = 1.0;

  static ProductComponent gaussian(double mean, double sigma) {
    return {Kind::gaussian, mean, sigma};
  }
  static ProductComponent bernoulli(double p) { return {Kind::bernoulli, p, 0.0}; }
};

/// Law of the standardized coordinates xi in X = Sigma^{1/2} xi.
enum class XiLaw { gaussian, rademacher, uniform_sym };

std::string_view to_string(XiLaw law);
XiLaw xi_law_from_string(std::string_view s);

namespace model {

struct GaussianLocation {
  std::vector<double> mean;
  std::vector<double> cov_diag;
};
struct Product {
  std::vector<ProductComponent> components;
};
struct Covariance {
  std::size_t side = 1;
  /// Symmetric square root of Sigma, row-major side x side.
  std::vector<double> sigma_sqrt;
  XiLaw xi_law = XiLaw::gaussian;
};
struct ExpFam {
  ExpFamilySpec family;
  Point theta;
};

}  // namespace model

using ModelVariant =
    std::variant<model::GaussianLocation, model::Product, model::Covariance, model::ExpFam>;

/// Statistical model P: how to draw i.i.d. observations and which base
/// estimator (a block mean of a sufficient statistic) estimates theta(P).
class ModelSpec {
 public:
  explicit ModelSpec(ModelVariant variant);

  static ModelSpec gaussian_location(std::vector<double> mean, std::vector<double> cov_diag);
  static ModelSpec product(std::vector<ProductComponent> components);
  static ModelSpec covariance(std::size_t side, std::vector<double> sigma_sqrt, XiLaw law);
  /// Covariance model from Sigma itself; the symmetric square root is taken
  /// by eigen-decomposition.
  static ModelSpec covariance_from_sigma(std::size_t side, std::span<const double> sigma,
                                         XiLaw law);
  static ModelSpec expfam(ExpFamilySpec family, Point theta);

  const ModelVariant& variant() const { return variant_; }
  std::string_view tag() const;
  /// Space of theta(P) and of every base estimate.
  SpaceDescriptor parameter_space() const;
  /// Number of reals per observation row.
  std::size_t row_width() const;
  /// Natural dimension d: coordinates for vector models, side for covariance.
  std::size_t dimension() const;

 private:
  ModelVariant variant_;
};

/// n observations of a model, row-major.
class Dataset {
 public:
  Dataset(ModelSpec model, std::size_t n, std::vector<double> values);

  const ModelSpec& model() const { return model_; }
  std::size_t size() const { return n_; }
  std::size_t width() const { return width_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * width_, width_);
  }
  std::span<const double> values() const { return values_; }

 private:
  ModelSpec model_;
  std::size_t n_;
  std::size_t width_;
  std::vector<double> values_;
};

Dataset sample(const ModelSpec& model, std::size_t n, RngStream& rng);

/// Base estimator on the rows listed in `rows`: block mean of the sufficient
/// statistic (x for location/product/expfam, x x^T for covariance).
Point base_estimate(const ModelSpec& model, const Dataset& data,
                    std::span<const std::size_t> rows);
/// Base estimator on every row.
Point base_estimate(const ModelSpec& model, const Dataset& data);

/// theta(P): the location, the product of means, Sigma, or Psi(theta).
Point true_functional_target(const ModelSpec& model);

/// Var <T(X), g> for one observation, where T is the sufficient statistic
/// averaged by the base estimator. This is <I^{-1} g, g> for the efficient
/// models shipped here.
double observation_variance(const ModelSpec& model, const DualElement& g);

/// True when block means have a closed-form law that can be drawn directly
/// (Gaussian models), making sample_block_means exact in distribution.
bool has_exact_block_sampler(const ModelSpec& model);

/// Independent block means for blocks of the given sizes, drawn from their
/// exact law. Requires has_exact_block_sampler().
std::vector<Point> sample_block_means(const ModelSpec& model,
                                      std::span<const std::size_t> block_sizes,
                                      RngStream& rng);

/// CSV layout: `# splitfun-dataset v1 model=<tag> width=<w>`, a header line
/// x0,...,x{w-1}, then one observation per line.
std::string dump_dataset_csv(const Dataset& data);
Dataset load_dataset_csv(std::string_view text, const ModelSpec& model);

}  // namespace splitfun
