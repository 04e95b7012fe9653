#include "splitfun/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "splitfun/csv.hpp"
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

double xi_draw(XiLaw law, RngStream& rng) {
  switch (law) {
    case XiLaw::gaussian:
      return rng.normal();
    case XiLaw::rademacher:
      return rng.rademacher();
    case XiLaw::uniform_sym:
      return rng.uniform_symmetric();
  }
  return 0.0;
}

// E xi^4 for each standardized law
double xi_fourth_moment(XiLaw law) {
  switch (law) {
    case XiLaw::gaussian:
      return 3.0;
    case XiLaw::rademacher:
      return 1.0;
    case XiLaw::uniform_sym:
      return 9.0 / 5.0;
  }
  return 3.0;
}

}  // namespace

std::string_view to_string(XiLaw law) {
  switch (law) {
    case XiLaw::gaussian:
      return "gaussian";
    case XiLaw::rademacher:
      return "rademacher";
    case XiLaw::uniform_sym:
      return "uniform_sym";
  }
  return "";
}

XiLaw xi_law_from_string(std::string_view s) {
  if (s == "gaussian") return XiLaw::gaussian;
  if (s == "rademacher") return XiLaw::rademacher;
  if (s == "uniform_sym") return XiLaw::uniform_sym;
  throw ConfigError("model.xi_law: expected gaussian, rademacher or uniform_sym, got '" +
                    std::string(s) + "'");
}

ModelSpec::ModelSpec(ModelVariant variant) : variant_(std::move(variant)) {
  std::visit(
      overloaded{
          [](const model::GaussianLocation& g) {
            if (g.mean.empty() || g.mean.size() != g.cov_diag.size())
              throw ContractError("gaussian_location: mean and cov must have equal length >= 1");
            for (double c : g.cov_diag)
              if (!(c >= 0.0) || !std::isfinite(c))
                throw ContractError("gaussian_location: covariance diagonal must be >= 0");
          },
          [](const model::Product& p) {
            if (p.components.empty()) throw ContractError("product: no components");
            for (const auto& c : p.components) {
              if (c.kind == ProductComponent::Kind::bernoulli && !(c.mean > 0.0 && c.mean < 1.0))
                throw ContractError("product: bernoulli p must lie in (0, 1)");
              if (c.kind == ProductComponent::Kind::gaussian && !(c.sigma >= 0.0))
                throw ContractError("product: gaussian sigma must be >= 0");
            }
          },
          [](const model::Covariance& c) {
            if (c.side == 0 || c.sigma_sqrt.size() != c.side * c.side)
              throw ContractError("covariance: sigma_sqrt must be side x side");
            for (std::size_t i = 0; i < c.side; ++i)
              for (std::size_t j = 0; j < i; ++j)
                if (std::abs(c.sigma_sqrt[i * c.side + j] - c.sigma_sqrt[j * c.side + i]) > 1e-12)
                  throw ContractError("covariance: sigma_sqrt must be symmetric");
          },
          [](const model::ExpFam& e) {
            if (!(e.theta.space() == e.family.space()))
              throw ContractError("expfam: theta dimension does not match family");
          }},
      variant_);
}

ModelSpec ModelSpec::gaussian_location(std::vector<double> mean, std::vector<double> cov_diag) {
  return ModelSpec(model::GaussianLocation{std::move(mean), std::move(cov_diag)});
}

ModelSpec ModelSpec::product(std::vector<ProductComponent> components) {
  return ModelSpec(model::Product{std::move(components)});
}

ModelSpec ModelSpec::covariance(std::size_t side, std::vector<double> sigma_sqrt, XiLaw law) {
  return ModelSpec(model::Covariance{side, std::move(sigma_sqrt), law});
}

ModelSpec ModelSpec::covariance_from_sigma(std::size_t side, std::span<const double> sigma,
                                           XiLaw law) {
  if (sigma.size() != side * side) throw ContractError("covariance: Sigma must be side x side");
  const auto eig = linalg::sym_eigen(sigma, side);
  std::vector<double> root(side * side, 0.0);
  for (std::size_t k = 0; k < side; ++k) {
    const double lambda = eig.values[k];
    if (lambda < -1e-12) throw ContractError("covariance: Sigma must be positive semidefinite");
    const double s = std::sqrt(std::max(lambda, 0.0));
    for (std::size_t i = 0; i < side; ++i)
      for (std::size_t j = 0; j < side; ++j)
        root[i * side + j] += s * eig.vectors[i * side + k] * eig.vectors[j * side + k];
  }
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double avg = 0.5 * (root[i * side + j] + root[j * side + i]);
      root[i * side + j] = root[j * side + i] = avg;
    }
  return covariance(side, std::move(root), law);
}

ModelSpec ModelSpec::expfam(ExpFamilySpec family, Point theta) {
  return ModelSpec(model::ExpFam{family, std::move(theta)});
}

std::string_view ModelSpec::tag() const {
  return std::visit(overloaded{[](const model::GaussianLocation&) { return "gaussian_location"; },
                               [](const model::Product&) { return "product"; },
                               [](const model::Covariance&) { return "covariance"; },
                               [](const model::ExpFam&) { return "expfam"; }},
                    variant_);
}

SpaceDescriptor ModelSpec::parameter_space() const {
  return std::visit(
      overloaded{
          [](const model::GaussianLocation& g) { return SpaceDescriptor::euclidean(g.mean.size()); },
          [](const model::Product& p) {
            return SpaceDescriptor::product(std::vector<std::size_t>(p.components.size(), 1));
          },
          [](const model::Covariance& c) { return SpaceDescriptor::sym_matrix(c.side); },
          [](const model::ExpFam& e) { return e.family.space(); }},
      variant_);
}

std::size_t ModelSpec::row_width() const { return dimension(); }

std::size_t ModelSpec::dimension() const {
  return std::visit(overloaded{[](const model::GaussianLocation& g) { return g.mean.size(); },
                               [](const model::Product& p) { return p.components.size(); },
                               [](const model::Covariance& c) { return c.side; },
                               [](const model::ExpFam& e) { return e.family.dim(); }},
                    variant_);
}

Dataset::Dataset(ModelSpec model, std::size_t n, std::vector<double> values)
    : model_(std::move(model)), n_(n), width_(model_.row_width()), values_(std::move(values)) {
  if (values_.size() != n_ * width_)
    throw ContractError("dataset: expected " + std::to_string(n_ * width_) + " values, got " +
                        std::to_string(values_.size()));
}

Dataset sample(const ModelSpec& model, std::size_t n, RngStream& rng) {
  if (n == 0) throw ContractError("sample: n must be >= 1");
  const std::size_t w = model.row_width();
  std::vector<double> values(n * w);
  std::visit(
      overloaded{
          [&](const model::GaussianLocation& g) {
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < w; ++j)
                values[i * w + j] = g.mean[j] + std::sqrt(g.cov_diag[j]) * rng.normal();
          },
          [&](const model::Product& p) {
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < w; ++j) {
                const auto& c = p.components[j];
                values[i * w + j] = c.kind == ProductComponent::Kind::gaussian
                                        ? c.mean + c.sigma * rng.normal()
                                        : (rng.uniform() < c.mean ? 1.0 : 0.0);
              }
          },
          [&](const model::Covariance& c) {
            std::vector<double> xi(w);
            for (std::size_t i = 0; i < n; ++i) {
              for (double& x : xi) x = xi_draw(c.xi_law, rng);
              const auto x = linalg::matvec(c.sigma_sqrt, xi, w);
              std::copy(x.begin(), x.end(), values.begin() + static_cast<std::ptrdiff_t>(i * w));
            }
          },
          [&](const model::ExpFam& e) {
            const Point mean = big_psi(e.family, e.theta);
            switch (e.family.kind()) {
              case ExpFamilySpec::Kind::bernoulli_product:
                for (std::size_t i = 0; i < n; ++i)
                  for (std::size_t j = 0; j < w; ++j)
                    values[i * w + j] = rng.uniform() < mean[j] ? 1.0 : 0.0;
                break;
              case ExpFamilySpec::Kind::gaussian_natural:
                for (std::size_t i = 0; i < n; ++i)
                  for (std::size_t j = 0; j < w; ++j) values[i * w + j] = mean[j] + rng.normal();
                break;
              case ExpFamilySpec::Kind::spherical:
                if (e.family.profile().kind() != PhiProfile::Kind::identity)
                  throw UnsupportedError(
                      "sampling is only available for the identity spherical profile");
                for (std::size_t i = 0; i < n; ++i)
                  for (std::size_t j = 0; j < w; ++j) values[i * w + j] = mean[j] + rng.normal();
                break;
            }
          }},
      model.variant());
  return Dataset(model, n, std::move(values));
}

Point base_estimate(const ModelSpec& model, const Dataset& data,
                    std::span<const std::size_t> rows) {
  if (rows.empty()) throw ContractError("base_estimate: empty index block");
  const std::size_t w = data.width();
  if (w != model.row_width()) throw ContractError("base_estimate: dataset does not match model");
  const double inv = 1.0 / static_cast<double>(rows.size());

  if (const auto* c = std::get_if<model::Covariance>(&model.variant())) {
    std::vector<double> full(w * w, 0.0);
    for (std::size_t r : rows) {
      if (r >= data.size()) throw ContractError("base_estimate: row index out of range");
      const auto x = data.row(r);
      for (std::size_t i = 0; i < w; ++i)
        for (std::size_t j = i; j < w; ++j) full[i * w + j] += x[i] * x[j];
    }
    for (std::size_t i = 0; i < w; ++i)
      for (std::size_t j = i; j < w; ++j) {
        full[i * w + j] *= inv;
        full[j * w + i] = full[i * w + j];
      }
    return point_from_matrix(c->side, full);
  }

  std::vector<double> mean(w, 0.0);
  for (std::size_t r : rows) {
    if (r >= data.size()) throw ContractError("base_estimate: row index out of range");
    const auto x = data.row(r);
    for (std::size_t j = 0; j < w; ++j) mean[j] += x[j];
  }
  for (double& m : mean) m *= inv;
  return Point(model.parameter_space(), std::move(mean));
}

Point base_estimate(const ModelSpec& model, const Dataset& data) {
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return base_estimate(model, data, all);
}

Point true_functional_target(const ModelSpec& model) {
  return std::visit(
      overloaded{
          [](const model::GaussianLocation& g) {
            return Point(SpaceDescriptor::euclidean(g.mean.size()), g.mean);
          },
          [&](const model::Product& p) {
            std::vector<double> m;
            for (const auto& c : p.components) m.push_back(c.mean);
            return Point(model.parameter_space(), std::move(m));
          },
          [](const model::Covariance& c) {
            const auto sigma = linalg::matmul(c.sigma_sqrt, c.sigma_sqrt, c.side);
            // symmetrize rounding before packing
            std::vector<double> s(sigma);
            for (std::size_t i = 0; i < c.side; ++i)
              for (std::size_t j = 0; j < i; ++j)
                s[i * c.side + j] = s[j * c.side + i] =
                    0.5 * (sigma[i * c.side + j] + sigma[j * c.side + i]);
            return point_from_matrix(c.side, s);
          },
          [](const model::ExpFam& e) { return big_psi(e.family, e.theta); }},
      model.variant());
}

double observation_variance(const ModelSpec& model, const DualElement& g) {
  if (!(g.space() == model.parameter_space()))
    throw ContractError("observation_variance: direction is not in the parameter space");
  return std::visit(
      overloaded{
          [&](const model::GaussianLocation& m) {
            double s = 0.0;
            for (std::size_t i = 0; i < m.cov_diag.size(); ++i) s += m.cov_diag[i] * g[i] * g[i];
            return s;
          },
          [&](const model::Product& p) {
            double s = 0.0;
            for (std::size_t i = 0; i < p.components.size(); ++i) {
              const auto& c = p.components[i];
              const double var = c.kind == ProductComponent::Kind::gaussian
                                     ? c.sigma * c.sigma
                                     : c.mean * (1.0 - c.mean);
              s += var * g[i] * g[i];
            }
            return s;
          },
          [&](const model::Covariance& c) {
            // Var(xi^T B xi) = 2 tr(B^2) + (E xi^4 - 3) sum_i B_ii^2,
            // B = Sigma^{1/2} G Sigma^{1/2}
            const std::size_t n = c.side;
            const auto gf = to_full_matrix(g.space(), g.coords());
            const auto b = linalg::matmul(linalg::matmul(c.sigma_sqrt, gf, n), c.sigma_sqrt, n);
            double tr_b2 = 0.0;
            double diag2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              diag2 += b[i * n + i] * b[i * n + i];
              for (std::size_t j = 0; j < n; ++j) tr_b2 += b[i * n + j] * b[j * n + i];
            }
            return 2.0 * tr_b2 + (xi_fourth_moment(c.xi_law) - 3.0) * diag2;
          },
          [&](const model::ExpFam& e) {
            const Point gp = as_point(g);
            return sigma_theta_form(e.family, e.theta, gp, gp);
          }},
      model.variant());
}

bool has_exact_block_sampler(const ModelSpec& model) {
  return std::visit(
      overloaded{[](const model::GaussianLocation&) { return true; },
                 [](const model::Product& p) {
                   for (const auto& c : p.components)
                     if (c.kind != ProductComponent::Kind::gaussian) return false;
                   return true;
                 },
                 [](const model::Covariance&) { return false; },
                 [](const model::ExpFam& e) {
                   return e.family.kind() == ExpFamilySpec::Kind::gaussian_natural ||
                          (e.family.kind() == ExpFamilySpec::Kind::spherical &&
                           e.family.profile().kind() == PhiProfile::Kind::identity);
                 }},
      model.variant());
}

std::vector<Point> sample_block_means(const ModelSpec& model,
                                      std::span<const std::size_t> block_sizes,
                                      RngStream& rng) {
  if (!has_exact_block_sampler(model))
    throw UnsupportedError(std::string(model.tag()) + " has no exact block-mean sampler");
  const std::size_t d = model.dimension();
  std::vector<double> mean(d), sd(d);
  std::visit(overloaded{[&](const model::GaussianLocation& g) {
                          for (std::size_t j = 0; j < d; ++j) {
                            mean[j] = g.mean[j];
                            sd[j] = std::sqrt(g.cov_diag[j]);
                          }
                        },
                        [&](const model::Product& p) {
                          for (std::size_t j = 0; j < d; ++j) {
                            mean[j] = p.components[j].mean;
                            sd[j] = p.components[j].sigma;
                          }
                        },
                        [&](const model::ExpFam& e) {
                          const Point m = big_psi(e.family, e.theta);
                          for (std::size_t j = 0; j < d; ++j) {
                            mean[j] = m[j];
                            sd[j] = 1.0;
                          }
                        },
                        [](const model::Covariance&) {}},
             model.variant());

  std::vector<Point> out;
  out.reserve(block_sizes.size());
  for (std::size_t size : block_sizes) {
    if (size == 0) throw ContractError("sample_block_means: empty block");
    const double scale = 1.0 / std::sqrt(static_cast<double>(size));
    std::vector<double> x(d);
    for (std::size_t j = 0; j < d; ++j) x[j] = mean[j] + sd[j] * scale * rng.normal();
    out.emplace_back(model.parameter_space(), std::move(x));
  }
  return out;
}

std::string dump_dataset_csv(const Dataset& data) {
  std::ostringstream os;
  os << "# splitfun-dataset v1 model=" << data.model().tag() << " width=" << data.width()
     << '\n';
  for (std::size_t j = 0; j < data.width(); ++j) os << (j ? "," : "") << 'x' << j;
  os << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << csv::format_double(row[j]);
    os << '\n';
  }
  return os.str();
}

Dataset load_dataset_csv(std::string_view text, const ModelSpec& model) {
  const auto lines = csv::split_lines(text);
  if (lines.size() < 2) throw ContractError("dataset csv: missing header");
  const std::string expected = "# splitfun-dataset v1 model=" + std::string(model.tag()) +
                               " width=" + std::to_string(model.row_width());
  if (lines[0] != expected)
    throw ContractError("dataset csv: header '" + std::string(lines[0]) + "' does not match '" +
                        expected + "'");
  const std::size_t w = model.row_width();
  if (csv::split_fields(lines[1]).size() != w)
    throw ContractError("dataset csv: column header width mismatch");
  std::vector<double> values;
  std::size_t n = 0;
  for (std::size_t li = 2; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto fields = csv::split_fields(lines[li]);
    if (fields.size() != w)
      throw ContractError("dataset csv: line " + std::to_string(li + 1) + " has " +
                          std::to_string(fields.size()) + " fields");
    for (auto f : fields) values.push_back(csv::parse_double(f));
    ++n;
  }
  return Dataset(model, n, std::move(values));
}

}  // namespace splitfun
