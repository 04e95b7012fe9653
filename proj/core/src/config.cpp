#include "splitfun/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include <yaml-cpp/yaml.h>

#include "splitfun/errors.hpp"

namespace splitfun {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, std::string_view s) {
  s = trim(s);
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(x))
    throw ConfigError(key + ": expected a number, got '" + std::string(s) + "'");
  return x;
}

std::int64_t to_int(const std::string& key, std::string_view s) {
  s = trim(s);
  std::int64_t x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError(key + ": expected an integer, got '" + std::string(s) + "'");
  return x;
}

// "name(arg)" -> {name, arg}
std::pair<std::string, std::string> call_form(const std::string& key, std::string_view s) {
  s = trim(s);
  const auto open = s.find('(');
  if (open == std::string_view::npos || s.back() != ')')
    throw ConfigError(key + ": expected name(value), got '" + std::string(s) + "'");
  return {std::string(trim(s.substr(0, open))),
          std::string(trim(s.substr(open + 1, s.size() - open - 2)))};
}

std::vector<double> unit_diagonal_direction(std::size_t d) {
  return std::vector<double>(d, 1.0 / std::sqrt(static_cast<double>(d)));
}

}  // namespace

// --- KeyValueConfig ----------------------------------------------------------

namespace {

std::string yaml_error(const YAML::Exception& e) {
  return "line " + std::to_string(e.mark.line + 1) + ": " + e.msg;
}

// Scalars keep their source text; numbers are converted on access.
void store(const std::string& key, const YAML::Node& node,
           std::map<std::string, std::string>& scalars,
           std::map<std::string, std::vector<std::string>>& lists) {
  scalars.erase(key);
  lists.erase(key);
  if (node.IsNull()) throw ConfigError(key + ": missing value");
  if (node.IsScalar()) {
    scalars[key] = node.Scalar();
  } else if (node.IsSequence()) {
    auto& out = lists[key];
    for (const auto& item : node) {
      if (!item.IsScalar()) throw ConfigError(key + ": list entries must be scalars");
      out.push_back(item.Scalar());
    }
  } else {
    throw ConfigError(key + ": nested maps are not allowed below a section");
  }
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(yaml_error(e));
  }
  KeyValueConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError("top level must be a map of sections");
  for (const auto& section : root) {
    const std::string name = section.first.as<std::string>();
    auto add = [&](const std::string& key, const YAML::Node& node) {
      if (cfg.has(key)) throw ConfigError(key + ": duplicate key");
      store(key, node, cfg.values_, cfg.lists_);
    };
    if (!section.second.IsMap()) {
      add(name, section.second);
      continue;
    }
    for (const auto& entry : section.second) add(name + "." + entry.first.as<std::string>(), entry.second);
  }
  return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) > 0 || lists_.count(key) > 0;
}

const std::string& KeyValueConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    if (lists_.count(key)) throw ConfigError(key + ": expected a single value, got a list");
    throw ConfigError(key + ": required key is missing");
  }
  used_.insert(key);
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key) const { return raw(key); }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const { return to_double(key, raw(key)); }

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t KeyValueConfig::get_int(const std::string& key) const { return to_int(key, raw(key)); }

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValueConfig::get_uint64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string_view s = trim(raw(key));
  std::uint64_t x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + std::string(s) + "'");
  return x;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : get_string_list(key)) out.push_back(to_double(key, s));
  return out;
}

std::vector<std::string> KeyValueConfig::get_string_list(const std::string& key) const {
  const auto it = lists_.find(key);
  if (it == lists_.end()) {
    if (values_.count(key)) throw ConfigError(key + ": expected a list like [a, b, c]");
    throw ConfigError(key + ": required key is missing");
  }
  used_.insert(key);
  return it->second;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  YAML::Node node;
  try {
    node = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError(key + ": " + e.msg);
  }
  store(key, node, values_, lists_);
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) out.push_back(k);
  for (const auto& [k, v] : lists_)
    if (!used_.count(k)) out.push_back(k);
  std::sort(out.begin(), out.end());
  return out;
}

// --- templates ---------------------------------------------------------------

std::size_t ModelTemplate::default_dimension() const {
  if (d) return *d;
  if (kind == "gaussian_location") {
    if (!mean.empty()) return mean.size();
    if (!cov.empty()) return cov.size();
  }
  if (kind == "product") return components.size();
  if (kind == "covariance" && !sigma_diag.empty()) return sigma_diag.size();
  if (kind == "expfam" && !theta.empty()) return theta.size();
  throw ConfigError("model.d: dimension is not determined by the model parameters");
}

ModelSpec ModelTemplate::instantiate(std::size_t dim) const {
  if (dim == 0) throw ConfigError("model.d: dimension must be >= 1");
  auto sized = [&](const std::vector<double>& v, const char* key) {
    if (v.size() != dim)
      throw ConfigError(std::string("model.") + key + ": has " + std::to_string(v.size()) +
                        " entries but d = " + std::to_string(dim));
    return v;
  };

  if (kind == "gaussian_location") {
    std::vector<double> m = mean.empty() ? unit_diagonal_direction(dim) : sized(mean, "mean");
    if (mean.empty())
      for (double& x : m) x *= mean_norm;
    std::vector<double> c = cov.empty() ? std::vector<double>(dim, sigma * sigma) : sized(cov, "cov");
    return ModelSpec::gaussian_location(std::move(m), std::move(c));
  }
  if (kind == "product") {
    if (components.size() != dim)
      throw ConfigError("model.components: has " + std::to_string(components.size()) +
                        " entries but d = " + std::to_string(dim));
    return ModelSpec::product(components);
  }
  if (kind == "covariance") {
    std::vector<double> diag = sigma_diag;
    if (diag.empty()) {
      diag.resize(dim);
      for (std::size_t i = 0; i < dim; ++i) diag[i] = std::pow(sigma_decay, static_cast<double>(i));
    }
    sized(diag, "sigma_diag");
    std::vector<double> root(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      if (diag[i] < 0.0) throw ConfigError("model.sigma_diag: entries must be >= 0");
      root[i * dim + i] = std::sqrt(diag[i]);
    }
    return ModelSpec::covariance(dim, std::move(root), xi_law);
  }
  if (kind == "expfam") {
    ExpFamilySpec fam = [&] {
      if (family == "bernoulli_product") return ExpFamilySpec::bernoulli_product(dim);
      if (family == "gaussian_natural") return ExpFamilySpec::gaussian_natural(dim);
      if (family == "spherical") {
        if (profile == "identity") return ExpFamilySpec::spherical(dim, PhiProfile::identity());
        if (profile == "logistic_like")
          return ExpFamilySpec::spherical(dim, PhiProfile::logistic_like(profile_scale));
        throw ConfigError("model.profile: expected identity or logistic_like, got '" + profile + "'");
      }
      throw ConfigError("model.family: expected bernoulli_product, gaussian_natural or spherical, got '" +
                        family + "'");
    }();
    std::vector<double> th = theta.empty() ? std::vector<double>(dim, theta_value) : sized(theta, "theta");
    return ModelSpec::expfam(fam, Point(fam.space(), std::move(th)));
  }
  throw ConfigError("model.kind: expected gaussian_location, product, covariance or expfam, got '" +
                    kind + "'");
}

FunctionalSpec FunctionalTemplate::instantiate(const ModelSpec& model) const {
  const SpaceDescriptor space = model.parameter_space();
  const bool matrix_model = std::holds_alternative<model::Covariance>(model.variant());
  const std::size_t side = model.dimension();

  auto direction = [&]() -> DualElement {
    if (matrix_model) {
      std::vector<double> full = u;
      if (full.empty()) {
        full.assign(side * side, 0.0);
        for (std::size_t i = 0; i < side; ++i) full[i * side + i] = 1.0 / static_cast<double>(side);
      }
      if (full.size() != side * side)
        throw ConfigError("functional.u: matrix direction needs side*side entries");
      return dual_from_matrix(side, full);
    }
    std::vector<double> v = u.empty() ? unit_diagonal_direction(space.dim()) : u;
    if (v.size() != space.dim())
      throw ConfigError("functional.u: has " + std::to_string(v.size()) + " entries but d = " +
                        std::to_string(space.dim()));
    return DualElement(space, std::move(v));
  };

  FunctionalSpec f = [&]() -> FunctionalSpec {
    if (kind == "linear") return FunctionalSpec::linear(direction());
    if (kind == "squared_norm") return FunctionalSpec::squared_norm(space);
    if (kind == "smooth_sqrt") return FunctionalSpec::smooth_sqrt(space);
    if (kind == "sin_pairing") return FunctionalSpec::sin_pairing(direction());
    if (kind == "monomial_pairing") {
      if (degree < 1) throw ConfigError("functional.degree: must be >= 1");
      return FunctionalSpec::monomial_pairing(direction(), degree);
    }
    if (kind == "bump_pairing") {
      if (!(width > 0.0)) throw ConfigError("functional.width: must be > 0");
      return FunctionalSpec::bump_pairing(direction(), center, width);
    }
    if (kind == "matrix_linear" || kind == "matrix_quadratic") {
      if (!matrix_model) throw ConfigError("functional.kind: " + kind + " needs a covariance model");
      return kind == "matrix_linear" ? FunctionalSpec::matrix_linear(direction())
                                     : FunctionalSpec::matrix_quadratic(direction());
    }
    if (kind == "affine_quadratic") {
      const std::size_t n = space.dim();
      if (a.size() != n * n) throw ConfigError("functional.a: needs dim*dim entries");
      std::vector<double> bb = b.empty() ? std::vector<double>(n, 0.0) : b;
      if (bb.size() != n) throw ConfigError("functional.b: needs dim entries");
      return FunctionalSpec::affine_quadratic(a, DualElement(space, std::move(bb)), c);
    }
    if (kind == "expfam_entropy") {
      const auto* e = std::get_if<model::ExpFam>(&model.variant());
      if (!e) throw ConfigError("functional.kind: expfam_entropy needs an expfam model");
      return FunctionalSpec::expfam_entropy(e->family);
    }
    throw ConfigError("functional.kind: unknown functional '" + kind + "'");
  }();
  if (sup_norm || lip_norm) {
    return f.with_declared_norms(sup_norm ? sup_norm : f.declared_sup_norm(),
                                 lip_norm ? lip_norm : f.declared_lip_norm());
  }
  return f;
}

std::size_t DimensionRule::dimension(std::size_t n, std::size_t model_default) const {
  switch (kind) {
    case Kind::model_default:
      return model_default;
    case Kind::fixed:
      return fixed;
    case Kind::power:
      return static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), alpha) - 1e-9));
  }
  return model_default;
}

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::taylor:
      return "taylor";
    case EstimatorKind::truncated:
      return "truncated";
    case EstimatorKind::plugin:
      return "plugin";
  }
  return "";
}

EstimatorKind estimator_kind_from_string(std::string_view s) {
  if (s == "taylor") return EstimatorKind::taylor;
  if (s == "truncated") return EstimatorKind::truncated;
  if (s == "plugin") return EstimatorKind::plugin;
  throw ConfigError("experiment.kinds: unknown estimator kind '" + std::string(s) + "'");
}

// --- experiment schema -------------------------------------------------------

ModelTemplate parse_model_template(const KeyValueConfig& kv) {
  ModelTemplate t;
  t.kind = kv.get_string("model.kind");
  if (kv.has("model.d")) {
    const auto d = kv.get_int("model.d");
    if (d < 1) throw ConfigError("model.d: must be >= 1");
    t.d = static_cast<std::size_t>(d);
  }
  if (kv.has("model.mean")) t.mean = kv.get_double_list("model.mean");
  t.mean_norm = kv.get_double("model.mean_norm", 0.0);
  if (kv.has("model.cov")) t.cov = kv.get_double_list("model.cov");
  t.sigma = kv.get_double("model.sigma", 1.0);
  if (!(t.sigma >= 0.0)) throw ConfigError("model.sigma: must be >= 0");
  if (kv.has("model.components")) {
    for (const auto& c : kv.get_string_list("model.components")) {
      // gaussian:<mean>:<sigma> or bernoulli:<p>
      std::vector<std::string> parts;
      std::size_t start = 0;
      while (true) {
        const auto pos = c.find(':', start);
        parts.push_back(c.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
      if (parts[0] == "gaussian" && parts.size() == 3) {
        t.components.push_back(ProductComponent::gaussian(to_double("model.components", parts[1]),
                                                          to_double("model.components", parts[2])));
      } else if (parts[0] == "bernoulli" && parts.size() == 2) {
        const double p = to_double("model.components", parts[1]);
        if (!(p > 0.0 && p < 1.0)) throw ConfigError("model.components: bernoulli p must lie in (0, 1)");
        t.components.push_back(ProductComponent::bernoulli(p));
      } else {
        throw ConfigError("model.components: expected gaussian:<mean>:<sigma> or bernoulli:<p>, got '" +
                          c + "'");
      }
    }
  }
  if (kv.has("model.sigma_diag")) t.sigma_diag = kv.get_double_list("model.sigma_diag");
  t.sigma_decay = kv.get_double("model.sigma_decay", 1.0);
  if (kv.has("model.xi_law")) t.xi_law = xi_law_from_string(kv.get_string("model.xi_law"));
  t.family = kv.get_string("model.family", "");
  t.profile = kv.get_string("model.profile", "identity");
  t.profile_scale = kv.get_double("model.scale", 1.0);
  if (kv.has("model.theta")) t.theta = kv.get_double_list("model.theta");
  t.theta_value = kv.get_double("model.theta_value", 0.0);
  return t;
}

FunctionalTemplate parse_functional_template(const KeyValueConfig& kv) {
  FunctionalTemplate t;
  t.kind = kv.get_string("functional.kind");
  if (kv.has("functional.u")) t.u = kv.get_double_list("functional.u");
  t.degree = static_cast<int>(kv.get_int("functional.degree", 2));
  t.center = kv.get_double("functional.center", 0.0);
  t.width = kv.get_double("functional.width", 1.0);
  if (kv.has("functional.a")) t.a = kv.get_double_list("functional.a");
  if (kv.has("functional.b")) t.b = kv.get_double_list("functional.b");
  t.c = kv.get_double("functional.c", 0.0);
  if (kv.has("functional.sup_norm")) t.sup_norm = kv.get_double("functional.sup_norm");
  if (kv.has("functional.lip_norm")) t.lip_norm = kv.get_double("functional.lip_norm");
  for (const auto& n : {t.sup_norm, t.lip_norm})
    if (n && *n < 0.0) throw ConfigError("functional.sup_norm/lip_norm: must be >= 0");
  return t;
}

ExperimentConfig parse_experiment_config(const KeyValueConfig& kv) {
  ExperimentConfig cfg;
  cfg.model = parse_model_template(kv);
  cfg.functional = parse_functional_template(kv);
  cfg.allow_fd_fallback = kv.get_bool("functional.fd_fallback", false);

  cfg.m = static_cast<int>(kv.get_int("estimator.m", 2));
  const std::string trunc = kv.get_string("estimator.trunc", "none");
  if (trunc == "none") {
    cfg.trunc_rule = trunc::None{};
  } else if (trunc == "fixed") {
    cfg.trunc_rule = trunc::Fixed{kv.get_double("estimator.trunc_level")};
  } else if (trunc == "auto") {
    cfg.trunc_rule = trunc::Auto{kv.get_double("estimator.trunc_delta", 0.0)};
  } else {
    throw ConfigError("estimator.trunc: expected none, fixed or auto, got '" + trunc + "'");
  }

  cfg.split_mode = split_mode_from_string(kv.get_string("split.mode", "balanced"));
  cfg.split_shuffle = kv.get_bool("split.shuffle", false);

  for (double n : kv.get_double_list("experiment.n_grid")) {
    if (!(n >= 1.0) || n != std::floor(n))
      throw ConfigError("experiment.n_grid: entries must be positive integers");
    cfg.n_grid.push_back(static_cast<std::size_t>(n));
  }
  if (kv.has("experiment.d_rule")) {
    const auto [name, arg] = call_form("experiment.d_rule", kv.get_string("experiment.d_rule"));
    if (name == "fixed") {
      const auto d = to_int("experiment.d_rule", arg);
      if (d < 1) throw ConfigError("experiment.d_rule: fixed dimension must be >= 1");
      cfg.d_rule = {DimensionRule::Kind::fixed, static_cast<std::size_t>(d), 0.0};
    } else if (name == "power") {
      cfg.d_rule = {DimensionRule::Kind::power, 0, to_double("experiment.d_rule", arg)};
    } else {
      throw ConfigError("experiment.d_rule: expected fixed(d) or power(alpha)");
    }
  }
  const auto reps = kv.get_int("experiment.reps", 1);
  if (reps < 1) throw ConfigError("experiment.reps: must be >= 1");
  cfg.reps = static_cast<std::size_t>(reps);
  if (kv.has("experiment.p_list")) cfg.p_list = kv.get_double_list("experiment.p_list");
  if (kv.has("experiment.kinds")) {
    cfg.kinds.clear();
    for (const auto& k : kv.get_string_list("experiment.kinds"))
      cfg.kinds.push_back(estimator_kind_from_string(k));
  }
  cfg.master_seed = kv.get_uint64("experiment.seed", 0);
  const auto workers = kv.get_int("experiment.workers", 1);
  if (workers < 1) throw ConfigError("experiment.workers: must be >= 1");
  cfg.workers = static_cast<std::size_t>(workers);
  const std::string sampling = kv.get_string("experiment.sampling", "auto");
  if (sampling == "auto") cfg.sampling = SamplingMode::automatic;
  else if (sampling == "rows") cfg.sampling = SamplingMode::rows;
  else if (sampling == "sufficient") cfg.sampling = SamplingMode::sufficient;
  else throw ConfigError("experiment.sampling: expected auto, rows or sufficient");
  cfg.record_wall_time = kv.get_bool("experiment.record_wall_time", false);
  cfg.output = kv.get_string("output.path", "results.csv");

  const auto unused = kv.unused_keys();
  if (!unused.empty()) throw ConfigError(unused.front() + ": unknown key");

  validate(cfg);
  return cfg;
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  return parse_experiment_config(KeyValueConfig::parse(text));
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.m < 1 || cfg.m > kMaxOrder)
    throw ConfigError("estimator.m: must lie in 1.." + std::to_string(kMaxOrder));
  if (cfg.n_grid.empty()) throw ConfigError("experiment.n_grid: must not be empty");
  if (!std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end()) ||
      std::adjacent_find(cfg.n_grid.begin(), cfg.n_grid.end()) != cfg.n_grid.end())
    throw ConfigError("experiment.n_grid: must be strictly increasing");
  const std::size_t n_min = minimum_sample_size(cfg.m, cfg.split_mode);
  for (std::size_t n : cfg.n_grid)
    if (n < n_min)
      throw ConfigError("experiment.n_grid: n=" + std::to_string(n) + " is too small for m=" +
                        std::to_string(cfg.m) + " with " + std::string(to_string(cfg.split_mode)) +
                        " split; minimum n is " + std::to_string(n_min));
  if (cfg.d_rule.kind == DimensionRule::Kind::power &&
      !(cfg.d_rule.alpha > 0.0 && cfg.d_rule.alpha < 1.0))
    throw ConfigError("experiment.d_rule: power exponent must lie in (0, 1)");
  if (cfg.reps < 1) throw ConfigError("experiment.reps: must be >= 1");
  if (cfg.p_list.empty()) throw ConfigError("experiment.p_list: must not be empty");
  for (double p : cfg.p_list)
    if (!(p >= 1.0)) throw ConfigError("experiment.p_list: every p must be >= 1");
  if (cfg.kinds.empty()) throw ConfigError("experiment.kinds: must not be empty");
  if (cfg.workers < 1) throw ConfigError("experiment.workers: must be >= 1");
  if (const auto* f = std::get_if<trunc::Fixed>(&cfg.trunc_rule); f && !(f->level >= 0.0))
    throw ConfigError("estimator.trunc_level: must be >= 0");
  if (cfg.model.kind.empty()) throw ConfigError("model.kind: required");
  if (cfg.functional.kind.empty()) throw ConfigError("functional.kind: required");
  // Dry instantiation at the first grid point surfaces unknown kinds and shape errors.
  const std::size_t default_d = cfg.d_rule.kind == DimensionRule::Kind::model_default
                                    ? cfg.model.default_dimension()
                                    : 0;
  const std::size_t d = cfg.d_rule.dimension(cfg.n_grid.front(), default_d);
  cfg.functional.instantiate(cfg.model.instantiate(d));
}

}  // namespace splitfun
