#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "splitfun/estimator.hpp"
#include "splitfun/functionals.hpp"
#include "splitfun/models.hpp"
#include "splitfun/splitter.hpp"

namespace splitfun {

/// YAML document with one level of sections:
///
///     section:
///       key: value          # scalar
///       list: [1, 2, 3]     # flow or block sequence of scalars
///
/// Keys are addressed as "section.key". Every key must be consumed by the
/// schema; leftovers are reported by unused_keys().
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  /// Overrides or adds a value given as YAML text, e.g. "3" or "[1, 2]".
  void set(const std::string& key, const std::string& value);

  std::vector<std::string> unused_keys() const;

 private:
  const std::string& raw(const std::string& key) const;

  std::map<std::string, std::string> values_;
  std::map<std::string, std::vector<std::string>> lists_;
  mutable std::set<std::string> used_;
};

/// Model parameters as written in a config; instantiated per dimension d so
/// that d may follow the sample size.
struct ModelTemplate {
  std::string kind;
  std::optional<std::size_t> d;
  // gaussian_location
  std::vector<double> mean;
  double mean_norm = 0.0;
  std::vector<double> cov;
  double sigma = 1.0;
  // product
  std::vector<ProductComponent> components;
  // covariance: Sigma = diag(sigma_diag) or diag(1, decay, decay^2, ...)
  std::vector<double> sigma_diag;
  double sigma_decay = 1.0;
  XiLaw xi_law = XiLaw::gaussian;
  // expfam
  std::string family;
  std::string profile = "identity";
  double profile_scale = 1.0;
  std::vector<double> theta;
  double theta_value = 0.0;

  std::size_t default_dimension() const;
  ModelSpec instantiate(std::size_t d) const;
};

struct FunctionalTemplate {
  std::string kind;
  /// Direction; empty means the unit vector (1, ..., 1)/sqrt(d), or the
  /// identity/side for matrix functionals.
  std::vector<double> u;
  int degree = 2;
  double center = 0.0;
  double width = 1.0;
  std::vector<double> a;
  std::vector<double> b;
  double c = 0.0;
  std::optional<double> sup_norm;
  std::optional<double> lip_norm;

  FunctionalSpec instantiate(const ModelSpec& model) const;
};

struct DimensionRule {
  enum class Kind { model_default, fixed, power };
  Kind kind = Kind::model_default;
  std::size_t fixed = 0;
  double alpha = 0.0;

  /// d for sample size n; power gives ceil(n^alpha).
  std::size_t dimension(std::size_t n, std::size_t model_default) const;
};

enum class EstimatorKind { taylor, truncated, plugin };
std::string_view to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(std::string_view s);

enum class SamplingMode {
  /// sufficient when the model has an exact block sampler, else rows
  automatic,
  rows,
  sufficient,
};

struct ExperimentConfig {
  ModelTemplate model;
  FunctionalTemplate functional;
  int m = 2;
  SplitMode split_mode = SplitMode::balanced;
  bool split_shuffle = false;
  TruncRule trunc_rule = trunc::None{};
  bool allow_fd_fallback = false;
  std::vector<std::size_t> n_grid;
  DimensionRule d_rule;
  std::size_t reps = 1;
  std::vector<double> p_list = {2.0};
  std::vector<EstimatorKind> kinds = {EstimatorKind::taylor, EstimatorKind::truncated,
                                      EstimatorKind::plugin};
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  SamplingMode sampling = SamplingMode::automatic;
  bool record_wall_time = false;
  std::string output = "results.csv";
};

/// Parses and validates; ConfigError messages name the offending key.
ExperimentConfig parse_experiment_config(const KeyValueConfig& kv);
ExperimentConfig parse_experiment_config(std::string_view text);

/// Validation shared by the parser and programmatic callers.
void validate(const ExperimentConfig& cfg);

/// Model parsing on its own (used by the diag command).
ModelTemplate parse_model_template(const KeyValueConfig& kv);
FunctionalTemplate parse_functional_template(const KeyValueConfig& kv);

}  // namespace splitfun
