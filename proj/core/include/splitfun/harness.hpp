#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "splitfun/config.hpp"

namespace splitfun {

/// One aggregated cell of an experiment: estimator kind and p at one n.
/// Field order is the CSV column order.
struct ResultRow {
  std::size_t n = 0;
  std::size_t d = 0;
  EstimatorKind estimator = EstimatorKind::taylor;
  double p = 2.0;
  double lp_error = 0.0;
  double bias = 0.0;
  double sd = 0.0;
  /// W2 between sqrt(n)(T - f(theta))/sigma_f and N(0, 1), when sigma_f exists.
  std::optional<double> w2_normal;
  double clipped_fraction = 0.0;
  std::size_t reps = 0;
  /// Replications lost to solver or domain failures.
  std::size_t failures = 0;
  /// More than 1% of replications failed.
  bool failed = false;
  /// Seconds spent on the cell; 0 unless wall-time recording is enabled.
  double wall_time = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr const char* kCsvVersionLine = "# splitfun-csv v1";

/// Runs every grid cell. Replications are spread over `cfg.workers` threads;
/// each draws from its own stream keyed by (master_seed, cell, rep), and
/// results are aggregated in replication order, so the output does not
/// depend on the worker count.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

std::string results_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(std::string_view text);

struct SlopeEntry {
  EstimatorKind estimator;
  double p;
  std::optional<double> slope;
};

struct BiasRatioEntry {
  std::size_t n;
  double plugin_bias;
  double taylor_bias;
};

struct Summary {
  std::vector<SlopeEntry> slopes;
  std::vector<BiasRatioEntry> bias_ratios;
  std::vector<std::string> notices;

  std::string to_text() const;
};

Summary summarize(const std::vector<ResultRow>& rows);

}  // namespace splitfun
