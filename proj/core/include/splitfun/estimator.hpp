#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "splitfun/functionals.hpp"
#include "splitfun/models.hpp"
#include "splitfun/space.hpp"
#include "splitfun/splitter.hpp"

namespace splitfun {

/// Anchor estimate theta^(0) and, for each k = 1..m, the k block estimates
/// theta_j^(k). levels[k - 1] has exactly k entries.
struct BaseEstimates {
  Point theta0;
  std::vector<std::vector<Point>> levels;

  int order() const { return static_cast<int>(levels.size()); }
};

/// Per-order Taylor terms and the (optionally truncated) estimate.
struct EstimateBreakdown {
  /// order_terms[k] = f^(k)(theta0)[theta_1^(k) - theta0, ...] / k!, k = 0..m.
  std::vector<double> order_terms;
  /// Sum of order_terms in ascending k.
  double raw = 0.0;
  int m = 0;
  std::optional<double> trunc_level;
  /// raw clamped to [-M, M] when trunc_level is set, else raw.
  double value = 0.0;
  bool clipped = false;
};

namespace trunc {
struct None {};
struct Fixed {
  double level = 0.0;
};
/// M from the functional's Holder bounds: sup norm, plus lip * delta when a
/// positive delta and a Lipschitz bound are both available.
struct Auto {
  double delta = 0.0;
};
}  // namespace trunc

using TruncRule = std::variant<trunc::None, trunc::Fixed, trunc::Auto>;

/// Resolves M. Auto without a sup-norm bound degrades to no truncation and
/// logs a warning once per call.
std::optional<double> resolve_trunc_level(const TruncRule& rule, const FunctionalSpec& f);

struct TaylorOptions {
  /// Use nested finite differences above the functional's analytic order.
  bool allow_fd_fallback = false;
};

/// n! for n <= 20 in exact integer arithmetic.
std::uint64_t factorial(int n);

/// Order-m Taylor estimator. `value` equals `raw` and no truncation is set.
EstimateBreakdown taylor_estimate(const FunctionalSpec& f, const BaseEstimates& b,
                                  const TaylorOptions& opts = {});

/// Clamp to [-M, M].
double truncate(double raw, double level);

/// Applies truncation to a raw breakdown in place.
void apply_truncation(EstimateBreakdown& e, std::optional<double> level);

double plug_in(const FunctionalSpec& f, const Point& theta_hat);

/// Applies the model's base estimator to every block of the plan.
BaseEstimates base_estimates_from_sample(const ModelSpec& model, const Dataset& data,
                                         const SplitPlan& plan);

EstimateBreakdown estimate_from_sample(const ModelSpec& model, const FunctionalSpec& f,
                                       const Dataset& data, const SplitPlan& plan,
                                       const TruncRule& rule, const TaylorOptions& opts = {});

/// Coarsest common refinement of all levels of a plan. Atom 0 is j0; every
/// block of every level is a union of atoms. Because block estimates are
/// means, a block mean is the size-weighted average of its atoms' means.
struct AtomDecomposition {
  std::vector<std::size_t> sizes;
  /// blocks[k - 1][j] lists the atoms making up block j of level k.
  std::vector<std::vector<std::vector<std::size_t>>> blocks;
};

AtomDecomposition decompose_atoms(const SplitPlan& plan);

/// Base estimates from per-atom means (the sample-mean estimators only).
BaseEstimates base_estimates_from_atoms(const AtomDecomposition& atoms,
                                        const std::vector<Point>& atom_means);
/// Full-sample mean from per-atom means.
Point pooled_mean(const AtomDecomposition& atoms, const std::vector<Point>& atom_means);

}  // namespace splitfun
