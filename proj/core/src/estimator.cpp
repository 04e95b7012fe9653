#include "splitfun/estimator.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <string>

#include "splitfun/errors.hpp"

namespace splitfun {

std::optional<double> resolve_trunc_level(const TruncRule& rule, const FunctionalSpec& f) {
  if (std::holds_alternative<trunc::None>(rule)) return std::nullopt;
  if (const auto* fixed = std::get_if<trunc::Fixed>(&rule)) {
    if (!(fixed->level >= 0.0)) throw ContractError("truncation level must be >= 0");
    return fixed->level;
  }
  const auto& a = std::get<trunc::Auto>(rule);
  const HolderBounds bounds = holder_bounds(f);
  if (!bounds.sup_norm) {
    std::clog << "splitfun: warning: auto truncation requested but " << f.tag()
              << " declares no sup norm; estimates are not truncated\n";
    return std::nullopt;
  }
  double level = *bounds.sup_norm;
  if (a.delta > 0.0 && bounds.lip_norm) level += *bounds.lip_norm * a.delta;
  return level;
}

std::uint64_t factorial(int n) {
  if (n < 0 || n > 20) throw ContractError("factorial: n must lie in 0..20");
  std::uint64_t r = 1;
  for (int i = 2; i <= n; ++i) r *= static_cast<std::uint64_t>(i);
  return r;
}

EstimateBreakdown taylor_estimate(const FunctionalSpec& f, const BaseEstimates& b,
                                  const TaylorOptions& opts) {
  const int m = b.order();
  if (m < 0 || m > kMaxOrder)
    throw ContractError("estimator order m must lie in 0.." + std::to_string(kMaxOrder));

  EstimateBreakdown out;
  out.m = m;
  out.order_terms.reserve(static_cast<std::size_t>(m) + 1);
  out.order_terms.push_back(eval(f, b.theta0));

  for (int k = 1; k <= m; ++k) {
    const auto& level = b.levels[static_cast<std::size_t>(k - 1)];
    if (level.size() != static_cast<std::size_t>(k))
      throw ContractError("level " + std::to_string(k) + " must hold " + std::to_string(k) +
                          " estimates");
    std::vector<Point> dirs;
    dirs.reserve(level.size());
    for (const Point& est : level) dirs.push_back(est - b.theta0);
    const double d = derivative(f, k, b.theta0, dirs, opts.allow_fd_fallback);
    out.order_terms.push_back(d / static_cast<double>(factorial(k)));
  }

  double sum = 0.0;
  for (double t : out.order_terms) sum += t;
  out.raw = sum;
  out.value = sum;
  return out;
}

double truncate(double raw, double level) {
  if (!(level >= 0.0)) throw ContractError("truncation level must be >= 0");
  if (raw > level) return level;
  if (raw < -level) return -level;
  return raw;
}

void apply_truncation(EstimateBreakdown& e, std::optional<double> level) {
  e.trunc_level = level;
  e.value = level ? truncate(e.raw, *level) : e.raw;
  e.clipped = e.value != e.raw;
}

double plug_in(const FunctionalSpec& f, const Point& theta_hat) { return eval(f, theta_hat); }

BaseEstimates base_estimates_from_sample(const ModelSpec& model, const Dataset& data,
                                         const SplitPlan& plan) {
  if (data.size() != plan.n)
    throw ContractError("dataset has " + std::to_string(data.size()) +
                        " rows but the split plan expects " + std::to_string(plan.n));
  BaseEstimates b{base_estimate(model, data, plan.j0), {}};
  b.levels.reserve(plan.parts.size());
  for (const auto& level : plan.parts) {
    std::vector<Point> ests;
    ests.reserve(level.size());
    for (const auto& block : level) ests.push_back(base_estimate(model, data, block));
    b.levels.push_back(std::move(ests));
  }
  return b;
}

EstimateBreakdown estimate_from_sample(const ModelSpec& model, const FunctionalSpec& f,
                                       const Dataset& data, const SplitPlan& plan,
                                       const TruncRule& rule, const TaylorOptions& opts) {
  auto e = taylor_estimate(f, base_estimates_from_sample(model, data, plan), opts);
  apply_truncation(e, resolve_trunc_level(rule, f));
  return e;
}

AtomDecomposition decompose_atoms(const SplitPlan& plan) {
  // signature of index i: which block it occupies at each level
  std::vector<std::vector<std::size_t>> signature(plan.n);
  for (const auto& level : plan.parts)
    for (std::size_t j = 0; j < level.size(); ++j)
      for (std::size_t i : level[j]) signature[i].push_back(j);

  AtomDecomposition out;
  out.sizes.push_back(plan.j0.size());
  std::vector<bool> in_j0(plan.n, false);
  for (std::size_t i : plan.j0) in_j0[i] = true;

  std::map<std::vector<std::size_t>, std::size_t> atom_of;
  for (std::size_t i = 0; i < plan.n; ++i) {
    if (in_j0[i]) continue;
    auto [it, inserted] = atom_of.emplace(signature[i], out.sizes.size());
    if (inserted) out.sizes.push_back(0);
    ++out.sizes[it->second];
  }

  out.blocks.resize(plan.parts.size());
  for (std::size_t k = 0; k < plan.parts.size(); ++k) {
    out.blocks[k].resize(plan.parts[k].size());
    for (const auto& [sig, atom] : atom_of) out.blocks[k][sig[k]].push_back(atom);
    for (auto& b : out.blocks[k]) std::sort(b.begin(), b.end());
  }
  return out;
}

namespace {

Point weighted_mean(const AtomDecomposition& atoms, const std::vector<Point>& means,
                    const std::vector<std::size_t>& ids) {
  std::size_t total = 0;
  for (std::size_t a : ids) total += atoms.sizes[a];
  Point acc = Point::zeros(means[ids.front()].space());
  for (std::size_t a : ids)
    acc += (static_cast<double>(atoms.sizes[a]) / static_cast<double>(total)) * means[a];
  return acc;
}

}  // namespace

BaseEstimates base_estimates_from_atoms(const AtomDecomposition& atoms,
                                        const std::vector<Point>& atom_means) {
  if (atom_means.size() != atoms.sizes.size())
    throw ContractError("one mean per atom is required");
  BaseEstimates b{atom_means[0], {}};
  for (const auto& level : atoms.blocks) {
    std::vector<Point> ests;
    for (const auto& ids : level) ests.push_back(weighted_mean(atoms, atom_means, ids));
    b.levels.push_back(std::move(ests));
  }
  return b;
}

Point pooled_mean(const AtomDecomposition& atoms, const std::vector<Point>& atom_means) {
  std::vector<std::size_t> all(atoms.sizes.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return weighted_mean(atoms, atom_means, all);
}

}  // namespace splitfun
