#include "splitfun/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "splitfun/errors.hpp"
#include "splitfun/rng.hpp"

namespace splitfun {

std::string_view to_string(SplitMode mode) {
  return mode == SplitMode::balanced ? "balanced" : "efficient";
}

SplitMode split_mode_from_string(std::string_view s) {
  if (s == "balanced") return SplitMode::balanced;
  if (s == "efficient") return SplitMode::efficient;
  throw ConfigError("split.mode: expected balanced or efficient, got '" + std::string(s) + "'");
}

std::size_t anchor_size(std::size_t n, SplitMode mode) {
  if (mode == SplitMode::balanced) return (n + 1) / 2;
  const double denom = std::max(std::log(static_cast<double>(n)), 2.0);
  const auto n0 = static_cast<std::size_t>(std::ceil(static_cast<double>(n) / denom));
  return std::max<std::size_t>(1, n0);
}

namespace {

bool feasible(std::size_t n, int m, SplitMode mode) {
  const auto mm = static_cast<std::size_t>(m);
  if (n < mm + 1) return false;
  const std::size_t n0 = anchor_size(n, mode);
  return n0 <= n && n - n0 >= mm;
}

}  // namespace

std::size_t minimum_sample_size(int m, SplitMode mode) {
  if (m < 1) throw ConfigError("estimator.m must be >= 1");
  std::size_t n = static_cast<std::size_t>(m) + 1;
  while (!feasible(n, m, mode)) ++n;
  return n;
}

SplitPlan make_split(std::size_t n, int m, SplitMode mode, std::uint64_t seed, bool shuffle) {
  if (m < 1) throw ConfigError("estimator.m must be >= 1, got " + std::to_string(m));
  if (!feasible(n, m, mode))
    throw ConfigError("sample size n=" + std::to_string(n) + " is too small for m=" +
                      std::to_string(m) + " with " + std::string(to_string(mode)) +
                      " split; minimum n is " + std::to_string(minimum_sample_size(m, mode)));

  IndexList order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    RngStream rng(seed, 0, 0, StreamPurpose::split);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  }

  const std::size_t n0 = anchor_size(n, mode);
  SplitPlan plan;
  plan.n = n;
  plan.m = m;
  plan.j0.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n0));
  std::sort(plan.j0.begin(), plan.j0.end());

  const std::size_t rest = n - n0;
  for (int k = 1; k <= m; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    std::vector<IndexList> level;
    level.reserve(kk);
    std::size_t offset = n0;
    for (std::size_t j = 0; j < kk; ++j) {
      const std::size_t size = rest / kk + (j < rest % kk ? 1 : 0);
      IndexList block(order.begin() + static_cast<std::ptrdiff_t>(offset),
                      order.begin() + static_cast<std::ptrdiff_t>(offset + size));
      std::sort(block.begin(), block.end());
      level.push_back(std::move(block));
      offset += size;
    }
    plan.parts.push_back(std::move(level));
  }
  return plan;
}

std::optional<SplitViolationReport> validate(const SplitPlan& plan) {
  if (plan.m < 1 || plan.parts.size() != static_cast<std::size_t>(plan.m))
    return SplitViolationReport{SplitViolation::wrong_level_count,
                                "expected " + std::to_string(plan.m) + " levels, found " +
                                    std::to_string(plan.parts.size())};

  auto check_block = [&](const IndexList& b, const std::string& name)
      -> std::optional<SplitViolationReport> {
    for (std::size_t i : b)
      if (i >= plan.n)
        return SplitViolationReport{SplitViolation::index_out_of_range,
                                    name + " contains index " + std::to_string(i)};
    if (!std::is_sorted(b.begin(), b.end()))
      return SplitViolationReport{SplitViolation::unsorted_block, name + " is not sorted"};
    return std::nullopt;
  };

  if (plan.j0.empty()) return SplitViolationReport{SplitViolation::empty_part, "j0 is empty"};
  if (auto r = check_block(plan.j0, "j0")) return r;

  for (int k = 1; k <= plan.m; ++k) {
    const auto& level = plan.parts[static_cast<std::size_t>(k - 1)];
    const std::string lname = "level " + std::to_string(k);
    if (level.size() != static_cast<std::size_t>(k))
      return SplitViolationReport{SplitViolation::wrong_part_count,
                                  lname + " has " + std::to_string(level.size()) + " parts"};
    std::vector<int> seen(plan.n, 0);
    for (std::size_t i : plan.j0) ++seen[i];
    std::size_t lo = plan.n, hi = 0;
    for (std::size_t j = 0; j < level.size(); ++j) {
      const std::string pname = lname + " part " + std::to_string(j + 1);
      if (level[j].empty())
        return SplitViolationReport{SplitViolation::empty_part, pname + " is empty"};
      if (auto r = check_block(level[j], pname)) return r;
      for (std::size_t i : level[j]) ++seen[i];
      lo = std::min(lo, level[j].size());
      hi = std::max(hi, level[j].size());
    }
    for (std::size_t i = 0; i < plan.n; ++i) {
      if (seen[i] > 1)
        return SplitViolationReport{SplitViolation::not_disjoint,
                                    lname + ": index " + std::to_string(i) +
                                        " appears in more than one block"};
      if (seen[i] == 0)
        return SplitViolationReport{SplitViolation::not_covering,
                                    lname + ": index " + std::to_string(i) + " is not covered"};
    }
    if (hi - lo > 1)
      return SplitViolationReport{SplitViolation::unbalanced,
                                  lname + " part sizes differ by " + std::to_string(hi - lo)};
  }
  return std::nullopt;
}

}  // namespace splitfun
