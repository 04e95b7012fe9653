#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace splitfun {

using IndexList = std::vector<std::size_t>;

/// Sample split: anchor block j0 and, for each order k = 1..m, a partition of
/// the complement of j0 into k blocks. parts[k - 1] holds the k blocks of
/// level k. Every level re-partitions the same complement.
struct SplitPlan {
  std::size_t n = 0;
  int m = 0;
  IndexList j0;
  std::vector<std::vector<IndexList>> parts;

  const std::vector<IndexList>& level(int k) const { return parts.at(k - 1); }
  friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

enum class SplitMode {
  /// n0 = ceil(n / 2)
  balanced,
  /// n0 = max(1, ceil(n / max(ln n, 2)))
  efficient,
};

std::string_view to_string(SplitMode mode);
SplitMode split_mode_from_string(std::string_view s);

/// Anchor size n0 for the given mode.
std::size_t anchor_size(std::size_t n, SplitMode mode);

/// Smallest n for which make_split(n, m, mode, ...) succeeds.
std::size_t minimum_sample_size(int m, SplitMode mode);

/// Builds the plan. The complement of j0 is taken in index order (or a seeded
/// uniform permutation when shuffle is set) and cut into k contiguous
/// near-equal blocks for each k, larger blocks first. Throws ConfigError when
/// n is too small for m.
SplitPlan make_split(std::size_t n, int m, SplitMode mode, std::uint64_t seed = 0,
                     bool shuffle = false);

enum class SplitViolation {
  wrong_level_count,
  wrong_part_count,
  index_out_of_range,
  unsorted_block,
  empty_part,
  not_disjoint,
  not_covering,
  unbalanced,
};

struct SplitViolationReport {
  SplitViolation kind;
  std::string detail;
};

/// First violated invariant, or nullopt when the plan is valid.
std::optional<SplitViolationReport> validate(const SplitPlan& plan);

}  // namespace splitfun
