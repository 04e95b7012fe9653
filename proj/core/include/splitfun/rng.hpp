#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>

namespace splitfun {

/// Philox-4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

/// Purpose tags keep streams derived for different jobs from colliding even
/// when (cell, rep) coincide.
enum class StreamPurpose : std::uint32_t { replication = 0, split = 1, directions = 2, misc = 3 };

/// Counter-based random stream keyed by (seed, purpose) and addressed by
/// (cell, rep). Two streams with different addresses never share a Philox
/// counter, so replications can run in any order on any number of threads.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint32_t cell, std::uint32_t rep,
            StreamPurpose purpose = StreamPurpose::replication);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound), bound >= 1, by rejection.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via the Box-Muller transform.
  double normal();
  /// +1 or -1 with probability 1/2.
  double rademacher();
  /// Uniform on [-sqrt(3), sqrt(3)] (unit variance).
  double uniform_symmetric();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  std::optional<double> spare_normal_;
};

}  // namespace splitfun
