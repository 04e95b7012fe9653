#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "splitfun/errors.hpp"
#include "splitfun/splitter.hpp"
#include "test_util.hpp"

using namespace splitfun;

namespace {
IndexList range(std::size_t a, std::size_t b) {
  IndexList r(b - a);
  std::iota(r.begin(), r.end(), a);
  return r;
}
}  // namespace

TEST_CASE("balanced split of n=10, m=2") {
  const auto plan = make_split(10, 2, SplitMode::balanced);
  CHECK(plan.j0 == range(0, 5));
  CHECK(plan.level(1) == std::vector<IndexList>{range(5, 10)});
  CHECK(plan.level(2) == std::vector<IndexList>{{5, 6, 7}, {8, 9}});
  CHECK_FALSE(validate(plan).has_value());
}

TEST_CASE("too small n names the minimum") {
  try {
    make_split(3, 2, SplitMode::balanced);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(std::to_string(minimum_sample_size(2, SplitMode::balanced))) !=
          std::string::npos);
  }
  CHECK_THROWS_AS(make_split(1, 1, SplitMode::efficient), ConfigError);
  CHECK_THROWS_AS(make_split(10, 0, SplitMode::balanced), ConfigError);
}

TEST_CASE("efficient anchor size") {
  CHECK(anchor_size(100, SplitMode::efficient) == 22);
  CHECK(make_split(100, 2, SplitMode::efficient).j0.size() == 22);
  CHECK(anchor_size(4096, SplitMode::efficient) == 493);
  CHECK(anchor_size(3, SplitMode::efficient) == 2);
  CHECK(anchor_size(7, SplitMode::balanced) == 4);
}

TEST_CASE("minimum_sample_size is tight") {
  for (auto mode : {SplitMode::balanced, SplitMode::efficient})
    for (int m = 1; m <= 10; ++m) {
      const auto n = minimum_sample_size(m, mode);
      CHECK_NOTHROW(make_split(n, m, mode));
      if (n > 1) CHECK_THROWS_AS(make_split(n - 1, m, mode), ConfigError);
    }
}

TEST_CASE("validate reports violations") {
  auto plan = make_split(10, 2, SplitMode::balanced);
  auto overlap = plan;
  overlap.parts[0][0].insert(overlap.parts[0][0].begin(), 4);
  const auto r1 = validate(overlap);
  REQUIRE(r1.has_value());
  CHECK(r1->kind == SplitViolation::not_disjoint);

  auto empty = plan;
  empty.parts[1][1].clear();
  const auto r2 = validate(empty);
  REQUIRE(r2.has_value());
  CHECK(r2->kind == SplitViolation::empty_part);

  auto missing = plan;
  missing.parts[0][0].pop_back();
  const auto r3 = validate(missing);
  REQUIRE(r3.has_value());
  CHECK(r3->kind == SplitViolation::not_covering);

  auto levels = plan;
  levels.parts.pop_back();
  REQUIRE(validate(levels).has_value());
  CHECK(validate(levels)->kind == SplitViolation::wrong_level_count);
}

TEST_CASE("plan invariants over a range of sizes") {
  for (auto mode : {SplitMode::balanced, SplitMode::efficient})
    for (int m = 1; m <= 5; ++m)
      for (std::size_t n = minimum_sample_size(m, mode); n < 300; n += 7)
        for (bool shuffle : {false, true}) {
          const auto plan = make_split(n, m, mode, n * 31 + m, shuffle);
          CHECK_FALSE(validate(plan).has_value());
          CHECK(plan.j0.size() == anchor_size(n, mode));
          for (int k = 1; k <= m; ++k) {
            std::size_t total = 0, lo = n, hi = 0;
            for (const auto& part : plan.level(k)) {
              total += part.size();
              lo = std::min(lo, part.size());
              hi = std::max(hi, part.size());
            }
            CHECK(total == n - plan.j0.size());
            CHECK(hi - lo <= 1);
            CHECK(plan.level(k).front().size() == hi);
          }
        }
}

TEST_CASE("splits are deterministic; shuffle permutes the complement") {
  CHECK(make_split(200, 3, SplitMode::efficient, 5, true) ==
        make_split(200, 3, SplitMode::efficient, 5, true));
  const auto a = make_split(200, 3, SplitMode::balanced, 5, true);
  const auto b = make_split(200, 3, SplitMode::balanced, 6, true);
  CHECK(a.j0 != b.j0);
  CHECK(a.j0 != make_split(200, 3, SplitMode::balanced, 5, false).j0);
}

TEST_CASE("mode names round-trip") {
  for (auto mode : {SplitMode::balanced, SplitMode::efficient})
    CHECK(split_mode_from_string(to_string(mode)) == mode);
  CHECK_THROWS_AS(split_mode_from_string("fast"), ConfigError);
}
