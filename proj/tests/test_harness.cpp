#include <cmath>
#include <string>

#include "splitfun/config.hpp"
#include "splitfun/errors.hpp"
#include "splitfun/harness.hpp"
#include "test_util.hpp"

using namespace splitfun;

namespace {

ExperimentConfig small_config() {
  return parse_experiment_config(std::string(R"(
model:
  kind: gaussian_location
  d: 3
  mean_norm: 1

functional:
  kind: smooth_sqrt

estimator:
  m: 2
  trunc: fixed
  trunc_level: 1.5

experiment:
  n_grid: [16, 32, 64]
  reps: 200
  p_list: [2]
  kinds: [truncated, plugin]
  seed: 77
)"));
}

ResultRow row(std::size_t n, EstimatorKind k, double err) {
  ResultRow r;
  r.n = n;
  r.estimator = k;
  r.lp_error = err;
  r.reps = 10;
  return r;
}

}  // namespace

TEST_CASE("row count follows the grid, kinds and p values") {
  const auto cfg = small_config();
  const auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].n == 16);
  CHECK(rows[0].estimator == EstimatorKind::truncated);
  CHECK(rows[1].estimator == EstimatorKind::plugin);
  CHECK(rows[5].n == 64);
  for (const auto& r : rows) {
    CHECK(r.lp_error >= 0.0);
    CHECK(r.clipped_fraction >= 0.0);
    CHECK(r.clipped_fraction <= 1.0);
    CHECK(r.reps == 200);
    CHECK(r.failures == 0);
    CHECK_FALSE(r.failed);
    CHECK(r.w2_normal.has_value());
    CHECK(r.wall_time == 0.0);
  }
}

TEST_CASE("runs are byte-identical across repeats and worker counts") {
  auto cfg = small_config();
  cfg.sampling = SamplingMode::rows;
  const std::string a = results_to_csv(run_experiment(cfg));
  CHECK(a == results_to_csv(run_experiment(cfg)));
  cfg.workers = 4;
  CHECK(a == results_to_csv(run_experiment(cfg)));
  cfg.master_seed = 78;
  CHECK(a != results_to_csv(run_experiment(cfg)));
}

TEST_CASE("csv round trip") {
  auto cfg = small_config();
  cfg.p_list = {1, 2, 3.5};
  cfg.kinds = {EstimatorKind::taylor, EstimatorKind::truncated, EstimatorKind::plugin};
  const auto rows = run_experiment(cfg);
  const std::string text = results_to_csv(rows);
  CHECK(text.rfind("# splitfun-csv v1\n", 0) == 0);
  CHECK(parse_results_csv(text) == rows);

  std::vector<ResultRow> odd{row(5, EstimatorKind::plugin, std::nan(""))};
  odd[0].bias = -0.0;
  odd[0].sd = 1e-300;
  odd[0].failed = true;
  const auto back = parse_results_csv(results_to_csv(odd));
  CHECK(std::isnan(back[0].lp_error));
  CHECK(std::signbit(back[0].bias));
  CHECK(back[0].sd == 1e-300);
  CHECK(back[0].failed);
  CHECK_FALSE(back[0].w2_normal.has_value());

  CHECK_THROWS_AS(parse_results_csv("n,d\n1,2\n"), ContractError);
  CHECK_THROWS_AS(parse_results_csv(text.substr(0, text.size() - 5) + ",x\n"), ContractError);
}

TEST_CASE("validation happens before sampling") {
  auto cfg = small_config();
  cfg.n_grid = {3};
  cfg.m = 3;
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("summarize") {
  std::vector<ResultRow> rows;
  for (std::size_t n : {100u, 400u, 1600u}) {
    rows.push_back(row(n, EstimatorKind::taylor, 1 / std::sqrt(double(n))));
    rows.push_back(row(n, EstimatorKind::plugin, 1 / std::sqrt(double(n))));
  }
  const auto s = summarize(rows);
  REQUIRE(s.slopes.size() == 2);
  CHECK(std::abs(*s.slopes[0].slope + 0.5) <= 1e-12);
  CHECK(*s.slopes[0].slope == *s.slopes[1].slope);
  CHECK(s.bias_ratios.size() == 3);
  CHECK(s.to_text().find("-0.5000") != std::string::npos);

  const auto single = summarize({row(100, EstimatorKind::taylor, 0.1)});
  CHECK_FALSE(single.slopes[0].slope.has_value());
  CHECK_FALSE(single.notices.empty());
}

TEST_CASE("solver failures are counted per cell") {
  // Bernoulli entropy at tiny n: some blocks are all zeros or all ones.
  auto cfg = parse_experiment_config(std::string(R"(
model:
  kind: expfam
  family: bernoulli_product
  d: 1
  theta_value: 2.5
functional:
  kind: expfam_entropy
experiment:
  n_grid: [8]
  reps: 200
  kinds: [taylor, plugin]
)"));
  const auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].failures > 0);
  CHECK(rows[0].failed);
  CHECK(rows[0].failures < 200);
}

TEST_CASE("sufficient sampling is exact for linear functionals") {
  // With sufficient statistics the Taylor estimate of a linear functional is
  // the first-level block mean, whose law is N(<theta, u>, |u|^2 / n1).
  auto cfg = parse_experiment_config(std::string(R"(
model:
  kind: gaussian_location
  d: 2
  mean: [1, 2]
functional:
  kind: linear
  u: [0.6, 0.8]
estimator:
  m: 1
experiment:
  n_grid: [40]
  reps: 20000
  kinds: [taylor]
  sampling: sufficient
)"));
  const auto rows = run_experiment(cfg);
  const double sd_expected = 1 / std::sqrt(20.0);
  CHECK(std::abs(rows[0].sd - sd_expected) <= 4 * sd_expected / std::sqrt(2 * 20000.0));
  CHECK(std::abs(rows[0].bias) <= 4 * sd_expected / std::sqrt(20000.0));
}
