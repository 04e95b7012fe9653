#include <cmath>
#include <string>

#include "splitfun/config.hpp"
#include "splitfun/errors.hpp"
#include "test_util.hpp"

using namespace splitfun;

namespace {

const char* kBase = R"(
# comment line
model:
  kind: gaussian_location
  d: 4
  mean_norm: 2.0   # trailing comment

functional:
  kind: smooth_sqrt

estimator:
  m: 3
  trunc: fixed
  trunc_level: 10

split:
  mode: efficient
  shuffle: true

experiment:
  n_grid: [64, 128, 256]
  d_rule: power(0.5)
  reps: 10
  p_list: [1, 2]
  kinds: [taylor, plugin]
  seed: 123
  workers: 2
  sampling: rows

output:
  path: "out/results.csv"
)";

std::string message_of(const std::string& text) {
  try {
    parse_experiment_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse a full config") {
  const auto cfg = parse_experiment_config(std::string(kBase));
  CHECK(cfg.model.kind == "gaussian_location");
  CHECK(cfg.model.d == 4u);
  CHECK(cfg.functional.kind == "smooth_sqrt");
  CHECK(cfg.m == 3);
  CHECK(std::get<trunc::Fixed>(cfg.trunc_rule).level == 10.0);
  CHECK(cfg.split_mode == SplitMode::efficient);
  CHECK(cfg.split_shuffle);
  CHECK(cfg.n_grid == std::vector<std::size_t>{64, 128, 256});
  CHECK(cfg.d_rule.kind == DimensionRule::Kind::power);
  CHECK(cfg.d_rule.dimension(256, 4) == 16);
  CHECK(cfg.d_rule.dimension(100, 4) == 10);
  CHECK(cfg.reps == 10);
  CHECK(cfg.p_list == std::vector<double>{1, 2});
  CHECK(cfg.kinds == std::vector<EstimatorKind>{EstimatorKind::taylor, EstimatorKind::plugin});
  CHECK(cfg.master_seed == 123);
  CHECK(cfg.workers == 2);
  CHECK(cfg.sampling == SamplingMode::rows);
  CHECK(cfg.output == "out/results.csv");

  const ModelSpec m = cfg.model.instantiate(5);
  CHECK(m.dimension() == 5);
  CHECK(norm(true_functional_target(m)) == doctest::Approx(2.0));
}

TEST_CASE("errors name the offending key") {
  auto replace = [&](const std::string& from, const std::string& to) {
    std::string t = kBase;
    t.replace(t.find(from), from.size(), to);
    return message_of(t);
  };
  CHECK(replace("experiment:\n", "experiment:\n  bogus: 1\n").find("experiment.bogus") !=
        std::string::npos);
  CHECK(replace("reps: 10", "reps: 0").find("experiment.reps") != std::string::npos);
  CHECK(replace("power(0.5)", "power(1.5)").find("experiment.d_rule") != std::string::npos);
  CHECK(replace("m: 3", "m: 11").find("estimator.m") != std::string::npos);
  CHECK(replace("mode: efficient", "mode: fast").find("split.mode") != std::string::npos);
  CHECK(replace("[64, 128, 256]", "[3]").find("minimum n") != std::string::npos);
  CHECK(replace("[64, 128, 256]", "[128, 64]").find("experiment.n_grid") != std::string::npos);
  CHECK(replace("kind: smooth_sqrt", "kind: wobble").find("functional.kind") !=
        std::string::npos);
  CHECK(replace("kinds: [taylor, plugin]", "kinds: [magic]").find("experiment.kinds") !=
        std::string::npos);
  CHECK(replace("trunc_level: 10", "trunc_level: ten").find("estimator.trunc_level") !=
        std::string::npos);
  CHECK(replace("reps: 10", "reps: [10]").find("experiment.reps") != std::string::npos);
  CHECK(replace("p_list: [1, 2]", "p_list: 2").find("experiment.p_list") != std::string::npos);
}

TEST_CASE("dimension may come from the d rule alone") {
  std::string text = kBase;
  text.erase(text.find("  d: 4\n"), 7);
  CHECK_FALSE(parse_experiment_config(text).model.d.has_value());
  text.erase(text.find("  d_rule: power(0.5)\n"), 21);
  CHECK(message_of(text).find("model.d") != std::string::npos);
}

TEST_CASE("n=3, m=3 fails validation") {
  const char* text = R"(
model:
  kind: gaussian_location
  d: 1
functional:
  kind: linear
estimator:
  m: 3
experiment:
  n_grid: [3]
)";
  CHECK_THROWS_AS(parse_experiment_config(std::string(text)), ConfigError);
}

TEST_CASE("key-value syntax errors") {
  CHECK_THROWS_AS(KeyValueConfig::parse("model:\n  u: [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("- a\n- b\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("model:\n  kind: a\n  kind: b\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("model:\n  kind:\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("model:\n  inner:\n    x: 1\n"), ConfigError);
  auto kv = KeyValueConfig::parse("a:\n  x: 1\n  y: [1, 2.5]\n  z: true\n  s: \"q # r\"\n");
  CHECK(kv.get_int("a.x") == 1);
  CHECK(kv.get_double_list("a.y") == std::vector<double>{1, 2.5});
  CHECK(kv.get_bool("a.z", false));
  CHECK(kv.get_string("a.s") == "q # r");
  CHECK(kv.unused_keys().empty());
  kv.set("a.w", "4");
  kv.set("a.v", "[1, 2]");
  CHECK(kv.unused_keys() == std::vector<std::string>{"a.v", "a.w"});
  CHECK(kv.get_double_list("a.v") == std::vector<double>{1, 2});
  CHECK_THROWS_AS(kv.get_int("a.missing"), ConfigError);
}

TEST_CASE("model templates") {
  auto model_of = [](const std::string& body) {
    return parse_model_template(KeyValueConfig::parse("model:\n" + body));
  };
  const auto prod = model_of("  kind: product\n  components: [gaussian:1:2, bernoulli:0.3]\n");
  CHECK(prod.default_dimension() == 2);
  CHECK(prod.instantiate(2).tag() == std::string_view("product"));
  CHECK_THROWS_AS(model_of("  kind: product\n  components: [bernoulli:1.2]\n"), ConfigError);

  const auto cov =
      model_of("  kind: covariance\n  d: 4\n  sigma_decay: 0.5\n  xi_law: rademacher\n");
  const Point sigma = true_functional_target(cov.instantiate(4));
  const auto full = to_full_matrix(sigma.space(), sigma.coords());
  CHECK(full[15] == doctest::Approx(0.125));

  const auto ef =
      model_of("  kind: expfam\n  family: bernoulli_product\n  d: 3\n  theta_value: 1\n");
  CHECK(true_functional_target(ef.instantiate(3))[2] ==
        doctest::Approx(std::exp(1.0) / (1 + std::exp(1.0))));
  CHECK_THROWS_AS(model_of("  kind: unicorn\n").instantiate(2), ConfigError);
}

TEST_CASE("functional templates") {
  const auto model = ModelSpec::gaussian_location({0, 0, 0, 0}, {1, 1, 1, 1});
  auto func_of = [&](const std::string& body) {
    return parse_functional_template(KeyValueConfig::parse("functional:\n" + body))
        .instantiate(model);
  };
  const auto lin = func_of("  kind: linear\n");
  CHECK(eval(lin, Point(model.parameter_space(), {1, 1, 1, 1})) == doctest::Approx(2.0));
  CHECK(func_of("  kind: bump_pairing\n  sup_norm: 1\n").declared_sup_norm() == 1.0);
  CHECK_THROWS_AS(func_of("  kind: linear\n  u: [1, 2]\n"), ConfigError);
  CHECK_THROWS_AS(func_of("  kind: expfam_entropy\n"), ConfigError);
}

TEST_CASE("estimator kind names round-trip") {
  for (auto k : {EstimatorKind::taylor, EstimatorKind::truncated, EstimatorKind::plugin})
    CHECK(estimator_kind_from_string(to_string(k)) == k);
}
