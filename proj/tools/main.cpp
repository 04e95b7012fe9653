#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "splitfun/config.hpp"
#include "splitfun/csv.hpp"
#include "splitfun/diagnostics.hpp"
#include "splitfun/errors.hpp"
#include "splitfun/harness.hpp"
#include "splitfun/models.hpp"
#include "splitfun/rng.hpp"

namespace fs = std::filesystem;
using namespace splitfun;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct RunOptions {
  std::string seed;
  std::string out_dir;
  std::size_t workers = 0;
  bool quiet = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Command line flags win over the environment.
void apply_overrides(KeyValueConfig& kv, RunOptions& opts) {
  if (opts.seed.empty())
    if (const char* env = std::getenv("SPLITFUN_SEED")) opts.seed = env;
  if (opts.out_dir.empty())
    if (const char* env = std::getenv("SPLITFUN_OUT_DIR")) opts.out_dir = env;
  if (!opts.seed.empty()) kv.set("experiment.seed", opts.seed);
  if (opts.workers > 0) kv.set("experiment.workers", std::to_string(opts.workers));
}

fs::path output_path(const ExperimentConfig& cfg, const RunOptions& opts) {
  fs::path out(cfg.output);
  if (!opts.out_dir.empty()) out = fs::path(opts.out_dir) / out.filename();
  return out;
}

void write_text(const fs::path& path, const std::string& text, bool append) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, append ? std::ios::binary | std::ios::app : std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void run_one(const std::string& config_file, RunOptions opts) {
  KeyValueConfig kv = KeyValueConfig::parse(read_file(config_file));
  apply_overrides(kv, opts);
  const ExperimentConfig cfg = parse_experiment_config(kv);
  const auto rows = run_experiment(cfg);
  const fs::path out = output_path(cfg, opts);
  write_text(out, results_to_csv(rows), false);
  if (!opts.quiet) {
    std::cout << "wrote " << rows.size() << " rows to " << out.string() << '\n';
    std::cout << summarize(rows).to_text();
  }
  for (const auto& r : rows)
    if (r.failed)
      std::cerr << "warning: cell n=" << r.n << " " << to_string(r.estimator) << " lost "
                << r.failures << " of " << r.reps << " replications\n";
}

struct DiagOptions {
  std::string model;
  std::vector<std::string> sets;
  std::string what;
  std::vector<std::size_t> n_grid;
  std::size_t reps = 200;
  double p = 2.0;
  double u_bound = 1.0;
  std::size_t n_random = 64;
  std::string seed;
  std::string append;
};

KeyValueConfig diag_config(const DiagOptions& o) {
  KeyValueConfig kv;
  kv.set("model.kind", o.model);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set " + s + ": expected key=value");
    std::string key = s.substr(0, eq);
    if (key.find('.') == std::string::npos) key = "model." + key;
    kv.set(key, s.substr(eq + 1));
  }
  return kv;
}

std::string diag_line(const std::string& what, const std::string& key, double value) {
  return "diag," + what + "," + key + "," + csv::format_double(value) + "\n";
}

std::string run_diag(const DiagOptions& o) {
  KeyValueConfig kv = diag_config(o);
  const ModelTemplate mt = parse_model_template(kv);
  const ModelSpec model = mt.instantiate(mt.default_dimension());
  std::uint64_t seed = 0;
  if (!o.seed.empty()) {
    seed = static_cast<std::uint64_t>(csv::parse_int(o.seed));
  } else if (const char* env = std::getenv("SPLITFUN_SEED")) {
    seed = static_cast<std::uint64_t>(csv::parse_int(env));
  }
  std::string out;

  if (o.what == "erank") {
    if (model.tag() != std::string_view("covariance"))
      throw ConfigError("--what erank: needs a covariance model");
    out += diag_line("erank", "effective_rank", effective_rank(true_functional_target(model)));
  } else if (o.what == "ap_dp") {
    const auto dirs = DirectionSet::canonical_plus_random(model.parameter_space(), o.n_random, seed);
    const std::vector<std::size_t> grid =
        o.n_grid.empty() ? std::vector<std::size_t>{64, 256, 1024} : o.n_grid;
    const auto est = estimate_ap_dp(model, dirs, grid, o.reps, o.p, seed);
    out += diag_line("ap_dp", "a_hat_lower_estimate", est.a_hat);
    out += diag_line("ap_dp", "a_se", est.a_se);
    out += diag_line("ap_dp", "d_hat_lower_estimate", est.d_hat);
    out += diag_line("ap_dp", "d_se", est.d_se);
  } else if (o.what == "tail" || o.what == "wass") {
    if (!kv.has("functional.kind")) kv.set("functional.kind", "linear");
    const FunctionalTemplate ft = parse_functional_template(kv);
    const FunctionalSpec f = ft.instantiate(model);
    const std::size_t n = o.n_grid.empty() ? 256 : o.n_grid.front();
    const Point theta = true_functional_target(model);
    const double target = eval(f, theta);
    const double sf = sigma_f(model, f, theta);
    std::vector<double> stats(o.reps);
    for (std::size_t r = 0; r < o.reps; ++r) {
      RngStream rng(seed, 0, static_cast<std::uint32_t>(r));
      const Dataset data = sample(model, n, rng);
      stats[r] = eval(f, base_estimate(model, data)) - target;
    }
    if (o.what == "tail") {
      const auto rep = bernstein_tail_check(stats, n, sf, o.u_bound);
      for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
        out += diag_line("tail", "quantile_t=" + csv::format_double(rep.t_grid[i]),
                         rep.quantiles[i]);
      out += diag_line("tail", "constant", rep.constant);
    } else {
      const double scale = std::sqrt(static_cast<double>(n)) / sf;
      for (double& s : stats) s *= scale;
      out += diag_line("wass", "sigma_f", sf);
      out += diag_line("wass", "w2_normal", wasserstein_to_normal(stats, 0.0, 1.0, 2.0));
    }
  } else {
    throw ConfigError("--what: expected ap_dp, tail, wass or erank");
  }
  for (const auto& key : kv.unused_keys())
    std::cerr << "warning: ignored key " << key << '\n';
  return out;
}

template <typename F>
int guarded(F&& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-split Taylor estimators of smooth functionals"};
  app.require_subcommand(1);

  RunOptions run_opts;
  std::string config_file;
  auto* run = app.add_subcommand("run", "Run one experiment config and write its CSV");
  run->add_option("--config", config_file, "Experiment config file")->required();
  run->add_option("--seed", run_opts.seed, "Master seed (overrides SPLITFUN_SEED)");
  run->add_option("--out", run_opts.out_dir, "Output directory (overrides SPLITFUN_OUT_DIR)");
  run->add_option("--workers", run_opts.workers, "Worker threads");
  run->add_flag("--quiet", run_opts.quiet, "Do not print the summary");

  RunOptions sweep_opts;
  std::vector<std::string> sweep_files;
  auto* sweep = app.add_subcommand("sweep", "Run several configs in sequence");
  sweep->add_option("configs", sweep_files, "Experiment config files")->required();
  sweep->add_option("--seed", sweep_opts.seed, "Master seed for every config");
  sweep->add_option("--out", sweep_opts.out_dir, "Output directory");
  sweep->add_option("--workers", sweep_opts.workers, "Worker threads");
  sweep->add_flag("--quiet", sweep_opts.quiet, "Do not print summaries");

  DiagOptions diag_opts;
  auto* diag = app.add_subcommand("diag", "Model diagnostics");
  diag->add_option("--model", diag_opts.model, "Model kind")->required();
  diag->add_option("--set", diag_opts.sets, "key=value (model section unless dotted)");
  diag->add_option("--what", diag_opts.what, "ap_dp | tail | wass | erank")->required();
  diag->add_option("--n", diag_opts.n_grid, "Sample sizes");
  diag->add_option("--reps", diag_opts.reps, "Replications");
  diag->add_option("--p", diag_opts.p, "Moment order for ap_dp");
  diag->add_option("--u-bound", diag_opts.u_bound, "Bernstein range constant U");
  diag->add_option("--random-directions", diag_opts.n_random, "Random directions for ap_dp");
  diag->add_option("--seed", diag_opts.seed, "Seed");
  diag->add_option("--append", diag_opts.append, "Append results as comment lines to this CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return guarded([&] { run_one(config_file, run_opts); });

  if (*sweep) {
    int worst = kExitOk;
    for (const auto& file : sweep_files) {
      if (!sweep_opts.quiet) std::cout << "== " << file << '\n';
      worst = std::max(worst, guarded([&] { run_one(file, sweep_opts); }));
    }
    return worst;
  }

  return guarded([&] {
    const std::string text = run_diag(diag_opts);
    std::cout << text;
    if (!diag_opts.append.empty()) {
      std::string commented;
      std::istringstream lines(text);
      for (std::string line; std::getline(lines, line);) commented += "# " + line + "\n";
      write_text(diag_opts.append, commented, true);
    }
  });
}
