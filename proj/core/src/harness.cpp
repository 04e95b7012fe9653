#include "splitfun/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "splitfun/csv.hpp"
#include "splitfun/diagnostics.hpp"
#include "splitfun/errors.hpp"
#include "splitfun/estimator.hpp"

namespace splitfun {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct Cell {
  std::size_t n;
  std::size_t d;
  ModelSpec model;
  FunctionalSpec functional;
  SplitPlan plan;
  std::optional<AtomDecomposition> atoms;
  double target;
  std::optional<double> sigma_f;
  std::optional<double> trunc_level;
};

struct RepOutcome {
  bool ok = false;
  double taylor = 0.0;
  double truncated = 0.0;
  bool clipped = false;
  double plugin = 0.0;
};

bool wants(const ExperimentConfig& cfg, EstimatorKind k) {
  return std::find(cfg.kinds.begin(), cfg.kinds.end(), k) != cfg.kinds.end();
}

// Builds every cell up front so configuration problems surface before any
// sampling starts.
std::vector<Cell> build_cells(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<Cell> cells;
  const std::size_t default_d = cfg.d_rule.kind == DimensionRule::Kind::model_default
                                    ? cfg.model.default_dimension()
                                    : 0;
  for (std::size_t c = 0; c < cfg.n_grid.size(); ++c) {
    const std::size_t n = cfg.n_grid[c];
    const std::size_t d = cfg.d_rule.dimension(n, default_d);
    ModelSpec model = cfg.model.instantiate(d);
    FunctionalSpec f = cfg.functional.instantiate(model);

    const bool exact = has_exact_block_sampler(model);
    if (cfg.sampling == SamplingMode::sufficient && !exact)
      throw ConfigError("experiment.sampling: model " + std::string(model.tag()) +
                        " has no exact block sampler");
    const bool sufficient = cfg.sampling == SamplingMode::sufficient ||
                            (cfg.sampling == SamplingMode::automatic && exact);

    SplitPlan plan = make_split(n, cfg.m, cfg.split_mode, splitmix64(cfg.master_seed ^ c),
                                cfg.split_shuffle);
    std::optional<AtomDecomposition> atoms;
    if (sufficient) atoms = decompose_atoms(plan);

    const Point theta = true_functional_target(model);
    const double target = eval(f, theta);
    std::optional<double> sf;
    try {
      const double s = sigma_f(model, f, theta);
      if (s > 0.0 && std::isfinite(s)) sf = s;
    } catch (const UnsupportedError&) {
    } catch (const UnsupportedOrderError&) {
    }
    const auto level = wants(cfg, EstimatorKind::truncated)
                           ? resolve_trunc_level(cfg.trunc_rule, f)
                           : std::nullopt;
    cells.push_back(Cell{n, d, std::move(model), std::move(f), std::move(plan), std::move(atoms),
                         target, sf, level});
  }
  return cells;
}

RepOutcome run_replication(const ExperimentConfig& cfg, const Cell& cell, std::uint32_t cell_id,
                           std::uint32_t rep) {
  RngStream rng(cfg.master_seed, cell_id, rep);
  std::optional<BaseEstimates> base;
  std::optional<Point> pooled;
  const bool need_taylor = wants(cfg, EstimatorKind::taylor) || wants(cfg, EstimatorKind::truncated);
  const bool need_plugin = wants(cfg, EstimatorKind::plugin);

  if (cell.atoms) {
    const auto means = sample_block_means(cell.model, cell.atoms->sizes, rng);
    if (need_taylor) base = base_estimates_from_atoms(*cell.atoms, means);
    if (need_plugin) pooled = pooled_mean(*cell.atoms, means);
  } else {
    const Dataset data = sample(cell.model, cell.n, rng);
    if (need_taylor) base = base_estimates_from_sample(cell.model, data, cell.plan);
    if (need_plugin) pooled = base_estimate(cell.model, data);
  }

  RepOutcome out;
  if (base) {
    auto e = taylor_estimate(cell.functional, *base, TaylorOptions{cfg.allow_fd_fallback});
    apply_truncation(e, cell.trunc_level);
    out.taylor = e.raw;
    out.truncated = e.value;
    out.clipped = e.clipped;
  }
  if (pooled) out.plugin = plug_in(cell.functional, *pooled);
  out.ok = std::isfinite(out.taylor) && std::isfinite(out.plugin);
  return out;
}

std::vector<RepOutcome> run_cell(const ExperimentConfig& cfg, const Cell& cell,
                                 std::uint32_t cell_id) {
  std::vector<RepOutcome> outcomes(cfg.reps);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!abort.load(std::memory_order_relaxed)) {
      const std::size_t r = next.fetch_add(1);
      if (r >= cfg.reps) return;
      try {
        outcomes[r] = run_replication(cfg, cell, cell_id, static_cast<std::uint32_t>(r));
      } catch (const SolverError&) {
        outcomes[r].ok = false;
      } catch (const DomainError&) {
        outcomes[r].ok = false;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        abort = true;
      }
    }
  };

  const std::size_t workers = std::min(cfg.workers, cfg.reps);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return outcomes;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  const std::vector<Cell> cells = build_cells(cfg);
  std::vector<ResultRow> rows;

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    const auto start = std::chrono::steady_clock::now();
    const auto outcomes = run_cell(cfg, cell, static_cast<std::uint32_t>(c));
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::size_t failures = 0;
    for (const auto& o : outcomes) failures += o.ok ? 0 : 1;

    for (EstimatorKind kind : cfg.kinds) {
      std::vector<double> values;
      std::size_t clipped = 0;
      for (const auto& o : outcomes) {
        if (!o.ok) continue;
        switch (kind) {
          case EstimatorKind::taylor:
            values.push_back(o.taylor);
            break;
          case EstimatorKind::truncated:
            values.push_back(o.truncated);
            clipped += o.clipped ? 1 : 0;
            break;
          case EstimatorKind::plugin:
            values.push_back(o.plugin);
            break;
        }
      }
      std::vector<double> errors(values.size());
      for (std::size_t i = 0; i < values.size(); ++i) errors[i] = values[i] - cell.target;

      std::optional<double> w2;
      if (cell.sigma_f && !errors.empty()) {
        const double scale = std::sqrt(static_cast<double>(cell.n)) / *cell.sigma_f;
        std::vector<double> z(errors.size());
        for (std::size_t i = 0; i < errors.size(); ++i) z[i] = scale * errors[i];
        w2 = wasserstein_to_normal(z, 0.0, 1.0, 2.0);
      }

      for (double p : cfg.p_list) {
        ResultRow row;
        row.n = cell.n;
        row.d = cell.d;
        row.estimator = kind;
        row.p = p;
        const double nan = std::nan("");
        row.lp_error = errors.empty() ? nan : empirical_Lp(errors, p);
        row.bias = errors.empty() ? nan : mean(errors);
        row.sd = sample_sd(values);
        row.w2_normal = w2;
        row.clipped_fraction =
            values.empty() ? 0.0 : static_cast<double>(clipped) / static_cast<double>(values.size());
        row.reps = cfg.reps;
        row.failures = failures;
        row.failed = static_cast<double>(failures) > 0.01 * static_cast<double>(cfg.reps);
        row.wall_time = cfg.record_wall_time ? elapsed : 0.0;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

namespace {

constexpr const char* kColumns =
    "n,d,estimator,p,lp_error,bias,sd,w2_normal,clipped_fraction,reps,failures,status,wall_time";

}  // namespace

std::string results_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << kCsvVersionLine << '\n' << kColumns << '\n';
  for (const auto& r : rows) {
    os << r.n << ',' << r.d << ',' << to_string(r.estimator) << ',' << csv::format_double(r.p)
       << ',' << csv::format_double(r.lp_error) << ',' << csv::format_double(r.bias) << ','
       << csv::format_double(r.sd) << ',' << (r.w2_normal ? csv::format_double(*r.w2_normal) : "")
       << ',' << csv::format_double(r.clipped_fraction) << ',' << r.reps << ',' << r.failures
       << ',' << (r.failed ? "failed" : "ok") << ',' << csv::format_double(r.wall_time) << '\n';
  }
  return os.str();
}

std::vector<ResultRow> parse_results_csv(std::string_view text) {
  const auto lines = csv::split_lines(text);
  if (lines.size() < 2 || lines[0] != kCsvVersionLine)
    throw ContractError("results csv: missing '" + std::string(kCsvVersionLine) + "' header");
  if (lines[1] != kColumns) throw ContractError("results csv: unexpected column header");
  std::vector<ResultRow> rows;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    const auto f = csv::split_fields(lines[i]);
    if (f.size() != 13)
      throw ContractError("results csv: line " + std::to_string(i + 1) + " has " +
                          std::to_string(f.size()) + " fields");
    ResultRow r;
    r.n = static_cast<std::size_t>(csv::parse_int(f[0]));
    r.d = static_cast<std::size_t>(csv::parse_int(f[1]));
    try {
      r.estimator = estimator_kind_from_string(f[2]);
    } catch (const ConfigError& e) {
      throw ContractError(e.what());
    }
    r.p = csv::parse_double(f[3]);
    r.lp_error = csv::parse_double(f[4]);
    r.bias = csv::parse_double(f[5]);
    r.sd = csv::parse_double(f[6]);
    if (!f[7].empty()) r.w2_normal = csv::parse_double(f[7]);
    r.clipped_fraction = csv::parse_double(f[8]);
    r.reps = static_cast<std::size_t>(csv::parse_int(f[9]));
    r.failures = static_cast<std::size_t>(csv::parse_int(f[10]));
    if (f[11] != "ok" && f[11] != "failed")
      throw ContractError("results csv: status must be ok or failed");
    r.failed = f[11] == "failed";
    r.wall_time = csv::parse_double(f[12]);
    rows.push_back(r);
  }
  return rows;
}

Summary summarize(const std::vector<ResultRow>& rows) {
  Summary s;
  std::map<std::pair<int, double>, std::map<std::size_t, double>> curves;
  std::vector<std::pair<int, double>> order;
  for (const auto& r : rows) {
    const auto key = std::pair{static_cast<int>(r.estimator), r.p};
    if (!curves.count(key)) order.push_back(key);
    curves[key][r.n] = r.lp_error;
  }
  for (const auto& key : order) {
    const auto& curve = curves[key];
    SlopeEntry entry{static_cast<EstimatorKind>(key.first), key.second, std::nullopt};
    std::vector<double> ns, errs;
    for (const auto& [n, e] : curve)
      if (e > 0.0 && std::isfinite(e)) {
        ns.push_back(static_cast<double>(n));
        errs.push_back(e);
      }
    if (ns.size() >= 3) {
      entry.slope = rate_slope(RateCurve(ns, errs));
    } else {
      s.notices.push_back(std::string(to_string(entry.estimator)) + " p=" +
                          csv::format_double(entry.p) + ": fewer than 3 n values, no slope");
    }
    s.slopes.push_back(entry);
  }

  std::map<std::size_t, std::optional<double>> plugin_bias, taylor_bias;
  for (const auto& r : rows) {
    if (r.estimator == EstimatorKind::plugin && !plugin_bias[r.n]) plugin_bias[r.n] = r.bias;
    if (r.estimator == EstimatorKind::taylor && !taylor_bias[r.n]) taylor_bias[r.n] = r.bias;
  }
  for (const auto& [n, pb] : plugin_bias) {
    const auto it = taylor_bias.find(n);
    if (pb && it != taylor_bias.end() && it->second)
      s.bias_ratios.push_back({n, *pb, *it->second});
  }
  return s;
}

std::string Summary::to_text() const {
  std::ostringstream os;
  os << "rate slopes (log lp_error vs log n)\n";
  for (const auto& e : slopes) {
    os << "  " << to_string(e.estimator) << " p=" << csv::format_double(e.p) << ": ";
    if (e.slope) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", *e.slope);
      os << buf << '\n';
    } else {
      os << "n/a\n";
    }
  }
  if (!bias_ratios.empty()) {
    os << "bias: plugin vs taylor\n";
    for (const auto& b : bias_ratios) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "  n=%zu plugin=%.6g taylor=%.6g ratio=%.4g\n", b.n,
                    b.plugin_bias, b.taylor_bias,
                    b.taylor_bias != 0.0 ? b.plugin_bias / b.taylor_bias : std::nan(""));
      os << buf;
    }
  }
  for (const auto& note : notices) os << "note: " << note << '\n';
  return os.str();
}

}  // namespace splitfun
