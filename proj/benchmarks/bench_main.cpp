#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "splitfun/estimator.hpp"
#include "splitfun/functionals.hpp"
#include "splitfun/linalg.hpp"
#include "splitfun/models.hpp"
#include "splitfun/splitter.hpp"

using namespace splitfun;

namespace {

Point random_point(const SpaceDescriptor& s, RngStream& rng) {
  std::vector<double> c(s.dim());
  for (auto& x : c) x = rng.normal();
  return Point(s, std::move(c));
}

BaseEstimates random_base(const SpaceDescriptor& s, int m, RngStream& rng) {
  BaseEstimates b{random_point(s, rng), {}};
  for (int k = 1; k <= m; ++k) {
    std::vector<Point> lvl;
    for (int j = 0; j < k; ++j) lvl.push_back(random_point(s, rng));
    b.levels.push_back(lvl);
  }
  return b;
}

void BM_TaylorSmoothSqrt(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const int m = static_cast<int>(state.range(1));
  const auto s = SpaceDescriptor::euclidean(d);
  RngStream rng(1, 0, 0);
  const auto b = random_base(s, m, rng);
  const auto f = FunctionalSpec::smooth_sqrt(s);
  for (auto _ : state) benchmark::DoNotOptimize(taylor_estimate(f, b).raw);
}
BENCHMARK(BM_TaylorSmoothSqrt)->Args({16, 2})->Args({256, 3})->Args({1024, 3})->Args({256, 6});

void BM_DerivEntropy(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  const auto fam = ExpFamilySpec::bernoulli_product(d);
  const auto f = FunctionalSpec::expfam_entropy(fam);
  RngStream rng(2, 0, 0);
  const Point t(fam.space(), std::vector<double>(d, 0.4));
  std::vector<Point> dirs;
  for (int i = 0; i < k; ++i) dirs.push_back(random_point(fam.space(), rng));
  for (auto _ : state) benchmark::DoNotOptimize(deriv_apply(f, k, t, dirs));
}
BENCHMARK(BM_DerivEntropy)->Args({10, 1})->Args({10, 3})->Args({200, 3});

void BM_SymEigen(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RngStream rng(3, 0, 0);
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a[i * n + j] = a[j * n + i] = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(linalg::sym_eigen(a, n).values.data());
}
BENCHMARK(BM_SymEigen)->Arg(4)->Arg(16)->Arg(64);

void BM_SampleRows(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = ModelSpec::gaussian_location(std::vector<double>(32, 0.0),
                                                  std::vector<double>(32, 1.0));
  std::uint32_t rep = 0;
  for (auto _ : state) {
    RngStream rng(4, 0, rep++);
    benchmark::DoNotOptimize(sample(model, n, rng).values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 32));
}
BENCHMARK(BM_SampleRows)->Arg(256)->Arg(4096);

void BM_SampleBlockMeans(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(std::ceil(std::pow(double(n), 0.75)));
  const auto model = ModelSpec::gaussian_location(std::vector<double>(d, 0.0),
                                                  std::vector<double>(d, 1.0));
  const auto atoms = decompose_atoms(make_split(n, 3, SplitMode::balanced));
  std::uint32_t rep = 0;
  for (auto _ : state) {
    RngStream rng(5, 0, rep++);
    benchmark::DoNotOptimize(sample_block_means(model, atoms.sizes, rng).size());
  }
}
BENCHMARK(BM_SampleBlockMeans)->Arg(1024)->Arg(8192);

}  // namespace
BENCHMARK_MAIN();
