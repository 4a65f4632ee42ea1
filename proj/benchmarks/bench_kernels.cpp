#include <random>

#include <benchmark/benchmark.h>

#include "adiabatica/commutator.hpp"
#include "adiabatica/evolve.hpp"
#include "adiabatica/registry.hpp"
#include "adiabatica/spectral.hpp"

using namespace adiabatica;

namespace {

CMatrix random_matrix(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(2.0 * n));
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return a;
}

void BM_expm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const CMatrix a = 4.0 * random_matrix(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(expm(a));
  state.SetComplexityN(n);
}
BENCHMARK(BM_expm)->RangeMultiplier(2)->Range(4, 128)->Complexity(benchmark::oNCubed);

void BM_riesz(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  CMatrix a = random_matrix(n, 2);
  a(0, 0) += 3.0;  // isolate one eigenvalue
  Eigen::ComplexEigenSolver<CMatrix> es(a);
  Eigen::Index k = 0;
  es.eigenvalues().real().maxCoeff(&k);
  const Contour c = contour_around(a, es.eigenvalues()(k), 1);
  for (auto _ : state) benchmark::DoNotOptimize(riesz_projection(a, c));
}
BENCHMARK(BM_riesz)->RangeMultiplier(2)->Range(4, 64);

void BM_weak_projection(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  CMatrix a = random_matrix(n, 3);
  a(0, 0) += 3.0;
  Eigen::ComplexEigenSolver<CMatrix> es(a);
  Eigen::Index k = 0;
  es.eigenvalues().real().maxCoeff(&k);
  const cplx lam = es.eigenvalues()(k);
  for (auto _ : state) benchmark::DoNotOptimize(weakly_associated_projection(a, lam));
}
BENCHMARK(BM_weak_projection)->RangeMultiplier(2)->Range(4, 64);

void BM_propagate_gap_uniform(benchmark::State& state) {
  const Example ex = example("gap_uniform", {{"d", static_cast<double>(state.range(0))}});
  const double eps = 1.0 / static_cast<double>(state.range(1));
  const auto grid = uniform_grid(0.0, 1.0, 21);
  for (auto _ : state) benchmark::DoNotOptimize(propagate(ex.A, eps, grid));
}
BENCHMARK(BM_propagate_gap_uniform)->Args({6, 10})->Args({6, 100})->Args({6, 1000})->Args({24, 100})
    ->Unit(benchmark::kMillisecond);

void BM_propagate_intertwined(benchmark::State& state) {
  const Example ex = example("gap_crossing");
  const auto grid = uniform_grid(0.0, 1.0, 21);
  for (auto _ : state) benchmark::DoNotOptimize(propagate_intertwined(ex.A, ex.P, 1e-2, grid));
}
BENCHMARK(BM_propagate_intertwined)->Unit(benchmark::kMillisecond);

void BM_gap_contour_sample(benchmark::State& state) {
  const Example ex = example("gap_uniform");
  const auto sol = solve_gap_contour(ex.A, ex.P, ex.curve);
  for (auto _ : state) benchmark::DoNotOptimize(sol.at(0.3));
}
BENCHMARK(BM_gap_contour_sample);

void BM_nogap_sample(benchmark::State& state) {
  const Example ex = example("nogap_dense_rationals", {{"D", static_cast<double>(state.range(0))}});
  const auto sol = solve_nogap(ex.A, ex.P, ex.curve, 8, {0.3, 0.2});
  for (auto _ : state) benchmark::DoNotOptimize(sol.at(0.3));
}
BENCHMARK(BM_nogap_sample)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
