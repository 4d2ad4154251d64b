#include <benchmark/benchmark.h>

#include "appstress/rng.hpp"
#include "appstress/svm.hpp"

namespace {

using namespace appstress;

// Two overlapping Gaussian classes in 11 dimensions, the feature width.
void make_problem(std::size_t n, std::vector<std::vector<double>>& x, std::vector<int>& y) {
  Rng rng(7);
  x.clear();
  y.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 ? 1 : -1;
    std::vector<double> row(11);
    for (auto& v : row) v = rng.normal(0.6 * label, 1.0);
    x.push_back(std::move(row));
    y.push_back(label);
  }
}

void smo(benchmark::State& state, KernelSpec kernel) {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  make_problem(static_cast<std::size_t>(state.range(0)), x, y);
  SvmParams params;
  params.c = static_cast<double>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(solve_smo(x, y, kernel, params));
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(smo, linear, KernelSpec::linear())
    ->ArgsProduct({{50, 100, 200, 400}, {1, 100}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(smo, rbf, KernelSpec::rbf(0.1))
    ->ArgsProduct({{50, 100, 200, 400}, {1, 100}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(smo, poly2, KernelSpec::polynomial(2))
    ->ArgsProduct({{50, 100, 200}, {1, 100}})
    ->Unit(benchmark::kMillisecond);
