#include <benchmark/benchmark.h>

#include "appstress/evaluation.hpp"
#include "appstress/features.hpp"
#include "appstress/synth.hpp"

namespace {

using namespace appstress;

std::vector<LabeledDay> cohort_days(int users) {
  CohortSpec spec;
  spec.n_users = users;
  const Cohort c = generate_cohort(spec);
  const auto features = extract_daily_features(c.events, default_taxonomy(), Zone());
  const auto labels = aggregate_daily_labels(c.ema, Zone());
  return join_features_labels(features, labels).pairs;
}

// One synthetic user's 30 days through the default 28-point grid.
void per_user_grid_search(benchmark::State& state) {
  const auto days = cohort_days(1);
  const Dataset d = to_dataset(days);
  const Grid grid = Grid::defaults();
  for (auto _ : state) benchmark::DoNotOptimize(grid_search(d, grid, FoldSpec{10, 42, true}));
}
BENCHMARK(per_user_grid_search)->Unit(benchmark::kMillisecond);

// Pooled 10-fold search over several users, one grid point at a time.
void pooled_cross_validate(benchmark::State& state, KernelSpec kernel, double c) {
  const Dataset d = to_dataset(cohort_days(static_cast<int>(state.range(0))));
  SvmParams params;
  params.c = c;
  for (auto _ : state) benchmark::DoNotOptimize(cross_validate(d, kernel, params, FoldSpec{10, 42, true}));
}
BENCHMARK_CAPTURE(pooled_cross_validate, linear_c1, KernelSpec::linear(), 1.0)
    ->Arg(4)->Arg(11)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(pooled_cross_validate, linear_c100, KernelSpec::linear(), 100.0)
    ->Arg(4)->Arg(11)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(pooled_cross_validate, rbf_c10, KernelSpec::rbf(0.1), 10.0)
    ->Arg(4)->Arg(11)->Unit(benchmark::kMillisecond);

}  // namespace
