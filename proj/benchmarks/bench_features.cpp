#include <benchmark/benchmark.h>

#include "appstress/features.hpp"
#include "appstress/ingest.hpp"
#include "appstress/synth.hpp"

namespace {

using namespace appstress;

Cohort make_cohort(int users) {
  CohortSpec spec;
  spec.n_users = users;
  return generate_cohort(spec);
}

void clip_events(benchmark::State& state) {
  const Cohort c = make_cohort(static_cast<int>(state.range(0)));
  const auto screen = normalize_screen_intervals(c.screen);
  for (auto _ : state) benchmark::DoNotOptimize(clip_to_screen_on(c.events, screen));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.events.size()));
}
BENCHMARK(clip_events)->Arg(22)->Arg(88);

void extract_features(benchmark::State& state) {
  const Cohort c = make_cohort(static_cast<int>(state.range(0)));
  const Zone tokyo("Asia/Tokyo");
  for (auto _ : state) benchmark::DoNotOptimize(extract_daily_features(c.events, default_taxonomy(), tokyo));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.events.size()));
}
BENCHMARK(extract_features)->Arg(22)->Arg(88);

void categorize(benchmark::State& state) {
  const Cohort c = make_cohort(4);
  const Taxonomy& tax = default_taxonomy();
  for (auto _ : state) {
    for (const auto& e : c.events) benchmark::DoNotOptimize(categorize_app(tax, e.app_id));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.events.size()));
}
BENCHMARK(categorize);

}  // namespace
