#include <benchmark/benchmark.h>

#include "drn/walks.hpp"

namespace {

void BM_SimulateWalks(benchmark::State& state) {
  const drn::Geometry g{0.075, 1.25, 50.0};
  drn::WalkConfig c = drn::default_walk_config(g, 1);
  c.n_walkers = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(drn::simulate_walks(g, c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateWalks)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

// Step policy matters most: fixed base step against boundary-adaptive steps.
void BM_WalkStepping(benchmark::State& state) {
  const drn::Geometry g{0.075, 1.25, 50.0};
  drn::WalkConfig c = drn::default_walk_config(g, 2);
  c.n_walkers = 2000;
  c.step_margin = state.range(0) ? 4.0 : 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(drn::simulate_walks(g, c));
}
BENCHMARK(BM_WalkStepping)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
