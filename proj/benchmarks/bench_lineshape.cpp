#include <numbers>

#include <benchmark/benchmark.h>

#include "drn/diagnostics.hpp"
#include "drn/ensemble.hpp"
#include "drn/model.hpp"

namespace {

drn::PhysicalParams params() {
  drn::PhysicalParams p;
  p.gamma = 2.0 * std::numbers::pi * 35e6;
  p.omega_d_sq = 2.0 * p.gamma * 2000.0;
  return p;
}

void quiet() { drn::set_warning_handler([](std::string_view) {}); }

void BM_SequenceLineshape(benchmark::State& state) {
  quiet();
  const auto p = params();
  const auto grid = drn::default_grid(p);
  const drn::RamseySequence seq{2e-5, {4e-4, 1e-4}, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(drn::sequence_lineshape(p, seq, grid));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_SequenceLineshape);

// Product-route ensemble over the exit-time quadrature, no Monte Carlo.
void BM_EnsembleLineshape(benchmark::State& state) {
  quiet();
  const auto p = params();
  const drn::Geometry g{0.075, 1.25, 50.0};
  const auto t_in = drn::exit_time_distribution(g, 4000, 50 * drn::tau_d(g));
  drn::TimeDistribution t_out;
  t_out.bin_edges = {1e-4, 2e-4, 4e-4, 8e-4};
  t_out.mass = {0.3, 0.2, 0.1};
  t_out.escape_mass = 0.4;
  t_out.horizon = 8e-4;
  drn::EnsembleConfig cfg;
  cfg.max_returns = static_cast<std::size_t>(state.range(0));
  const auto set = drn::enumerate_sequences(t_in, t_out, cfg);
  const auto grid = drn::symmetric_grid(20 * (drn::power_broadened_width(p) + 1 / drn::tau_d(g)), 2001);
  for (auto _ : state) benchmark::DoNotOptimize(drn::ensemble_lineshape(p, set, cfg, grid));
  state.counters["sequences"] = static_cast<double>(set.sequences.size());
}
BENCHMARK(BM_EnsembleLineshape)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_ExitDistribution(benchmark::State& state) {
  const drn::Geometry g{0.075, 1.25, 50.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(drn::exit_time_distribution(g, static_cast<std::size_t>(state.range(0)), 50 * drn::tau_d(g)));
}
BENCHMARK(BM_ExitDistribution)->Arg(400)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace
