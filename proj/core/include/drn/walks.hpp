#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "drn/diffusion.hpp"

namespace drn {

enum class WalkStart {
  uniform_disk,  // in the beam, uniformly distributed over the disk
  dark_radius,   // in the dark at `start_radius` (annulus hitting problems)
};

struct WalkConfig {
  std::size_t n_walkers = 100000;
  double time_step = 0.0;  // base step [s]; must satisfy sqrt(2 D dt) < a/20
  double horizon = 0.0;    // maximum tracked time per walker [s]
  std::uint64_t seed = 0;
  // Walkers stop after this many counted returns to the beam.
  std::size_t max_returns = 2;
  // Excursions shorter than this are not counted as dark intervals; the
  // walker is treated as never having left the beam.
  double min_dark_time = 0.0;
  WalkStart start = WalkStart::uniform_disk;
  double start_radius = 0.0;  // used by WalkStart::dark_radius
  // Steps grow to (distance to nearest boundary / step_margin)^2 / (2 D)
  // when that exceeds the base step. 0 disables adaptive stepping.
  double step_margin = 4.0;
};

// Defaults for a geometry: dt = tau_D/400, horizon = 50 tau_D and
// min_dark_time = tau_D.
WalkConfig default_walk_config(const Geometry& geom, std::uint64_t seed);

enum class WalkerFate {
  no_exit,      // still in its first pass at the horizon
  wall,         // absorbed at the cell wall during a dark interval
  horizon,      // horizon reached after leaving the beam
  max_returns,  // stopped after max_returns counted returns
};

struct WalkerHistory {
  double first_exit_time = 0.0;   // NaN for walkers that never left the beam
  std::vector<double> dark_times; // counted dark intervals that ended in a return
  WalkerFate fate = WalkerFate::no_exit;
  bool open_dark_interval = false; // ended inside a qualifying dark interval
};

struct WalkEnsembleStats {
  std::size_t n_walkers = 0;
  std::uint64_t seed = 0;
  std::size_t max_returns = 0;
  double min_dark_time = 0.0;
  double horizon = 0.0;
  double time_step = 0.0;
  double mean_exit_time = 0.0;      // over walkers that left the beam
  double return_probability = 0.0;  // per counted dark interval
  std::size_t dark_intervals = 0;   // counted intervals (returned or not)
  std::size_t returns = 0;
  std::vector<WalkerHistory> walkers;

  std::vector<double> exit_times() const;
  // Every counted dark interval that ended in a return, in walker order.
  std::vector<double> return_times() const;
  // (t_in, t_out) of each walker's first counted return.
  std::vector<std::pair<double, double>> joint_samples() const;
};

// 2D Brownian walkers (per-axis variance 2 D dt per step) in the beam disk and
// the surrounding annulus. Records the first-exit time, then each dark
// interval until re-entry, absorption at the cell wall, or the horizon.
// Boundary crossings within a step are detected with the Brownian-bridge
// probability and timed by sampling the bridge hitting time. Walker i draws
// from a stream seeded by (seed, i), so results are independent of the
// thread count.
WalkEnsembleStats simulate_walks(const Geometry& geom, const WalkConfig& config);

// Histogram of counted dark intervals on `n_bins` uniform bins over
// [0, horizon]. Escape mass is the fraction of counted intervals that ended at
// the wall, at the simulation horizon, or beyond `horizon`.
TimeDistribution return_time_distribution(const WalkEnsembleStats& stats, std::size_t n_bins,
                                          double horizon);

// Kolmogorov-Smirnov distance between the samples and a CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

namespace detail {

// Inverse Gaussian IG(mean, shape) by the Michael-Schucany-Haas transform.
double sample_inverse_gaussian(double mean, double shape, std::mt19937_64& rng);

// Time at which a 1D Brownian bridge of total variance `variance` over a step
// of length `step`, running from distance `d_start` > 0 to |distance|
// `d_end` from a flat boundary, first touches the boundary (conditioned on
// touching it). With u = t/(step - t), u ~ IG(d_start/d_end, d_start^2/variance).
double sample_bridge_hit_time(double d_start, double d_end, double variance, double step,
                              std::mt19937_64& rng);

// Seed for walker `index` of a run with `seed`.
std::uint64_t walker_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace detail

}  // namespace drn
