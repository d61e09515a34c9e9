#include "drn/walks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "drn/parallel.hpp"

namespace drn {
namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr double inf = std::numeric_limits<double>::infinity();

struct WalkContext {
  double a;
  double R;
  double D;
  double base_step;
  double horizon;
  double min_dark;
  double margin;
  std::size_t max_returns;
  WalkStart start;
  double start_radius;
};

class Walker {
 public:
  Walker(const WalkContext& ctx, std::uint64_t seed) : c_(ctx), rng_(seed) {}

  // Counted dark intervals, including the terminal one that did not return.
  std::size_t dark_intervals() const { return dark_intervals_; }

  WalkerHistory run() {
    if (c_.start == WalkStart::uniform_disk) {
      const double r = c_.a * std::sqrt(uniform());
      const double th = 2.0 * std::numbers::pi * uniform();
      x_ = r * std::cos(th);
      y_ = r * std::sin(th);
    } else {
      const double th = 2.0 * std::numbers::pi * uniform();
      x_ = c_.start_radius * std::cos(th);
      y_ = c_.start_radius * std::sin(th);
      exited_ = true;
      dark_ = true;
      dark_start_ = 0.0;
    }
    h_.first_exit_time = nan;

    while (!done_) {
      const double r = std::hypot(x_, y_);
      // A bridge-detected crossing leaves the position on the old side.
      if (!dark_ && r >= c_.a) {
        begin_dark(t_);
        continue;
      }
      if (dark_ && r <= c_.a) {
        finish_return(t_);
        continue;
      }
      if (t_ >= c_.horizon) {
        finish_at_horizon();
        break;
      }
      step(r);
    }
    return std::move(h_);
  }

 private:
  double uniform() { return uniform_(rng_); }
  double normal() { return normal_(rng_); }

  void step(double r) {
    const double distance = dark_ ? std::min(r - c_.a, c_.R - r) : c_.a - r;
    double dt = c_.base_step;
    if (c_.margin > 0.0) {
      const double free = distance / c_.margin;
      dt = std::max(dt, free * free / (2.0 * c_.D));
    }
    dt = std::min(dt, c_.horizon - t_);
    const double variance = 2.0 * c_.D * dt;
    const double sd = std::sqrt(variance);
    const double nx = x_ + sd * normal();
    const double ny = y_ + sd * normal();
    const double r1 = std::hypot(nx, ny);
    const double t0 = t_;
    x_ = nx;
    y_ = ny;
    t_ += dt;

    if (!dark_) {
      const double d0 = c_.a - r;
      const double d1 = c_.a - r1;
      if (crossed(d0, d1, variance)) {
        begin_dark(t0 + detail::sample_bridge_hit_time(d0, std::abs(d1), variance, dt, rng_));
      }
      return;
    }

    const double di0 = r - c_.a;
    const double di1 = r1 - c_.a;
    const double dw0 = c_.R - r;
    const double dw1 = c_.R - r1;
    const double t_inner = crossed(di0, di1, variance)
                               ? t0 + detail::sample_bridge_hit_time(di0, std::abs(di1), variance, dt, rng_)
                               : inf;
    const double t_wall = crossed(dw0, dw1, variance)
                              ? t0 + detail::sample_bridge_hit_time(dw0, std::abs(dw1), variance, dt, rng_)
                              : inf;
    if (t_wall < inf && t_wall <= t_inner) {
      ++dark_intervals_;
      h_.fate = WalkerFate::wall;
      done_ = true;
    } else if (t_inner < inf) {
      finish_return(t_inner);
    }
  }

  bool crossed(double d0, double d1, double variance) {
    if (d1 <= 0.0) return true;
    return uniform() < std::exp(-2.0 * d0 * d1 / variance);
  }

  void begin_dark(double when) {
    if (!exited_) {
      h_.first_exit_time = when;
      exited_ = true;
    }
    dark_ = true;
    dark_start_ = when;
  }

  void finish_return(double when) {
    dark_ = false;
    const double t_out = when - dark_start_;
    if (t_out < c_.min_dark) return;  // too short to count as a dark interval
    ++dark_intervals_;
    h_.dark_times.push_back(t_out);
    if (h_.dark_times.size() >= c_.max_returns) {
      h_.fate = WalkerFate::max_returns;
      done_ = true;
    }
  }

  void finish_at_horizon() {
    done_ = true;
    if (!exited_) {
      h_.fate = WalkerFate::no_exit;
      return;
    }
    h_.fate = WalkerFate::horizon;
    if (dark_ && c_.horizon - dark_start_ >= c_.min_dark) {
      ++dark_intervals_;
      h_.open_dark_interval = true;
    }
  }

  const WalkContext& c_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  WalkerHistory h_;
  std::size_t dark_intervals_ = 0;
  double x_ = 0.0;
  double y_ = 0.0;
  double t_ = 0.0;
  double dark_start_ = 0.0;
  bool dark_ = false;
  bool exited_ = false;
  bool done_ = false;
};

}  // namespace

WalkConfig default_walk_config(const Geometry& geom, std::uint64_t seed) {
  const double tau = tau_d(geom);
  WalkConfig cfg;
  cfg.time_step = tau / 400.0;
  cfg.horizon = 50.0 * tau;
  cfg.seed = seed;
  cfg.min_dark_time = tau;
  return cfg;
}

std::vector<double> WalkEnsembleStats::exit_times() const {
  std::vector<double> out;
  out.reserve(walkers.size());
  for (const auto& w : walkers) {
    if (std::isfinite(w.first_exit_time)) out.push_back(w.first_exit_time);
  }
  return out;
}

std::vector<double> WalkEnsembleStats::return_times() const {
  std::vector<double> out;
  for (const auto& w : walkers) out.insert(out.end(), w.dark_times.begin(), w.dark_times.end());
  return out;
}

std::vector<std::pair<double, double>> WalkEnsembleStats::joint_samples() const {
  std::vector<std::pair<double, double>> out;
  for (const auto& w : walkers) {
    if (std::isfinite(w.first_exit_time) && !w.dark_times.empty()) {
      out.emplace_back(w.first_exit_time, w.dark_times.front());
    }
  }
  return out;
}

WalkEnsembleStats simulate_walks(const Geometry& geom, const WalkConfig& config) {
  geom.validate();
  if (config.n_walkers == 0) throw std::invalid_argument("need at least one walker");
  if (!(std::isfinite(config.time_step) && config.time_step > 0.0)) {
    throw std::invalid_argument("time step must be positive");
  }
  if (!(std::sqrt(2.0 * geom.diffusion_coefficient * config.time_step) < geom.beam_radius / 20.0)) {
    throw std::invalid_argument("time step too large: sqrt(2 D dt) must be below a/20");
  }
  if (!(std::isfinite(config.horizon) && config.horizon > 0.0)) {
    throw std::invalid_argument("walk horizon must be positive");
  }
  if (config.max_returns == 0) throw std::invalid_argument("max_returns must be at least 1");
  if (!(config.min_dark_time >= 0.0)) throw std::invalid_argument("min_dark_time must be non-negative");
  if (config.start == WalkStart::dark_radius &&
      !(config.start_radius > geom.beam_radius && config.start_radius < geom.cell_radius)) {
    throw std::invalid_argument("dark start radius must lie inside the annulus");
  }

  const WalkContext ctx{geom.beam_radius, geom.cell_radius, geom.diffusion_coefficient,
                        config.time_step,  config.horizon,    config.min_dark_time,
                        config.step_margin, config.max_returns, config.start,
                        config.start_radius};

  WalkEnsembleStats stats;
  stats.n_walkers = config.n_walkers;
  stats.seed = config.seed;
  stats.max_returns = config.max_returns;
  stats.min_dark_time = config.min_dark_time;
  stats.horizon = config.horizon;
  stats.time_step = config.time_step;
  stats.walkers.resize(config.n_walkers);
  std::vector<std::size_t> intervals(config.n_walkers, 0);

  parallel_for(config.n_walkers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Walker walker(ctx, detail::walker_seed(config.seed, i));
      stats.walkers[i] = walker.run();
      intervals[i] = walker.dark_intervals();
    }
  });

  double exit_sum = 0.0;
  std::size_t exited = 0;
  for (std::size_t i = 0; i < stats.walkers.size(); ++i) {
    const auto& w = stats.walkers[i];
    if (std::isfinite(w.first_exit_time)) {
      exit_sum += w.first_exit_time;
      ++exited;
    }
    stats.dark_intervals += intervals[i];
    stats.returns += w.dark_times.size();
  }
  stats.mean_exit_time = exited > 0 ? exit_sum / static_cast<double>(exited) : nan;
  stats.return_probability = stats.dark_intervals > 0
                                 ? static_cast<double>(stats.returns) / static_cast<double>(stats.dark_intervals)
                                 : 0.0;
  return stats;
}

TimeDistribution return_time_distribution(const WalkEnsembleStats& stats, std::size_t n_bins,
                                          double horizon) {
  if (stats.dark_intervals == 0) throw std::invalid_argument("no dark-interval samples");
  if (n_bins == 0) throw std::invalid_argument("need at least one bin");
  if (!(std::isfinite(horizon) && horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  TimeDistribution dist;
  dist.horizon = horizon;
  dist.bin_edges.resize(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i) {
    dist.bin_edges[i] = horizon * static_cast<double>(i) / static_cast<double>(n_bins);
  }
  std::vector<std::size_t> counts(n_bins, 0);
  std::size_t binned = 0;
  for (const auto& w : stats.walkers) {
    for (double t : w.dark_times) {
      if (t >= horizon) continue;
      const auto bin = std::min<std::size_t>(
          n_bins - 1, static_cast<std::size_t>(t / horizon * static_cast<double>(n_bins)));
      ++counts[bin];
      ++binned;
    }
  }
  const double denom = static_cast<double>(stats.dark_intervals);
  dist.mass.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) dist.mass[i] = static_cast<double>(counts[i]) / denom;
  dist.escape_mass = static_cast<double>(stats.dark_intervals - binned) / denom;
  return dist;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("no samples for KS statistic");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

namespace detail {

double sample_inverse_gaussian(double mean, double shape, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double v = normal(rng);
  const double y = v * v;
  double x = mean;
  if (y > 0.0) {
    // x = mu + mu^2 y/(2 lambda) - mu/(2 lambda) sqrt(4 mu lambda y + mu^2 y^2), rearranged
    // to avoid cancellation when mu y >> lambda.
    const double my = mean * y;
    const double root = std::sqrt(4.0 * mean * shape * y + my * my);
    const double denom = root + my;
    x = 4.0 * mean * mean * shape * y / (denom * denom);
  }
  if (uniform(rng) <= mean / (mean + x)) return x;
  return mean * mean / x;
}

double sample_bridge_hit_time(double d_start, double d_end, double variance, double step,
                              std::mt19937_64& rng) {
  if (d_start <= 0.0) return 0.0;
  const double floor = 1e-12 * std::sqrt(variance);
  const double mean = d_start / std::max(d_end, floor);
  const double shape = d_start * d_start / variance;
  const double u = sample_inverse_gaussian(mean, shape, rng);
  if (!std::isfinite(u)) return step;
  return step * u / (1.0 + u);
}

std::uint64_t walker_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finaliser over a mix of the run seed and the walker index.
  std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ULL * (index + 1));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail
}  // namespace drn
