#include "drn/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/bessel.hpp>

#include "drn/diagnostics.hpp"

namespace drn {
namespace {

constexpr double pi = std::numbers::pi;

// J0 zeros are shared by every series; grown on demand.
class ZeroTable {
 public:
  double get(std::size_t k) {
    std::lock_guard lock(mutex_);
    if (k > zeros_.size()) {
      const std::size_t want = std::max(k, 2 * zeros_.size() + 64);
      const std::size_t have = zeros_.size();
      zeros_.reserve(want);
      boost::math::cyl_bessel_j_zero(0.0, static_cast<int>(have + 1),
                                     static_cast<unsigned>(want - have), std::back_inserter(zeros_));
    }
    return zeros_[k - 1];
  }

 private:
  std::mutex mutex_;
  std::vector<double> zeros_;
};

ZeroTable& zero_table() {
  static ZeroTable table;
  return table;
}

// sum_{k>K} f(mu_k) approximated by the integral over beta = (k - 1/4) pi from
// the midpoint K + 1/2, which is accurate to O(K^-3) for J0 zeros.
double survival_tail(std::size_t last, double s) {
  const double beta0 = (static_cast<double>(last) + 0.25) * pi;
  if (s <= 0.0) return 4.0 / (pi * beta0);
  const double rs = std::sqrt(s);
  return 4.0 / pi *
         (std::exp(-s * beta0 * beta0) / beta0 - std::sqrt(pi * s) * std::erfc(beta0 * rs));
}

double density_tail(std::size_t last, double s) {
  if (s <= 0.0) return std::numeric_limits<double>::infinity();
  const double beta0 = (static_cast<double>(last) + 0.25) * pi;
  return 4.0 / pi * std::sqrt(pi) / (2.0 * std::sqrt(s)) * std::erfc(beta0 * std::sqrt(s));
}

}  // namespace

void Geometry::validate() const {
  if (!(std::isfinite(beam_radius) && beam_radius > 0.0)) {
    throw std::invalid_argument("beam radius must be positive");
  }
  if (!(std::isfinite(cell_radius) && cell_radius > beam_radius)) {
    throw std::invalid_argument("cell radius must exceed the beam radius");
  }
  if (!(std::isfinite(diffusion_coefficient) && diffusion_coefficient > 0.0)) {
    throw std::invalid_argument("diffusion coefficient must be positive");
  }
}

double bessel_j0_zero(std::size_t k) {
  if (k == 0) throw std::invalid_argument("Bessel zeros are indexed from 1");
  return zero_table().get(k);
}

double tau_d(const Geometry& geom) {
  geom.validate();
  const double mu1 = bessel_j0_zero(1);
  return geom.beam_radius * geom.beam_radius / (mu1 * mu1 * geom.diffusion_coefficient);
}

double mean_exit_time(const Geometry& geom) {
  geom.validate();
  return geom.beam_radius * geom.beam_radius / (8.0 * geom.diffusion_coefficient);
}

double lowest_mode_fwhm(const Geometry& geom, const PhysicalParams& params) {
  // Written with the escape rate so that D -> 0 is continuous.
  const double mu1 = bessel_j0_zero(1);
  const double escape_rate =
      mu1 * mu1 * geom.diffusion_coefficient / (geom.beam_radius * geom.beam_radius);
  return (power_broadened_width(params) + escape_rate) / pi;
}

double TimeDistribution::total() const {
  double s = escape_mass;
  for (double m : mass) s += m;
  return s;
}

void TimeDistribution::validate() const {
  if (mass.empty() || bin_edges.size() != mass.size() + 1) {
    throw std::invalid_argument("time distribution needs bins+1 edges");
  }
  for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i) {
    if (!(bin_edges[i] < bin_edges[i + 1])) {
      throw std::invalid_argument("time distribution edges must increase");
    }
  }
  for (double m : mass) {
    if (!(m >= 0.0)) throw std::invalid_argument("time distribution masses must be non-negative");
  }
  if (!(escape_mass >= 0.0)) throw std::invalid_argument("escape mass must be non-negative");
  if (std::abs(total() - 1.0) > 1e-9) {
    throw std::invalid_argument("time distribution is not normalised");
  }
}

double TimeDistribution::tail_probability(double t) const {
  double tail = escape_mass;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    const double lo = bin_edges[i];
    const double hi = bin_edges[i + 1];
    if (t <= lo) {
      tail += mass[i];
    } else if (t < hi) {
      tail += mass[i] * (hi - t) / (hi - lo);
    }
  }
  return tail;
}

double TimeDistribution::quantile(double q) const {
  double cum = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] > 0.0 && cum + mass[i] >= q) {
      const double frac = (q - cum) / mass[i];
      return bin_edges[i] + frac * (bin_edges[i + 1] - bin_edges[i]);
    }
    cum += mass[i];
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double TimeDistribution::binned_mean() const {
  double m0 = 0.0;
  double m1 = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    m0 += mass[i];
    m1 += mass[i] * 0.5 * (bin_edges[i] + bin_edges[i + 1]);
  }
  return m0 > 0.0 ? m1 / m0 : std::numeric_limits<double>::quiet_NaN();
}

ExitSeries::ExitSeries(const Geometry& geom, double tolerance, std::size_t max_terms)
    : rate_scale_(geom.diffusion_coefficient / (geom.beam_radius * geom.beam_radius)),
      tolerance_(tolerance),
      max_terms_(max_terms) {
  geom.validate();
  if (!(tolerance > 0.0) || max_terms == 0) {
    throw std::invalid_argument("series tolerance and term cap must be positive");
  }
}

std::size_t ExitSeries::terms_used(double t) const {
  const double s = rate_scale_ * std::max(t, 0.0);
  std::size_t k = 1;
  for (; k < max_terms_; ++k) {
    const double mu = bessel_j0_zero(k + 1);
    if (4.0 / (mu * mu) * std::exp(-mu * mu * s) < tolerance_) break;
  }
  return k;
}

double ExitSeries::survival(double t) const {
  if (t < 0.0) return 1.0;
  const double s = rate_scale_ * t;
  double sum = 0.0;
  std::size_t k = 1;
  for (;; ++k) {
    const double mu = bessel_j0_zero(k);
    const double term = 4.0 / (mu * mu) * std::exp(-mu * mu * s);
    sum += term;
    if (k >= max_terms_) break;
    const double next = bessel_j0_zero(k + 1);
    if (4.0 / (next * next) * std::exp(-next * next * s) < tolerance_) break;
  }
  return sum + survival_tail(k, s);
}

double ExitSeries::density(double t) const {
  if (t <= 0.0) return std::numeric_limits<double>::infinity();
  const double s = rate_scale_ * t;
  double sum = 0.0;
  std::size_t k = 1;
  for (;; ++k) {
    const double mu = bessel_j0_zero(k);
    sum += 4.0 * std::exp(-mu * mu * s);
    if (k >= max_terms_) break;
    const double next = bessel_j0_zero(k + 1);
    if (4.0 / (next * next) * std::exp(-next * next * s) < tolerance_) break;
  }
  return rate_scale_ * (sum + density_tail(k, s));
}

TimeDistribution exit_time_distribution(const Geometry& geom, std::size_t n_bins, double horizon) {
  geom.validate();
  if (n_bins == 0) throw std::invalid_argument("need at least one bin");
  if (!(std::isfinite(horizon) && horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  const ExitSeries series(geom);
  TimeDistribution dist;
  dist.horizon = horizon;
  dist.bin_edges.resize(n_bins + 1);
  dist.mass.resize(n_bins);
  for (std::size_t i = 0; i <= n_bins; ++i) {
    dist.bin_edges[i] = horizon * static_cast<double>(i) / static_cast<double>(n_bins);
  }
  // S(0) = 1 by completeness of the eigenmodes.
  double previous = 1.0;
  for (std::size_t i = 0; i < n_bins; ++i) {
    const double next = series.survival(dist.bin_edges[i + 1]);
    dist.mass[i] = std::max(0.0, previous - next);
    previous = next;
  }
  dist.escape_mass = std::max(0.0, previous);
  if (dist.escape_mass > 0.5) {
    std::ostringstream msg;
    msg << "exit-time horizon " << horizon << " s leaves escape mass " << dist.escape_mass;
    warn(msg.str());
  }
  return dist;
}

}  // namespace drn
