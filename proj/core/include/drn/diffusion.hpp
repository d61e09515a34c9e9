#pragma once

#include <cstddef>
#include <vector>

#include "drn/model.hpp"

namespace drn {

// Transverse geometry: a step-profile beam of radius `beam_radius` centred in
// a cylindrical cell of radius `cell_radius`. Lengths in cm, D in cm^2/s.
struct Geometry {
  double beam_radius = 0.075;
  double cell_radius = 1.25;
  double diffusion_coefficient = 50.0;

  // Throws std::invalid_argument unless 0 < a < R and D > 0.
  void validate() const;
};

// k-th positive zero of J0 (k >= 1).
double bessel_j0_zero(std::size_t k);

// Mean beam-escape time of the lowest radial diffusion mode, a^2 / (mu_1^2 D).
double tau_d(const Geometry& geom);

// Mean first-exit time from the disk for a uniform start, a^2 / (8 D).
double mean_exit_time(const Geometry& geom);

// Lorentzian FWHM [Hz] when beam escape is treated as a pure decay at 1/tau_D:
// (Gamma0 + 1/tau_D + |Omega_d|^2/(2 gamma)) / pi.
double lowest_mode_fwhm(const Geometry& geom, const PhysicalParams& params);

// Probability mass over time bins plus the mass with no qualifying event
// before the horizon.
struct TimeDistribution {
  std::vector<double> bin_edges;  // strictly increasing [s]
  std::vector<double> mass;       // one entry per bin
  double escape_mass = 0.0;
  double horizon = 0.0;

  std::size_t bins() const { return mass.size(); }
  double total() const;  // sum(mass) + escape_mass
  // Throws std::invalid_argument on shape errors, negative mass, or
  // |total - 1| > 1e-9.
  void validate() const;
  // P(T > t), linear within the straddling bin; includes escape_mass.
  double tail_probability(double t) const;
  // Smallest t with P(T <= t) >= q (linear within bins); NaN if the binned
  // mass never reaches q.
  double quantile(double q) const;
  double median() const { return quantile(0.5); }
  // Mass-weighted mean over bin midpoints, restricted to the binned mass.
  double binned_mean() const;
};

// Survival probability of an atom started uniformly in the disk,
//   S(t) = sum_k (4 / mu_k^2) exp(-mu_k^2 D t / a^2),
// summed until the next term is below `tolerance`, with the remaining tail
// estimated from the asymptotic zero spacing.
class ExitSeries {
 public:
  explicit ExitSeries(const Geometry& geom, double tolerance = 1e-10, std::size_t max_terms = 4096);

  double survival(double t) const;
  // First-exit density -dS/dt [1/s]; diverges as t -> 0.
  double density(double t) const;
  // Number of explicit eigenmodes used at time t.
  std::size_t terms_used(double t) const;

 private:
  double rate_scale_;  // D / a^2
  double tolerance_;
  std::size_t max_terms_;
};

// Binned first-exit distribution on [0, horizon] for a uniform start.
// Warns if more than half the mass lies beyond the horizon.
TimeDistribution exit_time_distribution(const Geometry& geom, std::size_t n_bins, double horizon);

}  // namespace drn
