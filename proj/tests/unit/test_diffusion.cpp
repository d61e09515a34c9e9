#include <cmath>
#include <stdexcept>
#include <numbers>

#include "doctest.h"
#include "drn/diffusion.hpp"
#include "oracles.hpp"

using namespace drn;

TEST_CASE("J0 zeros agree with Newton refinement") {
  for (std::size_t k : {1u, 2u, 3u, 10u, 100u, 1000u}) {
    CHECK(bessel_j0_zero(k) == doctest::Approx(oracle::j0_zero(k)).epsilon(1e-12));
  }
  CHECK(bessel_j0_zero(1) == doctest::Approx(2.404825557695773).epsilon(1e-14));
}

TEST_CASE("geometry validation") {
  Geometry g{0.5, 0.4, 10.0};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = {0.1, 1.0, -1.0};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("time scales") {
  const Geometry g{0.075, 1.25, 50.0};
  const double mu = oracle::j0_zero(1);
  CHECK(tau_d(g) == doctest::Approx(0.075 * 0.075 / (mu * mu * 50.0)));
  CHECK(mean_exit_time(g) == doctest::Approx(oracle::mean_exit_time(0.075, 50.0)));
  PhysicalParams p;
  p.omega_d_sq = 0.0;
  CHECK(lowest_mode_fwhm(g, p) == doctest::Approx((p.gamma0 + 1.0 / tau_d(g)) / std::numbers::pi));
}

TEST_CASE("exit series") {
  const Geometry g{0.1, 1.0, 20.0};
  const ExitSeries s(g);
  CHECK(s.survival(0.0) == doctest::Approx(1.0).epsilon(1e-9));
  const double tau = tau_d(g);
  // Survival integrates to the mean exit time.
  double integral = 0.0;
  const int n = 200000;
  const double end = 60.0 * tau;
  for (int i = 0; i < n; ++i) integral += s.survival((i + 0.5) * end / n) * end / n;
  CHECK(integral == doctest::Approx(mean_exit_time(g)).epsilon(1e-4));
  // Density is minus the derivative of survival.
  const double t = 0.3 * tau, h = 1e-6 * tau;
  CHECK(s.density(t) == doctest::Approx((s.survival(t - h) - s.survival(t + h)) / (2 * h)).epsilon(1e-5));
  // Late times follow the lowest mode.
  CHECK(s.survival(10 * tau) / s.survival(11 * tau) == doctest::Approx(std::exp(1.0)).epsilon(1e-6));
}

TEST_CASE("binned exit distribution") {
  const Geometry g{0.1, 1.0, 20.0};
  const double tau = tau_d(g);
  const auto d = exit_time_distribution(g, 500, 30 * tau);
  CHECK_NOTHROW(d.validate());
  CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.escape_mass == doctest::Approx(ExitSeries(g).survival(30 * tau)).epsilon(1e-9));
  CHECK(d.tail_probability(0.0) == doctest::Approx(1.0));
  const double m = d.median();
  CHECK(d.tail_probability(m) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(d.binned_mean() == doctest::Approx(mean_exit_time(g)).epsilon(0.01));
}

TEST_CASE("distribution validation") {
  TimeDistribution d;
  d.bin_edges = {0.0, 1.0, 2.0};
  d.mass = {0.5, 0.4};
  d.escape_mass = 0.0;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  d.escape_mass = 0.1;
  CHECK_NOTHROW(d.validate());
  d.mass = {0.7, -0.2};
  d.escape_mass = 0.5;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}

TEST_CASE("diffusion time examples") {
  CHECK(tau_d({0.075, 1.25, 50.0}) == doctest::Approx(1.945e-5).epsilon(1e-3));
  CHECK(tau_d({0.5, 1.25, 50.0}) == doctest::Approx(8.65e-4).epsilon(1e-3));
  CHECK(tau_d({0.15, 1.25, 50.0}) == doctest::Approx(4.0 * tau_d({0.075, 1.25, 50.0})).epsilon(1e-14));
}

TEST_CASE("lowest mode width without diffusion") {
  PhysicalParams p;
  p.gamma = 2.0 * std::numbers::pi * 35e6;
  p.omega_d_sq = 2.0 * p.gamma * 300.0;
  const Geometry g{0.5, 1.25, 1e-9};
  CHECK(lowest_mode_fwhm(g, p) == doctest::Approx((p.gamma0 + 300.0) / std::numbers::pi).epsilon(1e-6));
  CHECK(lowest_mode_fwhm({0.075, 1.25, 50.0}, PhysicalParams{.omega_d_sq = 0.0}) ==
        doctest::Approx(16.4e3).epsilon(0.01));
}

TEST_CASE("exit moments by direct integration") {
  const Geometry g{0.075, 1.25, 50.0};
  const ExitSeries s(g);
  const double tau = tau_d(g);
  CHECK(s.survival(0.0) == doctest::Approx(1.0).epsilon(1e-9));
  // Mean from t * density, on a log grid to follow the t^-1/2 edge.
  double mean = 0.0;
  const int n = 200000;
  const double lo = std::log(1e-8 * tau), hi = std::log(80.0 * tau);
  for (int i = 0; i < n; ++i) {
    const double t = std::exp(lo + (i + 0.5) * (hi - lo) / n);
    mean += t * s.density(t) * t * (hi - lo) / n;
  }
  CHECK(mean == doctest::Approx(oracle::mean_exit_time(0.075, 50.0)).epsilon(1e-3));
  // Log-slope of the tail over [5, 10] tau_D.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int m = 51;
  for (int i = 0; i < m; ++i) {
    const double t = (5.0 + 5.0 * i / (m - 1)) * tau;
    const double y = std::log(s.survival(t));
    sx += t; sy += y; sxx += t * t; sxy += t * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(-slope * tau == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("distributions collapse in units of the diffusion time") {
  const Geometry g1{0.1, 1.0, 20.0};
  const Geometry g2{0.3, 3.0, 180.0};  // same a^2/D and R/a
  const auto d1 = exit_time_distribution(g1, 200, 20 * tau_d(g1));
  const auto d2 = exit_time_distribution(g2, 200, 20 * tau_d(g2));
  for (std::size_t i = 0; i < d1.bins(); ++i) CHECK(d1.mass[i] == doctest::Approx(d2.mass[i]).epsilon(1e-9));
  const Geometry g3{0.2, 2.0, 40.0};  // a^2/D doubled
  const auto d3 = exit_time_distribution(g3, 200, 20 * tau_d(g3));
  for (std::size_t i = 0; i < d1.bins(); ++i) CHECK(d1.mass[i] == doctest::Approx(d3.mass[i]).epsilon(1e-9));
  CHECK(tau_d(g3) == doctest::Approx(2.0 * tau_d(g1)));
}
