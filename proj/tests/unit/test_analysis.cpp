#include <cmath>
#include <stdexcept>
#include <numbers>
#include <random>

#include "doctest.h"
#include "drn/analysis.hpp"

using namespace drn;

namespace {

double lorentz(double x, double amp, double center, double fwhm, double offset) {
  const double h = 0.5 * fwhm;
  return offset + amp * h * h / ((x - center) * (x - center) + h * h);
}

}  // namespace

TEST_CASE("Lorentzian fit recovers exact parameters") {
  const auto x = symmetric_grid(100.0, 401);
  std::vector<double> y;
  for (double v : x) y.push_back(lorentz(v, 3.0, 1.5, 12.0, 0.2));
  const auto f = fit_lorentzian(x, y);
  CHECK(f.converged);
  CHECK(f.amplitude == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(f.center == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(f.fwhm == doctest::Approx(12.0).epsilon(1e-8));
  CHECK(f.offset == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(f.rms_residual < 1e-9);
  CHECK(f(1.5) == doctest::Approx(3.2));
}

TEST_CASE("fit options") {
  const auto x = symmetric_grid(100.0, 401);
  std::vector<double> y;
  for (double v : x) y.push_back(lorentz(v, 2.0, 0.0, 10.0, 0.0));
  LorentzianFit init;
  init.amplitude = 1.0;
  init.fwhm = 20.0;
  FitOptions opt;
  opt.fix_center = true;
  opt.fix_offset = true;
  const auto f = fit_lorentzian(x, y, {}, init, opt);
  CHECK(f.center == 0.0);
  CHECK(f.offset == 0.0);
  CHECK(f.fwhm == doctest::Approx(10.0).epsilon(1e-8));
  opt.min_fwhm = 15.0;
  const auto g = fit_lorentzian(x, y, {}, init, opt);
  CHECK(g.fwhm >= 15.0);
  CHECK_THROWS_AS(fit_lorentzian(x, y, DetuningWindow{99.9, 100.0}), std::invalid_argument);
}

TEST_CASE("direct half-maximum width") {
  const auto x = symmetric_grid(50.0, 10001);
  std::vector<double> y;
  for (double v : x) y.push_back(lorentz(v, 1.0, 0.0, 8.0, 0.0));
  CHECK(fwhm_numeric(x, y) == doctest::Approx(8.0).epsilon(1e-5));
  std::vector<double> flat(x.size(), 1.0);
  CHECK_THROWS_AS(fwhm_numeric(x, flat), std::runtime_error);
}

TEST_CASE("narrow peak on a broad pedestal") {
  // Broad Lorentzian plus a narrow one ten times thinner.
  const double pi = std::numbers::pi;
  Geometry g{0.5, 1.25, 50.0};
  PhysicalParams p;
  p.omega_d_sq = 0.0;
  const double broad = 2 * pi * 5000.0, narrow = 2 * pi * 500.0;
  Lineshape s;
  s.detunings = symmetric_grid(40 * broad, 8001);
  s.background = 0.5;
  for (double d : s.detunings) s.values.push_back(0.5 + lorentz(d, 1.0, 0, broad, 0) + lorentz(d, 1.0, 0, narrow, 0));
  const auto m = peak_metrics(s, g, p);
  CHECK(m.amplitude == doctest::Approx(2.0));
  CHECK(m.central_from_remainder);
  CHECK(m.wing_fit.fwhm == doctest::Approx(broad).epsilon(0.05));
  CHECK(m.peak_excess == doctest::Approx(1.0).epsilon(0.05));
  CHECK(m.central_fwhm == doctest::Approx(narrow).epsilon(0.05));
  CHECK(m.lowest_mode_fwhm_hz == doctest::Approx(lowest_mode_fwhm(g, p)));
  CHECK(m.narrowing_factor == doctest::Approx(m.lowest_mode_fwhm_hz / (m.central_fwhm / (2 * pi))));
}

TEST_CASE("fringe spacing of a cosine pattern") {
  Lineshape s;
  s.detunings = symmetric_grid(100.0, 2001);
  s.background = 0.0;
  for (double d : s.detunings) s.values.push_back(1.0 + std::cos(0.7 * d) * std::exp(-d * d / 5000.0));
  CHECK(fringe_spacing(s, 0.0) == doctest::Approx(2 * std::numbers::pi / 0.7).epsilon(1e-3));
  Lineshape flat;
  flat.detunings = symmetric_grid(1.0, 5);
  flat.values = {0, 1, 2, 1, 0};
  CHECK(std::isnan(fringe_spacing(flat, 0.0)));
}

TEST_CASE("self-fit at a 400 Hz width") {
  const double w = 2 * std::numbers::pi * 400.0;
  const auto x = symmetric_grid(20 * w, 2001);
  std::vector<double> y;
  for (double v : x) y.push_back(lorentz(v, 0.01, 0.0, w, 0.5));
  const auto f = fit_lorentzian(x, y);
  CHECK(f.converged);
  CHECK(f.fwhm == doctest::Approx(w).epsilon(1e-3));
  CHECK(f.rms_residual < 1e-10);
}

TEST_CASE("fit under one percent noise") {
  const double w = 2 * std::numbers::pi * 400.0;
  const auto x = symmetric_grid(20 * w, 2001);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> y;
  for (double v : x) y.push_back(lorentz(v, 1.0, 0.0, w, 0.0) + noise(rng));
  const auto f = fit_lorentzian(x, y);
  CHECK(f.converged);
  CHECK(f.fwhm == doctest::Approx(w).epsilon(0.03));
  CHECK(f.rms_residual == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("direct width on the grid") {
  const double w = 2 * std::numbers::pi * 1000.0;
  const auto x = symmetric_grid(20 * w, 2001);
  std::vector<double> y;
  for (double v : x) y.push_back(lorentz(v, 1.0, 0.0, w, 0.0));
  const double spacing = x[1] - x[0];
  const double coarse = fwhm_numeric(x, y);
  CHECK(std::abs(coarse - w) < spacing);
  // Refining the grid by two moves the result by less than half a spacing.
  const auto x2 = symmetric_grid(20 * w, 4001);
  std::vector<double> y2;
  for (double v : x2) y2.push_back(lorentz(v, 1.0, 0.0, w, 0.0));
  CHECK(std::abs(fwhm_numeric(x2, y2) - coarse) < 0.5 * spacing);
}

TEST_CASE("symmetric data fits a centred line") {
  const auto x = symmetric_grid(200.0, 801);
  std::vector<double> y;
  for (double v : x) y.push_back(lorentz(v, 1.0, 0.0, 15.0, 0.0) + 0.3 * lorentz(v, 1.0, 0.0, 3.0, 0.0));
  const auto f = fit_lorentzian(x, y);
  CHECK(std::abs(f.center) < x[1] - x[0]);
}

TEST_CASE("direct and fitted widths agree") {
  const auto x = symmetric_grid(1000.0, 2001);
  for (double w : {5.0, 20.0, 80.0, 300.0}) {
    std::vector<double> y;
    for (double v : x) y.push_back(lorentz(v, 1.0, 0.0, w, 0.0));
    const auto f = fit_lorentzian(x, y);
    CAPTURE(w);
    CHECK(fwhm_numeric(x, y) == doctest::Approx(f.fwhm).epsilon(0.02));
  }
}

TEST_CASE("a pure Lorentzian has no central excess") {
  const double pi = std::numbers::pi;
  const Geometry g{0.5, 1.25, 50.0};
  PhysicalParams p;
  p.omega_d_sq = 0.0;
  const double w = 2 * pi * 400.0;
  Lineshape s;
  s.detunings = symmetric_grid(20 * w, 2001);
  s.background = 0.5;
  for (double d : s.detunings) s.values.push_back(0.5 + lorentz(d, 0.02, 0, w, 0));
  const auto m = peak_metrics(s, g, p);
  CHECK(std::abs(m.peak_excess) < 0.01 * m.amplitude);
  CHECK_FALSE(m.central_from_remainder);
  CHECK(m.narrowing_factor == doctest::Approx(lowest_mode_fwhm(g, p) / 400.0).epsilon(0.01));
}

TEST_CASE("averaged Ramsey pattern is narrower than its envelope") {
  // One pass of t_in = 1 and dark times spread over [20, 40] (arbitrary
  // units): the fringes wash out except the central one.
  const double pi = std::numbers::pi;
  PhysicalParams p;
  p.gamma = 2 * pi * 35e6;
  p.gamma0 = 1e-3;
  p.omega_d_sq = 2.0 * p.gamma * 0.2;
  const double t_in = 1.0;
  const auto grid = symmetric_grid(40.0, 8001);
  Lineshape single = sequence_lineshape(p, {t_in, {}, 1.0}, grid);
  Lineshape avg;
  avg.detunings = grid;
  avg.background = p.t0;
  avg.values.assign(grid.size(), 0.0);
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    const auto s = sequence_lineshape(p, {t_in, {20.0 + 20.0 * (i + 0.5) / n}, 1.0}, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) avg.values[j] += s.values[j] / n;
  }
  const double central = fwhm_numeric(avg);
  const double envelope = fwhm_numeric(single);
  CAPTURE(central);
  CAPTURE(envelope);
  CHECK(central < envelope / 5.0);
}
