#include <cmath>
#include <stdexcept>
#include <numbers>
#include <random>

#include "doctest.h"
#include "drn/diagnostics.hpp"
#include "drn/model.hpp"
#include "oracles.hpp"

using namespace drn;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

PhysicalParams typical() {
  PhysicalParams p;
  p.gamma = two_pi * 35e6;
  p.omega_d_sq = 2.0 * p.gamma * 5000.0;
  return p;
}

oracle::SingleReturnInputs as_inputs(const PhysicalParams& p, double t_in, double t_out) {
  return {p.density, p.wavelength, p.cell_length, p.gamma, p.eta, p.gamma0, p.omega_d_sq, p.t0, t_in, t_out};
}

struct QuietWarnings {
  QuietWarnings() { set_warning_handler([](std::string_view) {}); }
  ~QuietWarnings() { set_warning_handler({}); }
};

}  // namespace

TEST_CASE("derived rates") {
  const PhysicalParams p = typical();
  CHECK(power_broadened_width(p) == doctest::Approx(p.gamma0 + 5000.0));
  const double k = 3.0 * std::numbers::pi / 16.0 * p.density * p.wavelength * p.wavelength * p.cell_length /
                   (p.gamma * p.gamma);
  CHECK(kappa(p) == doctest::Approx(k).epsilon(1e-14));
  CHECK(signal_prefactor(p) == doctest::Approx(k * p.omega_d_sq * p.eta).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
  PhysicalParams p = typical();
  p.t0 = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = typical();
  p.omega_d_sq = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = typical();
  p.gamma = std::nan("");
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  RamseySequence s{-1.0, {}, 1.0};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("symmetric grid") {
  const auto g = symmetric_grid(10.0, 11);
  REQUIRE(g.size() == 11);
  CHECK(g[5] == 0.0);
  CHECK(is_symmetric_grid(g));
  CHECK_THROWS(symmetric_grid(10.0, 10));
  std::vector<double> skew = {-1.0, 0.0, 1.5};
  CHECK_FALSE(is_symmetric_grid(skew));
}

TEST_CASE("single return matches the closed form") {
  QuietWarnings quiet;
  const PhysicalParams p = typical();
  const double t_in = 2e-5, t_out = 4e-4;
  const auto grid = symmetric_grid(2e5, 401);
  const auto shape = sequence_lineshape(p, {t_in, {t_out}, 1.0}, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ref = oracle::single_return_transmission(as_inputs(p, t_in, t_out), grid[i]);
    CHECK(shape.values[i] - p.t0 == doctest::Approx(ref - p.t0).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("zero in-beam time leaves the background") {
  QuietWarnings quiet;
  const PhysicalParams p = typical();
  const auto grid = symmetric_grid(1e5, 101);
  const auto shape = sequence_lineshape(p, {0.0, {1e-4, 2e-4}, 1.0}, grid);
  for (double v : shape.values) CHECK(v == doctest::Approx(p.t0).epsilon(1e-12));
}

TEST_CASE("two returns add two terms") {
  QuietWarnings quiet;
  const PhysicalParams p = typical();
  const double t = 1e-5, o1 = 1e-4, o2 = 3e-4;
  std::vector<detail::CosineTerm> terms;
  detail::append_sequence_terms({t, {o1, o2}, 1.0}, power_broadened_width(p), p.gamma0, 1.0, terms);
  REQUIRE(terms.size() == 5);
  CHECK(terms[3].elapsed == doctest::Approx(2 * t + o1 + o2));
  CHECK(terms[4].elapsed == doctest::Approx(3 * t + o1 + o2));
  const double w = power_broadened_width(p);
  CHECK(terms[3].coefficient == doctest::Approx(-std::exp(-2 * w * t - p.gamma0 * (o1 + o2))));
  CHECK(terms[4].coefficient == doctest::Approx(std::exp(-3 * w * t - p.gamma0 * (o1 + o2))));
}

TEST_CASE("compact_terms merges equal elapsed times") {
  std::vector<detail::CosineTerm> t = {{2.0, 1.0}, {1.0, 0.5}, {2.0, -0.25}};
  detail::compact_terms(t);
  REQUIRE(t.size() == 2);
  CHECK(t[0].elapsed == 1.0);
  CHECK(t[1].coefficient == doctest::Approx(0.75));
}

TEST_CASE("contrast is oriented positive at the center") {
  Lineshape s;
  s.detunings = {-1.0, 0.0, 1.0};
  s.values = {0.4, 0.1, 0.4};
  s.background = 0.5;
  const auto c = contrast(s);
  CHECK(c[1] == doctest::Approx(0.4));
  CHECK(c[0] == doctest::Approx(0.1));
}

TEST_CASE("validity report") {
  const PhysicalParams p = typical();
  auto r = validity_report(p, 1e4);
  CHECK(r.all_ok());
  r = validity_report(p, 1e8);
  CHECK_FALSE(r.detuning_ok);
}

TEST_CASE("non-finite output raises numerical_error") {
  QuietWarnings quiet;
  PhysicalParams p = typical();
  p.density = 1e300;
  p.omega_d_sq = 1e300;
  const auto grid = symmetric_grid(1e3, 11);
  CHECK_THROWS_AS(sequence_lineshape(p, {1e-5, {}, 1.0}, grid), numerical_error);
}

TEST_CASE("power-broadened width examples") {
  PhysicalParams p = typical();
  p.omega_d_sq = 0.0;
  CHECK(power_broadened_width(p) == p.gamma0);
  p.gamma0 = 50.0;
  p.omega_d_sq = 2.0 * p.gamma * 950.0;
  CHECK(power_broadened_width(p) == doctest::Approx(1000.0).epsilon(1e-14));
  p.omega_d_sq *= 2.0;
  CHECK(power_broadened_width(p) - p.gamma0 == doctest::Approx(1900.0).epsilon(1e-14));
}

TEST_CASE("kappa scaling and the reference cell") {
  PhysicalParams p = typical();
  const double k = kappa(p);
  p.density *= 2.0;
  CHECK(kappa(p) == doctest::Approx(2.0 * k).epsilon(1e-14));
  p.density /= 2.0;
  p.gamma *= 2.0;
  CHECK(kappa(p) == doctest::Approx(k / 4.0).epsilon(1e-14));
  PhysicalParams cell;
  cell.density = 6e10;
  cell.wavelength = 795e-7;
  cell.cell_length = 5.0;
  cell.gamma = two_pi * 35e6;
  const double by_hand = 0.5890486225480862 * 6e10 * 6.3202500000000005e-09 * 5.0 / (cell.gamma * cell.gamma);
  CHECK(kappa(cell) == doctest::Approx(by_hand).epsilon(1e-13));
}

TEST_CASE("resonant single pass saturates at -P/Gamma") {
  QuietWarnings quiet;
  const PhysicalParams p = typical();
  const double w = power_broadened_width(p);
  const auto grid = symmetric_grid(1.0, 3);
  const auto s = sequence_lineshape(p, {200.0 / w, {}, 1.0}, grid);
  CHECK(s.values[1] - p.t0 == doctest::Approx(-signal_prefactor(p) / w).epsilon(1e-12));
}

TEST_CASE("signal is linear in the prefactor at fixed width") {
  QuietWarnings quiet;
  PhysicalParams p = typical();
  const auto grid = symmetric_grid(5e4, 101);
  const RamseySequence seq{2e-5, {3e-4}, 1.0};
  const auto a = sequence_lineshape(p, seq, grid);
  p.density *= 3.0;  // kappa, and so the prefactor, triples; Gamma is unchanged
  const auto b = sequence_lineshape(p, seq, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(b.values[i] - p.t0 == doctest::Approx(3.0 * (a.values[i] - p.t0)).epsilon(1e-12));
  }
}

TEST_CASE("validity flag examples") {
  PhysicalParams p;
  p.gamma = 1e8;
  p.gamma0 = 1e3;
  p.omega_d_sq = 0.0;
  CHECK(validity_report(p, 1e3).all_ok());
  p.gamma = 1e4;
  p.gamma0 = 1.0;
  CHECK_FALSE(validity_report(p, 1e4).detuning_ok);
  p.gamma = 1e6;
  p.gamma0 = 10.0;  // gamma * Gamma = 1e7
  const auto r = validity_report(p, 1e4);
  CHECK(r.product_over_detuning_sq == doctest::Approx(0.1));
  CHECK_FALSE(r.product_ok);
}

TEST_CASE("default grid") {
  const PhysicalParams p = typical();
  const auto g = default_grid(p);
  CHECK(g.size() == 2001);
  CHECK(g.back() == doctest::Approx(20.0 * power_broadened_width(p)));
  CHECK(g[1000] == 0.0);
}
