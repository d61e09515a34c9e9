#include "drn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "drn/diagnostics.hpp"
#include "drn/parallel.hpp"

namespace drn {
namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void warn_if_invalid(const PhysicalParams& params, std::span<const double> grid) {
  if (grid.empty()) return;
  const double max_detuning = std::max(std::abs(grid.front()), std::abs(grid.back()));
  const ValidityReport report = validity_report(params, max_detuning);
  if (report.all_ok()) return;
  std::ostringstream msg;
  msg << "lineshape evaluated outside the weak-probe validity regime:"
      << " gamma/Delta_max=" << report.gamma_over_detuning
      << " gamma/Gamma=" << report.gamma_over_width
      << " gamma*Gamma/Delta_max^2=" << report.product_over_detuning_sq;
  warn(msg.str());
}

}  // namespace

void PhysicalParams::validate() const {
  require(positive_finite(density), "density must be positive");
  require(positive_finite(wavelength), "wavelength must be positive");
  require(positive_finite(cell_length), "cell_length must be positive");
  require(positive_finite(gamma), "gamma must be positive");
  require(positive_finite(eta), "eta must be positive");
  require(positive_finite(gamma0), "gamma0 must be positive");
  require(std::isfinite(omega_d_sq) && omega_d_sq >= 0.0, "omega_d_sq must be non-negative");
  require(std::isfinite(t0) && t0 > 0.0 && t0 <= 1.0, "t0 must lie in (0, 1]");
}

double power_broadened_width(const PhysicalParams& params) {
  return params.gamma0 + params.omega_d_sq / (2.0 * params.gamma);
}

double kappa(const PhysicalParams& params) {
  return 3.0 * std::numbers::pi / 16.0 * params.density * params.wavelength * params.wavelength *
         params.cell_length / (params.gamma * params.gamma);
}

double signal_prefactor(const PhysicalParams& params) {
  return kappa(params) * params.omega_d_sq * params.eta;
}

void RamseySequence::validate() const {
  require(std::isfinite(t_in) && t_in >= 0.0, "t_in must be non-negative");
  require(std::isfinite(weight) && weight >= 0.0, "sequence weight must be non-negative");
  for (double t : t_outs) require(positive_finite(t), "dark intervals must be positive");
}

std::size_t Lineshape::center_index() const {
  if (detunings.empty()) throw std::invalid_argument("empty lineshape");
  std::size_t best = 0;
  for (std::size_t i = 1; i < detunings.size(); ++i) {
    if (std::abs(detunings[i]) < std::abs(detunings[best])) best = i;
  }
  return best;
}

std::vector<double> symmetric_grid(double max_detuning, std::size_t points) {
  require(positive_finite(max_detuning), "max detuning must be positive");
  require(points >= 3 && points % 2 == 1, "grid needs an odd number (>= 3) of points");
  const std::size_t half = points / 2;
  std::vector<double> grid(points);
  grid[half] = 0.0;
  for (std::size_t k = 1; k <= half; ++k) {
    const double d = max_detuning * static_cast<double>(k) / static_cast<double>(half);
    grid[half + k] = d;
    grid[half - k] = -d;
  }
  return grid;
}

std::vector<double> default_grid(const PhysicalParams& params) {
  return symmetric_grid(20.0 * power_broadened_width(params), 2001);
}

bool is_symmetric_grid(std::span<const double> grid) {
  if (grid.empty()) return false;
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grid[i])) return false;
    if (i + 1 < n && !(grid[i] < grid[i + 1])) return false;
    if (grid[i] != -grid[n - 1 - i]) return false;
  }
  return true;
}

ValidityReport validity_report(const PhysicalParams& params, double max_detuning,
                               const ValidityThresholds& thresholds) {
  ValidityReport r;
  const double width = power_broadened_width(params);
  const double dmax = std::abs(max_detuning);
  const double inf = std::numeric_limits<double>::infinity();
  r.gamma_over_detuning = dmax > 0.0 ? params.gamma / dmax : inf;
  r.gamma_over_width = params.gamma / width;
  r.product_over_detuning_sq = dmax > 0.0 ? params.gamma * width / (dmax * dmax) : inf;
  r.detuning_ok = r.gamma_over_detuning >= thresholds.gamma_over_detuning;
  r.width_ok = r.gamma_over_width >= thresholds.gamma_over_width;
  r.product_ok = r.product_over_detuning_sq >= thresholds.product_over_detuning_sq;
  return r;
}

Lineshape sequence_lineshape(const PhysicalParams& params, const RamseySequence& seq,
                             std::span<const double> grid, double dark_dephasing) {
  params.validate();
  seq.validate();
  require(std::isfinite(dark_dephasing) && dark_dephasing >= 0.0,
          "dark dephasing rate must be non-negative");
  warn_if_invalid(params, grid);
  std::vector<detail::CosineTerm> terms;
  detail::append_sequence_terms(seq, power_broadened_width(params),
                                params.gamma0 + dark_dephasing, 1.0, terms);
  detail::compact_terms(terms);
  return detail::evaluate_terms(params, terms, 1.0, grid);
}

std::vector<double> contrast(const Lineshape& shape) {
  const std::size_t c = shape.center_index();
  const double sign = shape.values[c] - shape.background < 0.0 ? -1.0 : 1.0;
  std::vector<double> out(shape.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sign * (shape.values[i] - shape.background);
  return out;
}

namespace detail {

void append_sequence_terms(const RamseySequence& seq, double width, double dark_rate,
                           double weight, std::vector<CosineTerm>& out) {
  const double t = seq.t_in;
  out.push_back({t, weight * std::exp(-width * t)});
  double dark = 0.0;  // S_k, total dark time so far
  for (std::size_t k = 1; k <= seq.t_outs.size(); ++k) {
    dark += seq.t_outs[k - 1];
    const double kd = static_cast<double>(k);
    const double elapsed = kd * t + dark;  // start of pass k+1
    out.push_back({elapsed, -weight * std::exp(-kd * width * t - dark_rate * dark)});
    out.push_back({elapsed + t, weight * std::exp(-(kd + 1.0) * width * t - dark_rate * dark)});
  }
}

void compact_terms(std::vector<CosineTerm>& terms) {
  std::stable_sort(terms.begin(), terms.end(),
                   [](const CosineTerm& a, const CosineTerm& b) { return a.elapsed < b.elapsed; });
  std::size_t w = 0;
  for (std::size_t r = 0; r < terms.size(); ++r) {
    if (w > 0 && terms[w - 1].elapsed == terms[r].elapsed) {
      terms[w - 1].coefficient += terms[r].coefficient;
    } else {
      terms[w++] = terms[r];
    }
  }
  terms.resize(w);
}

Lineshape evaluate_terms(const PhysicalParams& params, std::span<const CosineTerm> terms,
                         double total_weight, std::span<const double> grid) {
  if (!is_symmetric_grid(grid)) {
    throw std::invalid_argument("detuning grid must be strictly increasing and symmetric about 0");
  }
  const double width = power_broadened_width(params);
  const double prefactor = signal_prefactor(params);
  const std::size_t n = grid.size();
  const std::size_t first = n / 2;  // grid[first] >= 0 for symmetric grids

  Lineshape out;
  out.detunings.assign(grid.begin(), grid.end());
  out.values.assign(n, params.t0);
  out.background = params.t0;

  auto eval_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = first + begin; i < first + end; ++i) {
      const double d = grid[i];
      const double phase = std::atan2(d, width);
      const double root = std::hypot(d, width);
      double bracket = 0.0;
      for (const CosineTerm& term : terms) bracket += term.coefficient * std::cos(d * term.elapsed + phase);
      const double value =
          params.t0 + prefactor / (root * root) * (-width * total_weight + root * bracket);
      out.values[i] = value;
      out.values[n - 1 - i] = value;
    }
  };
  const std::size_t count = n - first;
  if (terms.size() * count < 200000) {
    eval_range(0, count);
  } else {
    parallel_for(count, eval_range);
  }

  for (double v : out.values) {
    if (!std::isfinite(v)) {
      throw numerical_error("lineshape evaluation produced a non-finite value");
    }
  }
  return out;
}

}  // namespace detail
}  // namespace drn
