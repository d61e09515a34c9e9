#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace drn {

// Atomic and optical parameters of the weak-probe EIT transmission.
// Rates are angular frequencies [rad/s], lengths in cm, density in cm^-3.
struct PhysicalParams {
  double density = 6e10;       // n
  double wavelength = 795e-7;  // lambda
  double cell_length = 5.0;    // L
  double gamma = 2.0 * std::numbers::pi * 15e6;   // excited-state relaxation
  double eta = 2.0 * std::numbers::pi * 5.75e6;   // excited-state radiative decay
  double gamma0 = 2.0 * std::numbers::pi * 50.0;  // ground-state decoherence
  double omega_d_sq = 0.0;     // |Omega_d|^2 of the strong field [rad^2/s^2]
  double t0 = 0.5;             // background transmission

  // Throws std::invalid_argument unless all rates and lengths are positive
  // and finite, omega_d_sq >= 0 and 0 < t0 <= 1.
  void validate() const;
};

// Gamma = Gamma0 + |Omega_d|^2 / (2 gamma).
double power_broadened_width(const PhysicalParams& params);

// kappa = (3 pi / 16) n lambda^2 L / gamma^2  [s^2].
double kappa(const PhysicalParams& params);

// kappa |Omega_d|^2 eta, the prefactor of the resonant signal [1/s].
double signal_prefactor(const PhysicalParams& params);

// One atom history: equal in-beam passes of duration t_in separated by the
// listed dark intervals. An empty t_outs is a single pass.
struct RamseySequence {
  double t_in = 0.0;
  std::vector<double> t_outs;
  double weight = 1.0;

  std::size_t returns() const { return t_outs.size(); }
  void validate() const;
};

// Transmission on a two-photon detuning grid [rad/s]. `background` is the
// off-resonant level T0 the values are measured against.
struct Lineshape {
  std::vector<double> detunings;
  std::vector<double> values;
  double background = 0.0;

  std::size_t size() const { return detunings.size(); }
  // Index of the grid point closest to zero detuning.
  std::size_t center_index() const;
};

// `points` (odd, >= 3) points on [-max_detuning, max_detuning]. The negative
// half is the exact negation of the positive half; the middle point is 0.
std::vector<double> symmetric_grid(double max_detuning, std::size_t points);

// Default grid: 2001 points spanning +-20 Gamma.
std::vector<double> default_grid(const PhysicalParams& params);

// True if the grid is strictly increasing and grid[i] == -grid[n-1-i].
bool is_symmetric_grid(std::span<const double> grid);

// Evaluates the repeated-interaction transmission for one sequence. With one
// dark interval this is the published single-return formula; each further
// return appends the next pair of cosine terms. `dark_dephasing` is added to
// Gamma0 in the dark-interval exponents only.
//
// Throws std::invalid_argument for an asymmetric grid or an invalid sequence
// and numerical_error if any value is non-finite. Emits a warning when the
// validity ratios fail at the largest grid detuning.
Lineshape sequence_lineshape(const PhysicalParams& params, const RamseySequence& seq,
                             std::span<const double> grid, double dark_dephasing = 0.0);

// Signal oriented so the value at zero detuning is non-negative:
// s * (T - background) with s = sign(T(0) - background).
std::vector<double> contrast(const Lineshape& shape);

struct ValidityThresholds {
  double gamma_over_detuning = 100.0;
  double gamma_over_width = 100.0;
  double product_over_detuning_sq = 10.0;
};

struct ValidityReport {
  double gamma_over_detuning = 0.0;       // gamma / Delta_max
  double gamma_over_width = 0.0;          // gamma / Gamma
  double product_over_detuning_sq = 0.0;  // gamma Gamma / Delta_max^2
  bool detuning_ok = false;
  bool width_ok = false;
  bool product_ok = false;

  bool all_ok() const { return detuning_ok && width_ok && product_ok; }
};

ValidityReport validity_report(const PhysicalParams& params, double max_detuning,
                               const ValidityThresholds& thresholds = {});

namespace detail {

// One weighted cosine term c * cos(Delta * elapsed + phi) of the bracket.
struct CosineTerm {
  double elapsed = 0.0;
  double coefficient = 0.0;
};

// Appends the bracket terms of `seq`, each scaled by `weight`.
void append_sequence_terms(const RamseySequence& seq, double width, double dark_rate,
                           double weight, std::vector<CosineTerm>& out);

// Sorts terms by elapsed time and merges equal elapsed times.
void compact_terms(std::vector<CosineTerm>& terms);

// T(Delta) = T0 + P/(Delta^2+Gamma^2) * (-Gamma W + sqrt(Delta^2+Gamma^2) sum_j c_j cos(Delta e_j + phi))
// where W is the total weight. The grid must be symmetric; negative
// detunings are mirrored from the non-negative half.
Lineshape evaluate_terms(const PhysicalParams& params, std::span<const CosineTerm> terms,
                         double total_weight, std::span<const double> grid);

}  // namespace detail

}  // namespace drn
