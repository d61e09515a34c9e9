#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "drn/diffusion.hpp"
#include "drn/model.hpp"

namespace drn {

// offset + amplitude * (fwhm/2)^2 / ((Delta - center)^2 + (fwhm/2)^2)
struct LorentzianFit {
  double amplitude = 0.0;
  double center = 0.0;  // [rad/s]
  double fwhm = 0.0;    // [rad/s]
  double offset = 0.0;
  double rms_residual = 0.0;
  bool converged = false;
  int iterations = 0;

  double operator()(double detuning) const;
};

// Points with inner <= |Delta| <= outer take part in a fit.
struct DetuningWindow {
  double inner = 0.0;
  double outer = std::numeric_limits<double>::infinity();

  bool contains(double detuning) const;
};

struct FitOptions {
  int max_iterations = 200;
  double tolerance = 1e-8;  // relative parameter change
  bool fix_center = false;  // keep the initial center
  bool fix_offset = false;  // keep the initial offset
  double min_fwhm = 0.0;    // steps below this width are rejected
};

// Damped Gauss-Newton (Levenberg-Marquardt) fit to raw samples. Without
// `init` the start comes from the data: offset from the outermost points,
// peak height and position, and the half-maximum crossings.
// Throws std::invalid_argument with fewer than 8 points in the window.
// Non-convergence returns the best parameters with converged = false.
LorentzianFit fit_lorentzian(std::span<const double> detunings, std::span<const double> signal,
                             const DetuningWindow& window = {},
                             const std::optional<LorentzianFit>& init = std::nullopt,
                             const FitOptions& options = {});

// Fit to the oriented contrast of a lineshape (see contrast()).
LorentzianFit fit_lorentzian(const Lineshape& shape, const DetuningWindow& window = {},
                             const std::optional<LorentzianFit>& init = std::nullopt,
                             const FitOptions& options = {});

// Full width at half of the value at zero detuning, from the outermost
// contiguous half-maximum crossings around the center located by linear
// interpolation. Throws std::runtime_error if the signal never drops below
// half maximum inside the grid or the center value is not positive.
double fwhm_numeric(std::span<const double> detunings, std::span<const double> signal);
double fwhm_numeric(const Lineshape& shape);

struct PeakMetrics {
  double amplitude = 0.0;           // contrast at zero detuning
  double preliminary_fwhm = 0.0;    // direct half-maximum width [rad/s]
  LorentzianFit wing_fit;           // fit over |Delta| > 2 preliminary_fwhm
  double peak_excess = 0.0;         // contrast minus wing fit at zero detuning
  double central_fwhm = 0.0;        // [rad/s]
  bool central_from_remainder = false;  // false: no narrow component, wing width used
  double lowest_mode_fwhm_hz = 0.0;
  double narrowing_factor = 0.0;    // lowest-mode FWHM / central FWHM
};

// Separates a narrow central component from the broad pedestal: fits the
// wings, subtracts the fit and measures the remainder. The wing fit keeps the
// offset at the background and its width at or above the preliminary FWHM,
// since the far wings alone barely separate amplitude from width. A remainder
// below 1% of the amplitude counts as no narrow component and the wing-fit
// width is used.
PeakMetrics peak_metrics(const Lineshape& shape, const Geometry& geom, const PhysicalParams& params);

// Distance between adjacent local maxima of the contrast nearest to the
// given detuning; NaN if fewer than two maxima exist. Used for fringe spacing.
double fringe_spacing(const Lineshape& shape, double near_detuning);

}  // namespace drn
