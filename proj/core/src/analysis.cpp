#include "drn/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace drn {
namespace {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

struct Sample {
  double x;
  double y;
};

// Half-maximum crossing between grid points i (above) and j (below).
double crossing(std::span<const double> x, std::span<const double> y, std::size_t i, std::size_t j,
                double half) {
  return x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
}

// Scaled parameters: amplitude and offset in units of sy, center and width in
// units of sx.
double model(const Vec4& p, double x) {
  const double hw = 0.5 * p[2];
  const double u = x - p[1];
  return p[3] + p[0] * hw * hw / (u * u + hw * hw);
}

void jacobian_row(const Vec4& p, double x, Eigen::RowVector4d& row) {
  const double hw = 0.5 * p[2];
  const double u = x - p[1];
  const double den = u * u + hw * hw;
  const double shape = hw * hw / den;
  row[0] = shape;
  row[1] = p[0] * 2.0 * u * hw * hw / (den * den);
  row[2] = p[0] * hw * u * u / (den * den);  // d/dw of hw^2/den with hw = w/2
  row[3] = 1.0;
}

double sum_sq(const std::vector<Sample>& s, const Vec4& p) {
  double r = 0.0;
  for (const auto& q : s) {
    const double e = q.y - model(p, q.x);
    r += e * e;
  }
  return r;
}

LorentzianFit initial_guess(const std::vector<Sample>& s) {
  LorentzianFit g;
  // Offset from the outermost tenth of the points on each side.
  const std::size_t edge = std::max<std::size_t>(1, s.size() / 20);
  double off = 0.0;
  for (std::size_t i = 0; i < edge; ++i) off += s[i].y + s[s.size() - 1 - i].y;
  g.offset = off / static_cast<double>(2 * edge);
  std::size_t peak = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (std::abs(s[i].y - g.offset) > std::abs(s[peak].y - g.offset)) peak = i;
  }
  g.center = s[peak].x;
  g.amplitude = s[peak].y - g.offset;
  const double half = 0.5 * g.amplitude;
  auto above = [&](std::size_t i) { return (s[i].y - g.offset) * (half >= 0 ? 1.0 : -1.0) >= std::abs(half); };
  std::size_t lo = peak;
  while (lo > 0 && above(lo - 1)) --lo;
  std::size_t hi = peak;
  while (hi + 1 < s.size() && above(hi + 1)) ++hi;
  const double span = s.back().x - s.front().x;
  double w = s[hi].x - s[lo].x;
  if (lo > 0) w += 0.5 * (s[lo].x - s[lo - 1].x);
  if (hi + 1 < s.size()) w += 0.5 * (s[hi + 1].x - s[hi].x);
  g.fwhm = w > 0.0 ? w : span / 4.0;
  return g;
}

}  // namespace

double LorentzianFit::operator()(double detuning) const {
  const double hw = 0.5 * fwhm;
  const double u = detuning - center;
  return offset + amplitude * hw * hw / (u * u + hw * hw);
}

bool DetuningWindow::contains(double detuning) const {
  const double a = std::abs(detuning);
  return a >= inner && a <= outer;
}

LorentzianFit fit_lorentzian(std::span<const double> detunings, std::span<const double> signal,
                             const DetuningWindow& window, const std::optional<LorentzianFit>& init,
                             const FitOptions& options) {
  if (detunings.size() != signal.size()) throw std::invalid_argument("fit data lengths differ");
  std::vector<Sample> data;
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    if (window.contains(detunings[i])) data.push_back({detunings[i], signal[i]});
  }
  if (data.size() < 8) throw std::invalid_argument("fit window holds fewer than 8 points");

  const LorentzianFit start = init ? *init : initial_guess(data);
  double sx = std::abs(start.fwhm);
  if (!(sx > 0.0)) sx = data.back().x - data.front().x;
  double sy = 0.0;
  for (const auto& q : data) sy = std::max(sy, std::abs(q.y));
  if (!(sy > 0.0)) sy = 1.0;

  std::vector<Sample> scaled(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) scaled[i] = {data[i].x / sx, data[i].y / sy};

  Vec4 p(start.amplitude / sy, start.center / sx, std::abs(start.fwhm) / sx, start.offset / sy);
  if (!(p[2] > 0.0)) p[2] = 1.0;
  const double min_width = std::max(options.min_fwhm, 0.0) / sx;
  if (p[2] <= min_width) p[2] = 1.0001 * min_width;
  // Amplitude and offset enter linearly: start from their least-squares values
  // at the initial center and width, which keeps the first steps out of the
  // flat zero-amplitude valley.
  {
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    Eigen::Vector2d r = Eigen::Vector2d::Zero();
    for (const auto& q : scaled) {
      const double hw = 0.5 * p[2];
      const double u = q.x - p[1];
      const double shape = hw * hw / (u * u + hw * hw);
      const double target = options.fix_offset ? q.y - p[3] : q.y;
      m(0, 0) += shape * shape;
      m(0, 1) += shape;
      m(1, 1) += 1.0;
      r[0] += shape * target;
      r[1] += target;
    }
    if (options.fix_offset) {
      if (m(0, 0) > 0.0) p[0] = r[0] / m(0, 0);
    } else {
      m(1, 0) = m(0, 1);
      const Eigen::Vector2d sol = m.ldlt().solve(r);
      if (sol.allFinite()) {
        p[0] = sol[0];
        p[3] = sol[1];
      }
    }
  }
  double cost = sum_sq(scaled, p);
  double lambda = 1e-3;
  LorentzianFit out;
  int it = 0;
  bool converged = false;
  Eigen::RowVector4d row;
  for (; it < options.max_iterations && !converged; ++it) {
    Mat4 jtj = Mat4::Zero();
    Vec4 jtr = Vec4::Zero();
    for (const auto& q : scaled) {
      jacobian_row(p, q.x, row);
      if (options.fix_center) row[1] = 0.0;
      if (options.fix_offset) row[3] = 0.0;
      const double r = q.y - model(p, q.x);
      jtj.noalias() += row.transpose() * row;
      jtr.noalias() += row.transpose() * r;
    }
    if (options.fix_center) jtj(1, 1) = 1.0;
    if (options.fix_offset) jtj(3, 3) = 1.0;
    bool accepted = false;
    // Raise the damping until a step lowers the cost.
    for (int tries = 0; tries < 40; ++tries) {
      Mat4 a = jtj;
      for (int k = 0; k < 4; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      const Vec4 step = a.ldlt().solve(jtr);
      Vec4 trial = p + step;
      if (options.fix_center) trial[1] = p[1];
      if (options.fix_offset) trial[3] = p[3];
      if (!(trial[2] > min_width) || !step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const double trial_cost = sum_sq(scaled, trial);
      if (trial_cost <= cost) {
        const double change = step.norm() / (p.norm() + 1e-12);
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        converged = change < options.tolerance;
        break;
      }
      lambda *= 10.0;
    }
    // No descent direction left: the current point is a minimum to working precision.
    if (!accepted) converged = true;
  }

  out.amplitude = p[0] * sy;
  out.center = p[1] * sx;
  out.fwhm = p[2] * sx;
  out.offset = p[3] * sy;
  out.converged = converged;
  out.iterations = it;
  double ss = 0.0;
  for (const auto& q : data) {
    const double e = q.y - out(q.x);
    ss += e * e;
  }
  out.rms_residual = std::sqrt(ss / static_cast<double>(data.size()));
  return out;
}

LorentzianFit fit_lorentzian(const Lineshape& shape, const DetuningWindow& window,
                             const std::optional<LorentzianFit>& init, const FitOptions& options) {
  const auto sig = contrast(shape);
  return fit_lorentzian(shape.detunings, sig, window, init, options);
}

double fwhm_numeric(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("fwhm needs matching data");
  std::size_t c = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (std::abs(x[i]) < std::abs(x[c])) c = i;
  }
  const double peak = y[c];
  if (!(peak > 0.0)) throw std::runtime_error("signal at zero detuning is not positive");
  const double half = 0.5 * peak;
  std::size_t hi = c;
  while (hi + 1 < x.size() && y[hi + 1] >= half) ++hi;
  std::size_t lo = c;
  while (lo > 0 && y[lo - 1] >= half) --lo;
  if (hi + 1 == x.size() || lo == 0) throw std::runtime_error("signal does not fall to half maximum on the grid");
  return crossing(x, y, hi, hi + 1, half) - crossing(x, y, lo, lo - 1, half);
}

double fwhm_numeric(const Lineshape& shape) {
  const auto sig = contrast(shape);
  return fwhm_numeric(shape.detunings, sig);
}

PeakMetrics peak_metrics(const Lineshape& shape, const Geometry& geom, const PhysicalParams& params) {
  PeakMetrics m;
  const auto sig = contrast(shape);
  const std::size_t c = shape.center_index();
  m.amplitude = sig[c];
  m.preliminary_fwhm = fwhm_numeric(shape.detunings, sig);

  DetuningWindow wings;
  wings.inner = 2.0 * m.preliminary_fwhm;
  LorentzianFit init;
  init.amplitude = m.amplitude;
  init.center = 0.0;
  init.fwhm = m.preliminary_fwhm;
  init.offset = 0.0;
  FitOptions opts;
  opts.fix_center = true;
  opts.fix_offset = true;
  opts.min_fwhm = m.preliminary_fwhm;
  m.wing_fit = fit_lorentzian(shape.detunings, sig, wings, init, opts);

  std::vector<double> rest(sig.size());
  for (std::size_t i = 0; i < sig.size(); ++i) rest[i] = sig[i] - m.wing_fit(shape.detunings[i]);
  m.peak_excess = rest[c];
  m.central_from_remainder = m.peak_excess > 0.01 * std::abs(m.amplitude);
  m.central_fwhm = m.central_from_remainder ? fwhm_numeric(shape.detunings, rest) : std::abs(m.wing_fit.fwhm);
  m.lowest_mode_fwhm_hz = lowest_mode_fwhm(geom, params);
  m.narrowing_factor = m.lowest_mode_fwhm_hz / (m.central_fwhm / (2.0 * std::numbers::pi));
  return m;
}

double fringe_spacing(const Lineshape& shape, double near_detuning) {
  const auto sig = contrast(shape);
  const auto& x = shape.detunings;
  // Local maxima refined by a parabola through the three surrounding points.
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < sig.size(); ++i) {
    if (sig[i] > sig[i - 1] && sig[i] >= sig[i + 1]) {
      const double den = sig[i - 1] - 2.0 * sig[i] + sig[i + 1];
      const double shift = den != 0.0 ? 0.5 * (sig[i - 1] - sig[i + 1]) / den : 0.0;
      peaks.push_back(x[i] + shift * (x[i + 1] - x[i]));
    }
  }
  if (peaks.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  std::size_t best = 0;
  for (std::size_t i = 1; i + 1 < peaks.size(); ++i) {
    const double mid = 0.5 * (peaks[i] + peaks[i + 1]);
    if (std::abs(mid - near_detuning) < std::abs(0.5 * (peaks[best] + peaks[best + 1]) - near_detuning)) best = i;
  }
  return peaks[best + 1] - peaks[best];
}

}  // namespace drn
