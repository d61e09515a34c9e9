#pragma once

// Reference formulas written out independently of the library, used to check
// it. Nothing here calls into drn.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

// Weak-probe transmission for one return: equal passes t_in around a dark
// interval t_out. Every symbol is spelled out as in the closed form,
//   T = T0 + k|W|^2 eta / (D^2 + G^2) * ( -G + sqrt(D^2 + G^2) * {
//         e^{-G ti} cos(D ti + phi)
//       - e^{-G ti - G0 to} cos(D (to + ti) + phi)
//       + e^{-2 G ti - G0 to} cos(D (2 ti + to) + phi) } )
// with G = G0 + |W|^2 / (2 gamma), k = (3 pi / 16) n lambda^2 L / gamma^2 and
// tan(phi) = D / G.
struct SingleReturnInputs {
  double density, wavelength, cell_length;
  double gamma, eta, gamma0, omega_d_sq, t0;
  double t_in, t_out;
};

inline double single_return_transmission(const SingleReturnInputs& in, double detuning) {
  const double pi = std::numbers::pi;
  const double kappa = 3.0 * pi / 16.0 * in.density * in.wavelength * in.wavelength * in.cell_length /
                       (in.gamma * in.gamma);
  const double big_gamma = in.gamma0 + in.omega_d_sq / (2.0 * in.gamma);
  const double phi = std::atan(detuning / big_gamma);
  const double d = detuning;
  const double ti = in.t_in;
  const double to = in.t_out;
  const double braces = std::exp(-big_gamma * ti) * std::cos(d * ti + phi) -
                        std::exp(-big_gamma * ti - in.gamma0 * to) * std::cos(d * (to + ti) + phi) +
                        std::exp(-2.0 * big_gamma * ti - in.gamma0 * to) * std::cos(d * (2.0 * ti + to) + phi);
  return in.t0 + kappa * in.omega_d_sq * in.eta / (d * d + big_gamma * big_gamma) *
                     (-big_gamma + std::sqrt(d * d + big_gamma * big_gamma) * braces);
}

// The single-pass term alone (no returns).
inline double single_pass_transmission(const SingleReturnInputs& in, double detuning) {
  const double pi = std::numbers::pi;
  const double kappa = 3.0 * pi / 16.0 * in.density * in.wavelength * in.wavelength * in.cell_length /
                       (in.gamma * in.gamma);
  const double big_gamma = in.gamma0 + in.omega_d_sq / (2.0 * in.gamma);
  const double phi = std::atan(detuning / big_gamma);
  const double d = detuning;
  return in.t0 + kappa * in.omega_d_sq * in.eta / (d * d + big_gamma * big_gamma) *
                     (-big_gamma + std::sqrt(d * d + big_gamma * big_gamma) * std::exp(-big_gamma * in.t_in) *
                                       std::cos(d * in.t_in + phi));
}

// Zeros of J0 by Newton iteration on the series/asymptotic J0, J1 from the
// C library (POSIX j0/j1), started from McMahon's estimate.
inline double j0_zero(std::size_t k) {
  const double pi = std::numbers::pi;
  const double beta = (static_cast<double>(k) - 0.25) * pi;
  double x = beta + 1.0 / (8.0 * beta) - 124.0 / (3.0 * std::pow(8.0 * beta, 3));
  for (int i = 0; i < 50; ++i) {
    const double step = ::j0(x) / -::j1(x);
    x -= step;
    if (std::abs(step) < 1e-15 * x) break;
  }
  return x;
}

// Single pass averaged over the first-exit time of a uniformly illuminated
// disk. Each radial mode contributes a Lorentzian of half-width
// Gamma + mu_k^2 D / a^2 with weight 4 / mu_k^2:
//   T - T0 = -P sum_k w_k H_k / (H_k^2 + Delta^2).
// Modes beyond `modes` are summed in the continuum limit mu ~ (k - 1/4) pi.
inline double single_pass_mixture(double prefactor, double width, double diffusion, double radius,
                                  double detuning, std::size_t modes = 2000) {
  const double pi = std::numbers::pi;
  const double rate = diffusion / (radius * radius);
  double sum = 0.0;
  for (std::size_t k = 1; k <= modes; ++k) {
    const double mu = j0_zero(k);
    const double h = width + mu * mu * rate;
    sum += 4.0 / (mu * mu) * h / (h * h + detuning * detuning);
  }
  // Tail: integral over k of the same summand with mu = (k - 1/4) pi.
  const double k0 = static_cast<double>(modes) + 0.5;
  const int pieces = 4000;
  const double u_end = 1.0 / k0;  // substitute u = 1/k
  for (int i = 0; i < pieces; ++i) {
    const double u = u_end * (i + 0.5) / pieces;
    const double kk = 1.0 / u;
    const double mu = (kk - 0.25) * pi;
    const double h = width + mu * mu * rate;
    sum += 4.0 / (mu * mu) * h / (h * h + detuning * detuning) * kk * kk * (u_end / pieces);
  }
  return -prefactor * sum;
}

// Mean first-exit time from a disk of radius a with a uniform start.
inline double mean_exit_time(double radius, double diffusion) { return radius * radius / (8.0 * diffusion); }

// Probability that planar Brownian motion started at r0 in the annulus
// a < r < R hits r = a before r = R.
inline double annulus_return_probability(double r0, double inner, double outer) {
  return std::log(outer / r0) / std::log(outer / inner);
}

// Adjacent-fringe spacing of a Ramsey pattern with total period t_in + t_out.
inline double fringe_spacing(double t_in, double t_out) { return 2.0 * std::numbers::pi / (t_in + t_out); }

}  // namespace oracle
