#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "drn/diffusion.hpp"
#include "drn/model.hpp"
#include "drn/walks.hpp"

namespace drn {

struct EnsembleConfig {
  std::size_t max_returns = 2;
  std::size_t t_in_quadrature_nodes = 64;
  std::size_t t_out_quadrature_nodes = 64;
  // Extra decoherence rate applied only while an atom is in the dark [rad/s].
  double dark_dephasing = 0.0;
  // Sequences are cut so that no in-beam pass starts after this time [s].
  double coherence_horizon = std::numeric_limits<double>::infinity();

  // Throws std::invalid_argument unless node counts >= 2, max_returns <= 4,
  // dark_dephasing >= 0 and coherence_horizon > 0.
  void validate() const;
};

struct SequenceSet {
  std::vector<RamseySequence> sequences;
  // True when built from per-walker (t_in, t_out...) histories; false for the
  // independent-product quadrature.
  bool joint = false;

  double total_weight() const;
  // Total weight of sequences with exactly k returns.
  double class_mass(std::size_t k) const;
  std::size_t max_returns() const;
  // Throws std::invalid_argument unless weights sum to 1 within 1e-9 and
  // every sequence is valid.
  void validate() const;
};

// Quadrature nodes are placed by equal sqrt(mass * width) groups of the bins,
// each at its conditional mean (see ensemble.cpp).
//
// Independent-product quadrature: t_in nodes from `t_in_dist`, dark intervals
// drawn independently from `t_out_dist`. A dark interval returns with
// probability p = 1 - t_out_dist.escape_mass; class k < max_returns has mass
// p^k (1 - p) and the last class collects p^max_returns.
SequenceSet enumerate_sequences(const TimeDistribution& t_in_dist, const TimeDistribution& t_out_dist,
                                const EnsembleConfig& cfg);

// Joint construction from simulated walker histories. Each walker contributes
// weight 1/N: its first-exit time mapped by rank onto the t_in nodes of
// `t_in_dist` (so the marginal is the analytic one), and its first max_returns dark intervals snapped to
// logarithmic t_out nodes. Identical node tuples are merged. Walkers with more
// returns than cfg.max_returns are truncated into the top class.
// Throws if cfg.max_returns exceeds the simulated return depth.
SequenceSet enumerate_sequences(const WalkEnsembleStats& walks, const TimeDistribution& t_in_dist,
                                const EnsembleConfig& cfg);

// Weighted average of sequence lineshapes with Gamma0 + dark_dephasing in the
// dark-interval exponents.
Lineshape ensemble_lineshape(const PhysicalParams& params, const SequenceSet& set,
                             const EnsembleConfig& cfg, std::span<const double> grid);

// Per-class lineshapes normalised within each class (class k = sequences
// with exactly k returns); classes with zero mass are omitted.
struct ClassComponent {
  std::size_t returns = 0;
  double mass = 0.0;
  Lineshape lineshape;
};
std::vector<ClassComponent> class_components(const PhysicalParams& params, const SequenceSet& set,
                                             const EnsembleConfig& cfg, std::span<const double> grid);

// Binning of the diffusion distributions. The exit-time distribution is binned
// finely over its own horizon (0 means 50 tau_D, where the escape mass is
// ~e^-50) because its density diverges as t^-1/2 at small t and the quadrature
// nodes are built from it. The dark-interval histogram spans the walk horizon.
struct DiffusionBinning {
  std::size_t t_in_bins = 4000;
  double t_in_horizon = 0.0;
  std::size_t t_out_bins = 400;
};

// The diffusion inputs of the ensemble: analytic exit-time distribution,
// one Monte Carlo pass, and the resulting dark-interval distribution.
struct DiffusionSample {
  TimeDistribution t_in;
  WalkEnsembleStats walks;
  TimeDistribution t_out;
};

DiffusionSample sample_diffusion(const Geometry& geom, const WalkConfig& walk,
                                 const DiffusionBinning& bins = {});

// Runs the ensemble once per dark-dephasing value on a shared diffusion
// sample. Entry i uses cfg with dark_dephasing = gamma_dark_values[i].
std::vector<Lineshape> gradient_comparison(const PhysicalParams& params, const DiffusionSample& sample,
                                           const EnsembleConfig& cfg, std::span<const double> grid,
                                           std::span<const double> gamma_dark_values);

// Convenience overload that draws the diffusion sample itself.
std::vector<Lineshape> gradient_comparison(const PhysicalParams& params, const Geometry& geom,
                                           const WalkConfig& walk, const EnsembleConfig& cfg,
                                           std::span<const double> grid,
                                           std::span<const double> gamma_dark_values,
                                           const DiffusionBinning& bins = {});

}  // namespace drn
