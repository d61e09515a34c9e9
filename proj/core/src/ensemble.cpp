#include "drn/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "drn/diagnostics.hpp"

namespace drn {
namespace {

struct Node {
  double value = 0.0;
  double mass = 0.0;
};

// Quadrature nodes of a binned distribution restricted to its binned mass and
// normalised to 1. Each occupied bin becomes a node at its midpoint when there
// are few enough of them. Otherwise the bins (uniform density within a bin)
// are split into `count` groups of equal sqrt(mass * width), which puts more
// nodes where the density is high but still resolves the long tail, and each
// group is placed at its conditional mean. `point_mass` (if positive) is an
// extra atom at `point_at`.
std::vector<Node> quadrature_nodes(const TimeDistribution& dist, std::size_t count,
                                   double point_mass = 0.0, double point_at = 0.0) {
  struct Piece {
    double lo, hi, mass, score;
  };
  std::vector<Piece> pieces;
  double width_sum = 0.0;
  for (std::size_t i = 0; i < dist.mass.size(); ++i) {
    if (dist.mass[i] > 0.0) {
      const double w = dist.bin_edges[i + 1] - dist.bin_edges[i];
      pieces.push_back({dist.bin_edges[i], dist.bin_edges[i + 1], dist.mass[i], std::sqrt(dist.mass[i] * w)});
      width_sum += w;
    }
  }
  if (point_mass > 0.0 && !pieces.empty()) {
    const double w = width_sum / static_cast<double>(pieces.size());
    pieces.push_back({point_at, point_at, point_mass, std::sqrt(point_mass * w)});
  }
  double total = 0.0;
  double score_total = 0.0;
  for (const auto& p : pieces) {
    total += p.mass;
    score_total += p.score;
  }
  if (pieces.empty() || !(total > 0.0)) throw std::invalid_argument("distribution has no mass to sample");

  std::vector<Node> nodes;
  if (pieces.size() <= count) {
    for (const auto& p : pieces) nodes.push_back({0.5 * (p.lo + p.hi), p.mass / total});
    return nodes;
  }

  const double target = score_total / static_cast<double>(count);
  double m0 = 0.0;
  double m1 = 0.0;
  double s0 = 0.0;
  for (const auto& p : pieces) {
    double done = 0.0;  // fraction of this piece already assigned
    while (done < 1.0) {
      const bool last_group = nodes.size() + 1 == count;
      const double frac = last_group ? 1.0 - done : std::min(1.0 - done, (target - s0) / p.score);
      const double lo = p.lo + (p.hi - p.lo) * done;
      const double hi = p.lo + (p.hi - p.lo) * (done + frac);
      m0 += p.mass * frac;
      m1 += p.mass * frac * 0.5 * (lo + hi);
      s0 += p.score * frac;
      done += frac;
      if (!last_group && s0 >= target * (1.0 - 1e-12)) {
        nodes.push_back({m1 / m0, m0});
        m0 = 0.0;
        m1 = 0.0;
        s0 = 0.0;
      }
    }
  }
  if (m0 > 0.0) nodes.push_back({m1 / m0, m0});
  for (auto& n : nodes) n.mass /= total;
  return nodes;
}

// Drops returns whose following in-beam pass would start after the horizon.
void apply_coherence_horizon(RamseySequence& seq, double horizon) {
  if (!std::isfinite(horizon)) return;
  double dark = 0.0;
  for (std::size_t k = 0; k < seq.t_outs.size(); ++k) {
    dark += seq.t_outs[k];
    if (static_cast<double>(k + 1) * seq.t_in + dark > horizon) {
      seq.t_outs.resize(k);
      return;
    }
  }
}

// Merges sequences with identical interval lists, keeping first-seen order.
std::vector<RamseySequence> merge_duplicates(std::vector<RamseySequence> seqs) {
  std::map<std::pair<double, std::vector<double>>, std::size_t> index;
  std::vector<RamseySequence> out;
  for (auto& s : seqs) {
    auto key = std::make_pair(s.t_in, s.t_outs);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(std::move(key), out.size());
      out.push_back(std::move(s));
    } else {
      out[it->second].weight += s.weight;
    }
  }
  return out;
}

std::vector<double> log_edges(double lo, double hi, std::size_t count) {
  std::vector<double> edges(count + 1);
  const double ratio = std::log(hi / lo);
  for (std::size_t i = 0; i <= count; ++i) {
    edges[i] = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(count));
  }
  edges.front() = lo;
  edges.back() = hi;
  return edges;
}

Lineshape evaluate_set(const PhysicalParams& params, std::span<const RamseySequence> seqs,
                       double weight_scale, double dark_dephasing, std::span<const double> grid) {
  const double width = power_broadened_width(params);
  std::vector<detail::CosineTerm> terms;
  double total = 0.0;
  for (const auto& s : seqs) {
    const double w = s.weight * weight_scale;
    detail::append_sequence_terms(s, width, params.gamma0 + dark_dephasing, w, terms);
    total += w;
  }
  detail::compact_terms(terms);
  return detail::evaluate_terms(params, terms, total, grid);
}

}  // namespace

void EnsembleConfig::validate() const {
  if (t_in_quadrature_nodes < 2 || t_out_quadrature_nodes < 2) {
    throw std::invalid_argument("quadrature node counts must be at least 2");
  }
  if (max_returns > 4) throw std::invalid_argument("max_returns is limited to 4");
  if (!(std::isfinite(dark_dephasing) && dark_dephasing >= 0.0)) {
    throw std::invalid_argument("dark dephasing rate must be non-negative");
  }
  if (!(coherence_horizon > 0.0)) throw std::invalid_argument("coherence horizon must be positive");
}

double SequenceSet::total_weight() const {
  double s = 0.0;
  for (const auto& q : sequences) s += q.weight;
  return s;
}

double SequenceSet::class_mass(std::size_t k) const {
  double s = 0.0;
  for (const auto& q : sequences) {
    if (q.returns() == k) s += q.weight;
  }
  return s;
}

std::size_t SequenceSet::max_returns() const {
  std::size_t m = 0;
  for (const auto& q : sequences) m = std::max(m, q.returns());
  return m;
}

void SequenceSet::validate() const {
  if (sequences.empty()) throw std::invalid_argument("sequence set is empty");
  for (const auto& q : sequences) q.validate();
  if (std::abs(total_weight() - 1.0) > 1e-9) throw std::invalid_argument("sequence weights do not sum to 1");
}

SequenceSet enumerate_sequences(const TimeDistribution& t_in_dist, const TimeDistribution& t_out_dist,
                                const EnsembleConfig& cfg) {
  cfg.validate();
  t_in_dist.validate();
  t_out_dist.validate();
  const auto in_nodes = quadrature_nodes(t_in_dist, cfg.t_in_quadrature_nodes, t_in_dist.escape_mass,
                                         t_in_dist.bin_edges.back());
  double binned_out = 0.0;
  for (double m : t_out_dist.mass) binned_out += m;
  const double p = std::clamp(1.0 - t_out_dist.escape_mass, 0.0, 1.0);
  std::vector<Node> out_nodes;
  if (p > 0.0 && binned_out > 0.0) out_nodes = quadrature_nodes(t_out_dist, cfg.t_out_quadrature_nodes);

  const std::size_t top = out_nodes.empty() ? 0 : cfg.max_returns;
  std::vector<RamseySequence> seqs;
  for (std::size_t k = 0; k <= top; ++k) {
    const double class_mass = k == top ? std::pow(p, static_cast<double>(k))
                                       : std::pow(p, static_cast<double>(k)) * (1.0 - p);
    if (!(class_mass > 0.0)) continue;
    // Odometer over k-tuples of dark-interval nodes.
    std::vector<std::size_t> idx(k, 0);
    while (true) {
      double tuple_mass = class_mass;
      std::vector<double> outs(k);
      for (std::size_t j = 0; j < k; ++j) {
        outs[j] = out_nodes[idx[j]].value;
        tuple_mass *= out_nodes[idx[j]].mass;
      }
      for (const auto& in : in_nodes) {
        RamseySequence s{in.value, outs, tuple_mass * in.mass};
        apply_coherence_horizon(s, cfg.coherence_horizon);
        seqs.push_back(std::move(s));
      }
      std::size_t j = 0;
      while (j < k && ++idx[j] == out_nodes.size()) idx[j++] = 0;
      if (j == k) break;
    }
  }
  SequenceSet set;
  set.sequences = merge_duplicates(std::move(seqs));
  set.joint = false;
  return set;
}

SequenceSet enumerate_sequences(const WalkEnsembleStats& walks, const TimeDistribution& t_in_dist,
                                const EnsembleConfig& cfg) {
  cfg.validate();
  t_in_dist.validate();
  if (walks.walkers.empty()) throw std::invalid_argument("no walker histories");
  if (cfg.max_returns > walks.max_returns) {
    throw std::invalid_argument("max_returns exceeds the simulated return depth");
  }
  const std::size_t n = walks.walkers.size();
  const auto in_nodes = quadrature_nodes(t_in_dist, cfg.t_in_quadrature_nodes, t_in_dist.escape_mass,
                                         t_in_dist.bin_edges.back());

  // Rank walkers by exit time (never-exited last) and map rank quantiles onto
  // the analytic node masses, keeping the correlation with later dark times.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto exit_key = [&](std::size_t i) {
    const double t = walks.walkers[i].first_exit_time;
    return std::isfinite(t) ? t : std::numeric_limits<double>::infinity();
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return exit_key(a) < exit_key(b); });
  std::vector<std::size_t> in_index(n);
  {
    std::size_t node = 0;
    double cum = in_nodes[0].mass;
    for (std::size_t r = 0; r < n; ++r) {
      const double q = (static_cast<double>(r) + 0.5) / static_cast<double>(n);
      while (q > cum && node + 1 < in_nodes.size()) cum += in_nodes[++node].mass;
      in_index[order[r]] = node;
    }
  }

  // Logarithmic dark-interval bins, each represented by its sample mean.
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& w : walks.walkers) {
    const std::size_t used = std::min(w.dark_times.size(), cfg.max_returns);
    for (std::size_t j = 0; j < used; ++j) {
      lo = std::min(lo, w.dark_times[j]);
      hi = std::max(hi, w.dark_times[j]);
    }
  }
  const bool have_returns = hi > 0.0;
  const std::size_t out_bins = cfg.t_out_quadrature_nodes;
  std::vector<double> edges;
  std::vector<double> bin_sum(out_bins, 0.0);
  std::vector<std::size_t> bin_count(out_bins, 0);
  auto out_bin = [&](double t) -> std::size_t {
    if (!(hi > lo)) return 0;
    const auto it = std::upper_bound(edges.begin(), edges.end(), t);
    const auto b = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - edges.begin() - 1, 0));
    return std::min(b, out_bins - 1);
  };
  if (have_returns) {
    edges = hi > lo ? log_edges(lo, hi, out_bins) : std::vector<double>{lo, hi};
    for (const auto& w : walks.walkers) {
      const std::size_t used = std::min(w.dark_times.size(), cfg.max_returns);
      for (std::size_t j = 0; j < used; ++j) {
        const std::size_t b = out_bin(w.dark_times[j]);
        bin_sum[b] += w.dark_times[j];
        ++bin_count[b];
      }
    }
  }

  // Count walkers per (t_in node, dark-bin tuple).
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, std::size_t> counts;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& w = walks.walkers[i];
    const std::size_t used = std::min(w.dark_times.size(), cfg.max_returns);
    std::vector<std::size_t> bins(used);
    for (std::size_t j = 0; j < used; ++j) bins[j] = out_bin(w.dark_times[j]);
    ++counts[{in_index[i], std::move(bins)}];
  }

  std::vector<RamseySequence> seqs;
  seqs.reserve(counts.size());
  for (const auto& [key, count] : counts) {
    RamseySequence s;
    s.t_in = in_nodes[key.first].value;
    s.weight = static_cast<double>(count) / static_cast<double>(n);
    for (std::size_t b : key.second) s.t_outs.push_back(bin_sum[b] / static_cast<double>(bin_count[b]));
    apply_coherence_horizon(s, cfg.coherence_horizon);
    seqs.push_back(std::move(s));
  }
  SequenceSet set;
  set.sequences = merge_duplicates(std::move(seqs));
  set.joint = true;
  return set;
}

Lineshape ensemble_lineshape(const PhysicalParams& params, const SequenceSet& set,
                             const EnsembleConfig& cfg, std::span<const double> grid) {
  params.validate();
  cfg.validate();
  set.validate();
  return evaluate_set(params, set.sequences, 1.0 / set.total_weight(), cfg.dark_dephasing, grid);
}

std::vector<ClassComponent> class_components(const PhysicalParams& params, const SequenceSet& set,
                                             const EnsembleConfig& cfg, std::span<const double> grid) {
  params.validate();
  cfg.validate();
  set.validate();
  std::vector<ClassComponent> out;
  for (std::size_t k = 0; k <= set.max_returns(); ++k) {
    std::vector<RamseySequence> members;
    for (const auto& s : set.sequences) {
      if (s.returns() == k) members.push_back(s);
    }
    double mass = 0.0;
    for (const auto& s : members) mass += s.weight;
    if (!(mass > 0.0)) continue;
    out.push_back({k, mass, evaluate_set(params, members, 1.0 / mass, cfg.dark_dephasing, grid)});
  }
  return out;
}

DiffusionSample sample_diffusion(const Geometry& geom, const WalkConfig& walk, const DiffusionBinning& bins) {
  if (bins.t_in_bins == 0 || bins.t_out_bins == 0) throw std::invalid_argument("need at least one bin");
  DiffusionSample s;
  const double exit_horizon = bins.t_in_horizon > 0.0 ? bins.t_in_horizon : 50.0 * tau_d(geom);
  const std::size_t n_bins = bins.t_out_bins;
  s.t_in = exit_time_distribution(geom, bins.t_in_bins, exit_horizon);
  s.walks = simulate_walks(geom, walk);
  if (s.walks.dark_intervals > 0) {
    s.t_out = return_time_distribution(s.walks, n_bins, walk.horizon);
  } else {
    warn("no walker left the beam; dark-interval distribution is empty");
    s.t_out.bin_edges.resize(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) {
      s.t_out.bin_edges[i] = walk.horizon * static_cast<double>(i) / static_cast<double>(n_bins);
    }
    s.t_out.mass.assign(n_bins, 0.0);
    s.t_out.escape_mass = 1.0;
    s.t_out.horizon = walk.horizon;
  }
  return s;
}

std::vector<Lineshape> gradient_comparison(const PhysicalParams& params, const DiffusionSample& sample,
                                           const EnsembleConfig& cfg, std::span<const double> grid,
                                           std::span<const double> gamma_dark_values) {
  for (double g : gamma_dark_values) {
    if (!(std::isfinite(g) && g >= 0.0)) throw std::invalid_argument("dark dephasing rates must be non-negative");
  }
  const SequenceSet set = enumerate_sequences(sample.walks, sample.t_in, cfg);
  std::vector<Lineshape> out;
  out.reserve(gamma_dark_values.size());
  for (double g : gamma_dark_values) {
    EnsembleConfig c = cfg;
    c.dark_dephasing = g;
    out.push_back(ensemble_lineshape(params, set, c, grid));
  }
  return out;
}

std::vector<Lineshape> gradient_comparison(const PhysicalParams& params, const Geometry& geom,
                                           const WalkConfig& walk, const EnsembleConfig& cfg,
                                           std::span<const double> grid,
                                           std::span<const double> gamma_dark_values,
                                           const DiffusionBinning& bins) {
  for (double g : gamma_dark_values) {
    if (!(std::isfinite(g) && g >= 0.0)) throw std::invalid_argument("dark dephasing rates must be non-negative");
  }
  return gradient_comparison(params, sample_diffusion(geom, walk, bins), cfg, grid, gamma_dark_values);
}

}  // namespace drn
