#include "drn_cli/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "presets.hpp"

namespace drn::cli {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct KeySpec {
  const char* name;
  const char* fallback;  // nullptr: no default, key stays absent
};

// Order matches schema.txt.
constexpr KeySpec key_table[] = {
    {"density", "6e10"},
    {"wavelength", "7.95e-5"},
    {"cell_length", "5"},
    {"gamma_hz", "15e6"},
    {"eta_hz", "5.75e6"},
    {"gamma0_hz", "50"},
    {"omega_d_sq", nullptr},
    {"power_broadening_hz", nullptr},
    {"t0", "0.5"},
    {"beam_radius", "0.075"},
    {"cell_radius", "1.25"},
    {"diffusion_coefficient", "50"},
    {"walkers", "100000"},
    {"time_step_tau", "0.0025"},
    {"horizon_tau", "50"},
    {"min_dark_tau", "1"},
    {"max_returns", "2"},
    {"route", "joint"},
    {"t_in_nodes", "64"},
    {"t_out_nodes", "64"},
    {"t_in_bins", "4000"},
    {"t_in_horizon_tau", "50"},
    {"t_out_bins", "400"},
    {"dark_dephasing_hz", "0"},
    {"coherence_horizon_tau", nullptr},
    {"grid_points", "2001"},
    {"grid_span", "20"},
    {"seed", nullptr},
    {"gamma_dark_hz", nullptr},
    {"sequence_t_in_tau", nullptr},
    {"sequence_t_out_tau", nullptr},
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

// KeyValueConfig getters throw runtime_error; rewrap so the CLI can tell
// configuration problems from numerical ones.
double number(const KeyValueConfig& kv, const std::string& key) {
  try {
    const double v = kv.get_double(key);
    if (!std::isfinite(v)) throw config_error("config key '" + key + "' must be finite");
    return v;
  } catch (const config_error&) {
    throw;
  } catch (const std::exception& e) {
    throw config_error(e.what());
  }
}

double positive(const KeyValueConfig& kv, const std::string& key) {
  const double v = number(kv, key);
  if (!(v > 0.0)) throw config_error("config key '" + key + "' must be positive");
  return v;
}

double non_negative(const KeyValueConfig& kv, const std::string& key) {
  const double v = number(kv, key);
  if (!(v >= 0.0)) throw config_error("config key '" + key + "' must be non-negative");
  return v;
}

std::uint64_t integer(const KeyValueConfig& kv, const std::string& key) {
  try {
    return kv.get_uint(key);
  } catch (const std::exception& e) {
    throw config_error(e.what());
  }
}

template <class F>
void checked(const char* stage, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string(stage) + ": " + e.what());
  }
}

}  // namespace

std::vector<double> parse_list(std::string_view text, const std::string& what) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    const std::string item(trim(text.substr(0, comma)));
    if (item.empty()) throw config_error("empty entry in list for " + what);
    KeyValueConfig one;
    one.set(what, item);
    out.push_back(number(one, what));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& s : key_table) k.emplace_back(s.name);
    return k;
  }();
  return keys;
}

RunConfig build_run_config(const KeyValueConfig& entries) {
  for (const auto& [key, value] : entries.entries()) {
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
      throw config_error("unknown config key '" + key + "'");
    }
  }

  KeyValueConfig kv;
  for (const auto& s : key_table) {
    if (entries.has(s.name)) {
      kv.set(s.name, entries.get(s.name));
    } else if (s.fallback) {
      kv.set(s.name, s.fallback);
    }
  }

  RunConfig rc;
  auto& p = rc.physical;
  p.density = positive(kv, "density");
  p.wavelength = positive(kv, "wavelength");
  p.cell_length = positive(kv, "cell_length");
  p.gamma = two_pi * positive(kv, "gamma_hz");
  p.eta = two_pi * positive(kv, "eta_hz");
  p.gamma0 = two_pi * positive(kv, "gamma0_hz");
  p.t0 = positive(kv, "t0");
  if (kv.has("omega_d_sq") && kv.has("power_broadening_hz")) {
    throw config_error("give either omega_d_sq or power_broadening_hz, not both");
  }
  if (kv.has("omega_d_sq")) p.omega_d_sq = non_negative(kv, "omega_d_sq");
  // |Omega_d|^2 / (2 gamma) = 2 pi * power_broadening_hz
  if (kv.has("power_broadening_hz")) p.omega_d_sq = 2.0 * p.gamma * two_pi * non_negative(kv, "power_broadening_hz");
  checked("physical parameters", [&] { p.validate(); });

  auto& g = rc.geometry;
  g.beam_radius = positive(kv, "beam_radius");
  g.cell_radius = positive(kv, "cell_radius");
  g.diffusion_coefficient = positive(kv, "diffusion_coefficient");
  checked("geometry", [&] { g.validate(); });
  const double tau = tau_d(g);

  auto& e = rc.ensemble;
  e.max_returns = integer(kv, "max_returns");
  e.t_in_quadrature_nodes = integer(kv, "t_in_nodes");
  e.t_out_quadrature_nodes = integer(kv, "t_out_nodes");
  e.dark_dephasing = two_pi * non_negative(kv, "dark_dephasing_hz");
  if (kv.has("coherence_horizon_tau")) e.coherence_horizon = tau * positive(kv, "coherence_horizon_tau");
  checked("ensemble", [&] { e.validate(); });

  const std::string& route = kv.get("route");
  if (route == "joint") {
    rc.route = Route::joint;
  } else if (route == "product") {
    rc.route = Route::product;
  } else {
    throw config_error("route must be 'joint' or 'product'");
  }

  if (kv.has("seed")) rc.seed = integer(kv, "seed");
  auto& w = rc.walk;
  w = default_walk_config(g, rc.seed.value_or(0));
  w.n_walkers = integer(kv, "walkers");
  if (w.n_walkers == 0) throw config_error("walkers must be at least 1");
  w.time_step = tau * positive(kv, "time_step_tau");
  if (std::sqrt(2.0 * g.diffusion_coefficient * w.time_step) >= g.beam_radius / 20.0) {
    throw config_error("time_step_tau too large: the step length must stay below a twentieth of the beam radius");
  }
  w.horizon = tau * positive(kv, "horizon_tau");
  w.min_dark_time = tau * non_negative(kv, "min_dark_tau");
  w.max_returns = std::max<std::size_t>(1, e.max_returns);

  rc.binning.t_in_bins = integer(kv, "t_in_bins");
  rc.binning.t_in_horizon = tau * positive(kv, "t_in_horizon_tau");
  rc.binning.t_out_bins = integer(kv, "t_out_bins");
  if (rc.binning.t_in_bins == 0 || rc.binning.t_out_bins == 0) throw config_error("bin counts must be positive");

  rc.grid.points = integer(kv, "grid_points");
  if (rc.grid.points < 3 || rc.grid.points % 2 == 0) throw config_error("grid_points must be odd and at least 3");
  rc.grid.span = positive(kv, "grid_span");

  if (kv.has("gamma_dark_hz")) {
    for (double v : parse_list(kv.get("gamma_dark_hz"), "gamma_dark_hz")) {
      if (!(v >= 0.0)) throw config_error("gamma_dark_hz values must be non-negative");
      rc.gamma_dark_hz.push_back(v);
      rc.gamma_dark.push_back(two_pi * v);
    }
  }

  if (kv.has("sequence_t_in_tau") != kv.has("sequence_t_out_tau")) {
    throw config_error("sequence_t_in_tau and sequence_t_out_tau go together");
  }
  if (kv.has("sequence_t_in_tau")) {
    RamseySequence seq;
    seq.t_in = tau * positive(kv, "sequence_t_in_tau");
    for (double v : parse_list(kv.get("sequence_t_out_tau"), "sequence_t_out_tau")) {
      if (!(v > 0.0)) throw config_error("sequence_t_out_tau values must be positive");
      seq.t_outs.push_back(tau * v);
    }
    checked("sequence", [&] { seq.validate(); });
    rc.sequence = seq;
  }

  kv.erase("gamma_dark_hz");
  rc.resolved = std::move(kv);
  return rc;
}

std::string RunConfig::hash() const { return hex_hash(fnv1a(resolved.canonical())); }

std::vector<double> RunConfig::detuning_grid() const {
  const double half = grid.span * (power_broadened_width(physical) + 1.0 / tau());
  return symmetric_grid(half, grid.points);
}

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw config_error("a seed is required for Monte Carlo stages (set 'seed' or pass --seed)");
  return *seed;
}

RunConfig load_run_config(const ConfigSources& sources) {
  auto parse = [](std::string_view text, const std::string& origin) {
    try {
      return KeyValueConfig::parse(text);
    } catch (const std::exception& e) {
      throw config_error(origin + ": " + e.what());
    }
  };
  KeyValueConfig kv;
  if (!sources.preset.empty()) kv = parse(preset_text(sources.preset), "preset " + sources.preset);
  if (!sources.config_path.empty()) {
    std::ifstream in(sources.config_path, std::ios::binary);
    if (!in) throw config_error("cannot read config file " + sources.config_path);
    std::ostringstream text;
    text << in.rdbuf();
    kv.merge(parse(text.str(), sources.config_path));
  }
  for (const auto& [k, v] : sources.overrides) kv.set(k, v);
  RunConfig rc = build_run_config(kv);
  rc.preset = sources.preset;
  return rc;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : embedded::presets) names.emplace_back(p.name);
  return names;
}

std::string_view preset_text(std::string_view name) {
  for (const auto& p : embedded::presets) {
    if (p.name == name) return p.text;
  }
  throw config_error("unknown preset '" + std::string(name) + "'");
}

std::string_view schema_text() { return embedded::schema; }

}  // namespace drn::cli
