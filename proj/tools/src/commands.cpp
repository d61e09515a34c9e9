#include "drn_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "drn/diagnostics.hpp"
#include "drn/io.hpp"
#include "drn/version.hpp"

namespace drn::cli {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const config_error&) {
    throw;
  } catch (const stage_error&) {
    throw;
  } catch (const std::exception& e) {
    throw stage_error(name, e.what());
  }
}

class Report {
 public:
  explicit Report(const CsvHeader& header) {
    for (const auto& [k, v] : header) out_ << "# " << k << ": " << v << '\n';
  }
  void text(const std::string& key, const std::string& value) { out_ << key << ": " << value << '\n'; }
  void number(const std::string& key, double value) { text(key, format_double(value)); }
  void flag(const std::string& key, bool value) { text(key, value ? "true" : "false"); }
  void raw(const std::string& line) { out_ << line << '\n'; }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

struct Prepared {
  DiffusionSample sample;
  SequenceSet set;
  std::vector<double> grid;
};

DiffusionSample draw_diffusion(const RunConfig& rc) {
  WalkConfig walk = rc.walk;
  walk.seed = rc.require_seed();
  return stage("diffusion", [&] { return sample_diffusion(rc.geometry, walk, rc.binning); });
}

Prepared prepare(const RunConfig& rc) {
  Prepared p;
  p.sample = draw_diffusion(rc);
  p.set = stage("ensemble", [&] {
    return rc.route == Route::joint ? enumerate_sequences(p.sample.walks, p.sample.t_in, rc.ensemble)
                                    : enumerate_sequences(p.sample.t_in, p.sample.t_out, rc.ensemble);
  });
  p.grid = stage("grid", [&] { return rc.detuning_grid(); });
  return p;
}

FitSummary analyse(const Lineshape& shape, const RunConfig* rc) {
  FitSummary s;
  s.fit = stage("fit", [&] { return fit_lorentzian(shape); });
  try {
    s.fwhm_numeric = fwhm_numeric(shape);
  } catch (const std::runtime_error& e) {
    s.notes.push_back(std::string("fwhm_numeric unavailable: ") + e.what());
  }
  if (rc) {
    try {
      s.metrics = peak_metrics(shape, rc->geometry, rc->physical);
    } catch (const std::runtime_error& e) {
      s.notes.push_back(std::string("peak metrics unavailable: ") + e.what());
    }
  } else {
    s.notes.push_back("peak metrics unavailable: no configuration in the input header");
  }
  return s;
}

void write_summary(Report& r, const FitSummary& s) {
  const auto& f = s.fit;
  r.number("lorentzian.amplitude", f.amplitude);
  r.number("lorentzian.center_hz", f.center / two_pi);
  r.number("lorentzian.fwhm_hz", f.fwhm / two_pi);
  r.number("lorentzian.offset", f.offset);
  r.number("lorentzian.rms_residual", f.rms_residual);
  r.number("lorentzian.rms_over_amplitude", f.amplitude != 0.0 ? f.rms_residual / std::abs(f.amplitude) : 0.0);
  r.flag("lorentzian.converged", f.converged);
  r.number("lorentzian.iterations", f.iterations);
  if (s.fwhm_numeric) {
    r.number("fwhm_numeric_hz", *s.fwhm_numeric / two_pi);
    r.raw("# fwhm_numeric is the direct half-maximum width of the contrast, read off the grid; no fit involved");
  }
  if (s.metrics) {
    const auto& m = *s.metrics;
    r.number("peak.amplitude", m.amplitude);
    r.number("peak.preliminary_fwhm_hz", m.preliminary_fwhm / two_pi);
    r.number("peak.wing_fit_fwhm_hz", m.wing_fit.fwhm / two_pi);
    r.number("peak.wing_fit_amplitude", m.wing_fit.amplitude);
    r.flag("peak.wing_fit_converged", m.wing_fit.converged);
    r.number("peak.peak_excess", m.peak_excess);
    r.number("peak.peak_excess_over_amplitude", m.amplitude != 0.0 ? m.peak_excess / m.amplitude : 0.0);
    r.number("peak.central_fwhm_hz", m.central_fwhm / two_pi);
    r.flag("peak.central_from_remainder", m.central_from_remainder);
    r.number("lowest_mode_fwhm_hz", m.lowest_mode_fwhm_hz);
    r.number("narrowing_factor", m.narrowing_factor);
  }
  for (const auto& n : s.notes) r.text("note", n);
}

void write_validity(Report& r, const RunConfig& rc, double max_detuning) {
  const auto v = validity_report(rc.physical, max_detuning);
  r.number("validity.gamma_over_detuning", v.gamma_over_detuning);
  r.number("validity.gamma_over_width", v.gamma_over_width);
  r.number("validity.product_over_detuning_sq", v.product_over_detuning_sq);
  r.flag("validity.all_ok", v.all_ok());
}

std::string csv(const Lineshape& shape, const CsvHeader& header) {
  std::ostringstream os;
  write_lineshape_csv(os, shape, header);
  return os.str();
}

RunConfig with_dark_dephasing(const RunConfig& rc, double hz) {
  KeyValueConfig kv = rc.resolved;
  if (kv.get_double("dark_dephasing_hz") != hz) kv.set("dark_dephasing_hz", format_double(hz));
  RunConfig out = build_run_config(kv);
  out.output_dir = rc.output_dir;
  out.preset = rc.preset;
  return out;
}

}  // namespace

void write_outputs(const std::filesystem::path& dir, const OutputFiles& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw stage_error("output", "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& [name, content] : files) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) throw stage_error("output", "cannot write " + path.string());
  }
}

CsvHeader output_header(const RunConfig& rc) {
  CsvHeader h;
  h.emplace_back("version", version_string);
  h.emplace_back("config_hash", rc.hash());
  h.emplace_back("seed", rc.seed ? std::to_string(*rc.seed) : "none");
  const std::map<std::string, std::string> sorted(rc.resolved.entries().begin(), rc.resolved.entries().end());
  for (const auto& [k, v] : sorted) {
    if (k != "seed") h.emplace_back("config." + k, v);
  }
  return h;
}

std::string gradient_file_name(double gamma_dark_hz) {
  return "lineshape_gdark_" + format_double(gamma_dark_hz) + ".csv";
}

LineshapeRun cmd_lineshape(const RunConfig& rc) {
  const Prepared p = prepare(rc);
  LineshapeRun run;
  run.return_probability = p.sample.walks.return_probability;
  run.shape = stage("lineshape", [&] { return ensemble_lineshape(rc.physical, p.set, rc.ensemble, p.grid); });
  run.components = stage("components", [&] { return class_components(rc.physical, p.set, rc.ensemble, p.grid); });
  if (rc.sequence) {
    run.sequence = stage("sequence", [&] {
      return sequence_lineshape(rc.physical, *rc.sequence, p.grid, rc.ensemble.dark_dephasing);
    });
  }
  run.summary = analyse(run.shape, &rc);

  const CsvHeader header = output_header(rc);
  run.files.emplace_back("lineshape.csv", csv(run.shape, header));

  CsvHeader comp_header = header;
  std::vector<std::pair<std::string, std::vector<double>>> columns;
  columns.emplace_back("ensemble", run.shape.values);
  for (const auto& c : run.components) {
    comp_header.emplace_back("class_mass." + std::to_string(c.returns), format_double(c.mass));
    columns.emplace_back("returns_" + std::to_string(c.returns), c.lineshape.values);
  }
  comp_header.emplace_back("background", format_double(run.shape.background));
  std::ostringstream comp;
  write_lineshape_table(comp, p.grid, columns, comp_header);
  run.files.emplace_back("components.csv", comp.str());

  if (run.sequence) {
    CsvHeader seq_header = header;
    seq_header.emplace_back("sequence.t_in_s", format_double(rc.sequence->t_in));
    std::string outs;
    for (double t : rc.sequence->t_outs) outs += (outs.empty() ? "" : ", ") + format_double(t);
    seq_header.emplace_back("sequence.t_out_s", outs);
    run.files.emplace_back("sequence.csv", csv(*run.sequence, seq_header));
  }

  Report r(header);
  write_summary(r, run.summary);
  for (const auto& c : run.components) r.number("class_mass." + std::to_string(c.returns), c.mass);
  r.number("sequences", static_cast<double>(p.set.sequences.size()));
  r.number("tau_d_s", rc.tau());
  r.number("return_probability", run.return_probability);
  write_validity(r, rc, p.grid.back());
  run.files.emplace_back("fit_report.txt", r.str());
  return run;
}

DistributionsRun cmd_distributions(const RunConfig& rc) {
  const DiffusionSample s = draw_diffusion(rc);
  DistributionsRun run;
  run.t_in = s.t_in;
  run.t_out = s.t_out;
  run.ks_statistic = stage("comparison", [&] {
    const ExitSeries series(rc.geometry);
    return ks_statistic(s.walks.exit_times(), [&](double t) { return 1.0 - series.survival(t); });
  });
  run.mc_mean_exit_time = s.walks.mean_exit_time;
  run.oracle_mean_exit_time = mean_exit_time(rc.geometry);
  run.return_probability = s.walks.return_probability;

  const CsvHeader header = output_header(rc);
  const double tau = rc.tau();
  {
    CsvHeader h = header;
    h.emplace_back("distribution", "first exit time from the beam, eigenmode series");
    std::ostringstream os;
    write_distribution_csv(os, run.t_in, tau, h);
    run.files.emplace_back("t_in.csv", os.str());
  }
  {
    CsvHeader h = header;
    h.emplace_back("distribution", "dark interval before re-entry, Monte Carlo");
    std::ostringstream os;
    write_distribution_csv(os, run.t_out, tau, h);
    run.files.emplace_back("t_out.csv", os.str());
  }

  Report r(header);
  r.number("tau_d_s", tau);
  r.number("walkers", static_cast<double>(s.walks.n_walkers));
  r.number("ks_statistic", run.ks_statistic);
  r.number("ks_threshold", 0.01);
  r.flag("ks_pass", run.ks_statistic < 0.01);
  r.number("mc_mean_exit_time_s", run.mc_mean_exit_time);
  r.number("oracle_mean_exit_time_s", run.oracle_mean_exit_time);
  r.number("mean_exit_time_relative_error",
           std::abs(run.mc_mean_exit_time - run.oracle_mean_exit_time) / run.oracle_mean_exit_time);
  r.number("return_probability", run.return_probability);
  r.number("dark_intervals", static_cast<double>(s.walks.dark_intervals));
  r.number("returns", static_cast<double>(s.walks.returns));
  r.number("t_in_total_mass", run.t_in.total());
  r.number("t_out_total_mass", run.t_out.total());
  run.files.emplace_back("comparison.txt", r.str());
  return run;
}

GradientRun cmd_gradient(const RunConfig& rc) {
  if (rc.gamma_dark.empty()) throw config_error("gradient needs gamma_dark_hz values");
  const Prepared p = prepare(rc);
  GradientRun run;
  const double gamma = power_broadened_width(rc.physical);
  const double wing_edge = 5.0 * gamma;

  for (double hz : rc.gamma_dark_hz) {
    const RunConfig sub = with_dark_dephasing(rc, hz);
    GradientRow row;
    row.gamma_dark_hz = hz;
    row.shape = stage("lineshape", [&] { return ensemble_lineshape(sub.physical, p.set, sub.ensemble, p.grid); });
    row.metrics = stage("peak metrics", [&] { return peak_metrics(row.shape, sub.geometry, sub.physical); });
    run.files.emplace_back(gradient_file_name(hz), csv(row.shape, output_header(sub)));
    run.rows.push_back(std::move(row));
  }

  const auto& first = run.rows.front();
  double wing_scale = 0.0;
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    if (std::abs(p.grid[i]) > wing_edge) {
      wing_scale = std::max(wing_scale, std::abs(first.shape.values[i] - first.shape.background));
    }
  }
  run.monotone = true;
  for (std::size_t j = 0; j < run.rows.size(); ++j) {
    auto& row = run.rows[j];
    row.suppression = row.metrics.peak_excess > 0.0 ? first.metrics.peak_excess / row.metrics.peak_excess
                                                    : std::numeric_limits<double>::infinity();
    double change = 0.0;
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
      if (std::abs(p.grid[i]) > wing_edge) {
        change = std::max(change, std::abs(row.shape.values[i] - first.shape.values[i]));
      }
    }
    row.wing_change = wing_scale > 0.0 ? change / wing_scale : 0.0;
    if (j > 0 && row.metrics.peak_excess > run.rows[j - 1].metrics.peak_excess) run.monotone = false;
  }

  Report r(output_header(rc));
  r.text("gamma_dark_hz", [&] {
    std::string s;
    for (double hz : rc.gamma_dark_hz) s += (s.empty() ? "" : ", ") + format_double(hz);
    return s;
  }());
  r.number("wing_region_min_detuning_hz", wing_edge / two_pi);
  r.flag("peak_excess_non_increasing", run.monotone);
  r.raw("gamma_dark_hz,peak_excess,peak_excess_over_amplitude,suppression,wing_change,central_fwhm_hz");
  for (const auto& row : run.rows) {
    const auto& m = row.metrics;
    r.raw(format_double(row.gamma_dark_hz) + ',' + format_double(m.peak_excess) + ',' +
          format_double(m.amplitude != 0.0 ? m.peak_excess / m.amplitude : 0.0) + ',' +
          format_double(row.suppression) + ',' + format_double(row.wing_change) + ',' +
          format_double(m.central_fwhm / two_pi));
  }
  run.files.emplace_back("suppression_report.txt", r.str());
  return run;
}

FitRun cmd_fit(const std::string& csv_text) {
  std::istringstream in(csv_text);
  const LineshapeFile file = stage("input", [&] { return read_lineshape_csv(in); });

  KeyValueConfig kv;
  for (const auto& [k, v] : file.header) {
    if (k.rfind("config.", 0) == 0) kv.set(k.substr(7), v);
  }
  if (auto it = file.header.find("seed"); it != file.header.end() && it->second != "none") kv.set("seed", it->second);

  std::optional<RunConfig> rc;
  if (!kv.entries().empty()) rc = build_run_config(kv);

  FitRun run;
  run.summary = analyse(file.shape, rc ? &*rc : nullptr);
  CsvHeader header;
  if (rc) {
    header = output_header(*rc);
  } else {
    header.emplace_back("version", version_string);
  }
  Report r(header);
  r.text("source", "lineshape csv");
  r.number("points", static_cast<double>(file.shape.size()));
  write_summary(r, run.summary);
  if (rc) write_validity(r, *rc, file.shape.detunings.back());
  run.files.emplace_back("fit_report.txt", r.str());
  return run;
}

}  // namespace drn::cli
