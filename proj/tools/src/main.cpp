#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "drn/version.hpp"
#include "drn_cli/commands.hpp"
#include "drn_cli/run_config.hpp"

namespace {

using namespace drn::cli;

struct RunOptions {
  ConfigSources sources;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> grid_points;
  std::optional<std::size_t> max_returns;
  std::string gamma_dark;
  std::vector<std::string> sets;
  std::string out = ".";
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--preset", o.sources.preset, "Bundled preset to start from");
  cmd->add_option("--config", o.sources.config_path, "Config file, applied over the preset")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--grid-points", o.grid_points, "Number of detuning points (odd)");
  cmd->add_option("--max-returns", o.max_returns, "Returns kept per sequence");
  cmd->add_option("--set", o.sets, "Override a config entry, key=value")->take_all();
}

RunConfig resolve(RunOptions o) {
  if (o.seed) o.sources.overrides.emplace_back("seed", std::to_string(*o.seed));
  if (o.grid_points) o.sources.overrides.emplace_back("grid_points", std::to_string(*o.grid_points));
  if (o.max_returns) o.sources.overrides.emplace_back("max_returns", std::to_string(*o.max_returns));
  if (!o.gamma_dark.empty()) o.sources.overrides.emplace_back("gamma_dark_hz", o.gamma_dark);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw config_error("--set expects key=value, got '" + s + "'");
    o.sources.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  RunConfig rc = load_run_config(o.sources);
  rc.output_dir = o.out;
  return rc;
}

void report(const OutputFiles& files, const std::string& dir) {
  for (const auto& f : files) std::cout << (std::filesystem::path(dir) / f.first).string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ramsey-narrowed EIT lineshapes for diffusing atoms"};
  app.set_version_flag("--version", std::string(drn::version_string));
  app.require_subcommand(1);

  RunOptions lineshape_opts, dist_opts, gradient_opts;
  auto* lineshape = app.add_subcommand("lineshape", "Ensemble lineshape, per-class components and fit report");
  add_run_options(lineshape, lineshape_opts);
  auto* dist = app.add_subcommand("distributions", "In-beam and dark time distributions with MC checks");
  add_run_options(dist, dist_opts);
  auto* gradient = app.add_subcommand("gradient", "Lineshapes for several dark dephasing rates");
  add_run_options(gradient, gradient_opts);
  gradient->add_option("--gamma-dark", gradient_opts.gamma_dark, "Comma list of dark dephasing rates [Hz]");

  std::string fit_input, fit_out = ".";
  auto* fit = app.add_subcommand("fit", "Analyse an existing lineshape CSV");
  fit->add_option("--input", fit_input, "Lineshape CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", fit_out, "Output directory");

  app.add_subcommand("presets", "List bundled presets");
  std::string show_name;
  auto* show = app.add_subcommand("show-preset", "Print a bundled preset");
  show->add_option("name", show_name)->required();
  app.add_subcommand("schema", "Print the config key reference");

  CLI11_PARSE(app, argc, argv);

  try {
    OutputFiles files;
    std::string dir;
    if (*lineshape) {
      const RunConfig rc = resolve(lineshape_opts);
      files = cmd_lineshape(rc).files;
      dir = rc.output_dir;
    } else if (*dist) {
      const RunConfig rc = resolve(dist_opts);
      files = cmd_distributions(rc).files;
      dir = rc.output_dir;
    } else if (*gradient) {
      const RunConfig rc = resolve(gradient_opts);
      files = cmd_gradient(rc).files;
      dir = rc.output_dir;
    } else if (*fit) {
      std::ifstream in(fit_input, std::ios::binary);
      std::ostringstream text;
      text << in.rdbuf();
      if (!in && !in.eof()) throw stage_error("input", "cannot read " + fit_input);
      files = cmd_fit(text.str()).files;
      dir = fit_out;
    } else if (app.got_subcommand("presets")) {
      for (const auto& n : preset_names()) std::cout << n << '\n';
      return 0;
    } else if (*show) {
      std::cout << preset_text(show_name);
      return 0;
    } else {
      std::cout << schema_text();
      return 0;
    }
    write_outputs(dir, files);
    report(files, dir);
  } catch (const config_error& e) {
    std::cerr << "drn: config: " << e.what() << '\n';
    return 2;
  } catch (const stage_error& e) {
    std::cerr << "drn: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "drn: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
