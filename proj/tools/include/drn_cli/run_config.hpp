#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "drn/diffusion.hpp"
#include "drn/ensemble.hpp"
#include "drn/io.hpp"
#include "drn/model.hpp"
#include "drn/walks.hpp"

namespace drn::cli {

// Configuration errors; the CLI reports them as "config: <message>".
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Route { joint, product };

// Detuning grid: `points` samples on +-span * (Gamma + 1/tau_D).
struct GridSpec {
  std::size_t points = 2001;
  double span = 20.0;
};

struct RunConfig {
  PhysicalParams physical;
  Geometry geometry;
  WalkConfig walk;  // seed filled in only when one is given
  EnsembleConfig ensemble;
  DiffusionBinning binning;
  GridSpec grid;
  Route route = Route::joint;
  std::optional<std::uint64_t> seed;
  std::string output_dir = ".";
  std::string preset;

  // Dark-dephasing values for the gradient verb, as given [Hz] and as rates
  // [rad/s].
  std::vector<double> gamma_dark_hz;
  std::vector<double> gamma_dark;
  // Optional single sequence written next to the ensemble lineshape.
  std::optional<RamseySequence> sequence;

  // Every key with its effective value (defaults filled in), excluding the
  // gradient list. This is what the output headers and the hash describe.
  KeyValueConfig resolved;

  std::string hash() const;
  double tau() const { return tau_d(geometry); }
  std::vector<double> detuning_grid() const;
  // Throws config_error unless a seed is present.
  std::uint64_t require_seed() const;
};

// Known keys in schema order.
const std::vector<std::string>& known_keys();

// Builds and validates a run configuration. Unknown keys, unparsable values
// and out-of-range values throw config_error.
RunConfig build_run_config(const KeyValueConfig& entries);

// Where a configuration comes from. Later sources override earlier ones:
// preset, then config file, then the overrides in order.
struct ConfigSources {
  std::string preset;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
};

// Reads and merges the sources, then builds the configuration. File and
// parse errors throw config_error.
RunConfig load_run_config(const ConfigSources& sources);

// Bundled presets.
std::vector<std::string> preset_names();
// Throws config_error for an unknown name.
std::string_view preset_text(std::string_view name);
// The key reference shipped with the tool.
std::string_view schema_text();

// "a, b, c" with each entry parsed as a double.
std::vector<double> parse_list(std::string_view text, const std::string& what);

}  // namespace drn::cli
