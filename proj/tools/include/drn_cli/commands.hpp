#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "drn/analysis.hpp"
#include "drn/ensemble.hpp"
#include "drn_cli/run_config.hpp"

namespace drn::cli {

// A failure inside one pipeline stage. what() starts with the stage name.
class stage_error : public std::runtime_error {
 public:
  stage_error(const std::string& stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// File name and full content. Commands build every file in memory so a
// failure never leaves a partial output set behind.
using OutputFiles = std::vector<std::pair<std::string, std::string>>;

// Writes all files into `dir`, creating it if needed.
void write_outputs(const std::filesystem::path& dir, const OutputFiles& files);

// version, config hash, seed and every resolved config entry as config.<key>.
CsvHeader output_header(const RunConfig& rc);

struct FitSummary {
  LorentzianFit fit;
  std::optional<double> fwhm_numeric;  // [rad/s]; empty if the half maximum is not reached
  std::optional<PeakMetrics> metrics;  // needs the geometry
  std::vector<std::string> notes;      // why an optional entry is missing
};

struct LineshapeRun {
  Lineshape shape;
  std::vector<ClassComponent> components;
  std::optional<Lineshape> sequence;
  FitSummary summary;
  double return_probability = 0.0;
  OutputFiles files;  // lineshape.csv, components.csv, fit_report.txt, [sequence.csv]
};

struct DistributionsRun {
  TimeDistribution t_in;
  TimeDistribution t_out;
  double ks_statistic = 0.0;
  double mc_mean_exit_time = 0.0;
  double oracle_mean_exit_time = 0.0;
  double return_probability = 0.0;
  OutputFiles files;  // t_in.csv, t_out.csv, comparison.txt
};

struct GradientRow {
  double gamma_dark_hz = 0.0;
  Lineshape shape;
  PeakMetrics metrics;
  double suppression = 0.0;   // first peak_excess / this peak_excess
  double wing_change = 0.0;   // max |c - c_first| / max |c_first| over |Delta| > 5 Gamma
};

struct GradientRun {
  std::vector<GradientRow> rows;
  bool monotone = false;  // peak_excess non-increasing along the list
  OutputFiles files;      // lineshape_gdark_<hz>.csv per value, suppression_report.txt
};

struct FitRun {
  FitSummary summary;
  OutputFiles files;  // fit_report.txt
};

LineshapeRun cmd_lineshape(const RunConfig& rc);
DistributionsRun cmd_distributions(const RunConfig& rc);
// Uses rc.gamma_dark; each value replaces dark_dephasing_hz for its file.
GradientRun cmd_gradient(const RunConfig& rc);
// Analyses a lineshape CSV. The configuration, when present in the header,
// supplies the geometry for the peak metrics.
FitRun cmd_fit(const std::string& csv_text);

// Name of the gradient output for one dark dephasing value [Hz].
std::string gradient_file_name(double gamma_dark_hz);

}  // namespace drn::cli
