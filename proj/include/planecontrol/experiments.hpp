#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace planecontrol {

/// Settings for one experiment. Unset optionals take per-experiment defaults.
struct ExperimentConfig {
  std::string experiment;
  std::optional<int> n_t;
  std::optional<int> n_x;
  std::optional<double> T;
  std::optional<double> X;
  std::optional<double> alpha0;
  std::optional<double> beta0;
  std::optional<double> theta;
  std::optional<double> y0;
  std::optional<double> eta;
  std::optional<int> n_paths;
  std::optional<std::uint64_t> seed;
  /// Overrides the tolerance of every checked row.
  std::optional<double> tol;
  std::string out_dir;
};

/// Names accepted by run().
const std::vector<std::string>& experiment_names();

/// Reads a JSON object with keys experiment, grid_nt, grid_nx, T, X, alpha0,
/// beta0, theta, y0, eta, paths, seed, tol, out. Throws std::invalid_argument.
ExperimentConfig parse_config_json(const std::string& text);

/// Throws std::invalid_argument for unknown experiments or out-of-domain values.
void validate(const ExperimentConfig& config);

struct ReportRow {
  std::string metric;
  double value = 0.0;
  std::optional<double> std_error;
  std::optional<double> target;
  std::optional<double> tolerance;
  /// Informational rows are unchecked and always pass.
  bool checked = false;
  bool pass = true;
};

/// |value - target| <= tolerance.
ReportRow target_row(std::string metric, double value, double target, double tolerance,
                     std::optional<double> std_error = std::nullopt);
/// value <= bound (target 0, tolerance bound, value taken as a magnitude).
ReportRow bound_row(std::string metric, double value, double bound);
/// Pass flag computed by the caller.
ReportRow flag_row(std::string metric, double value, bool pass,
                   std::optional<double> std_error = std::nullopt);
ReportRow info_row(std::string metric, double value,
                   std::optional<double> std_error = std::nullopt);

struct RunResult {
  std::vector<ReportRow> rows;
  /// 0 when every row passes, 1 otherwise.
  int exit_code = 0;
};

/// Runs one experiment. Writes params.json and results.csv (plus field and
/// path CSVs) into config.out_dir when it is non-empty.
RunResult run(const ExperimentConfig& config);

/// `metric,value,stderr,target,tolerance,pass` table.
void write_results_csv(std::ostream& out, const std::vector<ReportRow>& rows);

/// Runs every experiment at default settings, prints a summary table to
/// `log`, and returns 0 when all rows pass, 1 otherwise.
int selftest(std::ostream& log, const std::string& out_dir = "", std::optional<double> tol = {});

}  // namespace planecontrol
