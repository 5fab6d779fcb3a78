#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rmqfi/pipeline.hpp"

// reproducible experiment scenarios behind the qfi_rm command line tool:
// flat key=value config files with strict validation, scenario runners that
// emit one oracle value next to every estimate, and versioned csv / json
// writers whose output is byte-identical for identical seeds
namespace rmqfi {

// error taxonomy mirrored in the cli exit codes below
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;    // bad config / bad input contract
inline constexpr int exit_numerical = 3; // non-convergence, failed self-audit
inline constexpr int exit_io = 4;        // unreadable/unwritable files

enum class Scenario {
  ramsey_qfi_vs_time,
  ramsey_qfi_vs_phi,
  ghz_sweep,
  manybody_scaling,
  manybody_time_evolution,
};

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name); // throws ConfigError

// fully resolved run description. every field has a default; the seed is the
// one exception and must come from the config file or the command line.
// ramsey quantities are in microseconds and rad/us; many-body quantities are
// dimensionless, expressed in units of the evolution segment time T
struct ScenarioConfig {
  Scenario scenario = Scenario::ramsey_qfi_vs_time;
  std::uint64_t seed = 0;
  std::string output_base; // path stem for the csv/json outputs

  std::optional<int> shots; // absent = exact outcome probabilities
  int n_unitaries = 0;

  // ramsey (keys carry units: *_us, *_rad, *_rad_per_us)
  double phi_rad = 0.0;
  double delta_rad_per_us = 0.0;
  double t2star_us = 0.0;
  double time_min_us = 0.0;
  double time_max_us = 0.0;
  int n_time_points = 0;
  double phi_min_rad = 0.0;
  double phi_max_rad = 0.0;
  int n_phi_points = 0;
  RVec dtheta_grid; // phase offsets for sweep scenarios, rad

  // ghz sweep
  int n_qubits = 0;
  double theta0_rad = 0.0;
  double coherence = 1.0; // remaining |0..0><1..1| weight, 1 = no dephasing
  std::string preparation = "circuit"; // or "twisting"

  // many-body (units of T throughout)
  int n_qubits_min = 0;
  int n_qubits_max = 0;
  double epsilon = 0.0;
  double gamma_over_g_mixed = 0.0;
  double gamma_over_g = 0.0;
  double dephasing_time = 0.0;
  int repetitions = 0;
  int n_floor = 0;
  int n_ceiling = 0;
  double dtheta_rad = 0.0;
  double time_min = 0.0;
  double time_max = 0.0;
  int segments = 0;
  double segment_time = 0.0;
  double disorder_std = 0.0;
  double coupling_g = 0.0;
  double rabi_omega = 0.0;
  double alpha_exponent = 0.0;

  // every key the scenario consumed, with its final value, in consumption
  // order; echoed verbatim into the json summary
  std::vector<std::pair<std::string, std::string>> resolved;
};

// parse a key=value config file (empty path = defaults only), apply command
// line overrides, range-check every value and reject unknown keys; errors
// name the offending key and line. the config may state `scenario`, in which
// case it must match the requested one
ScenarioConfig load_scenario_config(Scenario scenario,
                                    const std::string& config_path,
                                    std::optional<std::uint64_t> cli_seed,
                                    const std::string& cli_out);

// rectangular result block; cells are preformatted strings (doubles via
// %.17g) so csv and json renderings are identical and lossless
struct ResultTable {
  std::string scenario;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> cells;
};

struct ScenarioResult {
  ResultTable table;
  std::string summary_json; // serialized summary object (no row data)
  int exit_code = exit_ok;  // exit_numerical when the self-audit fails
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

// re-estimate from an externally produced record file (json lines); emits one
// row per applicable estimator. local-haar ensembles only
ScenarioResult run_estimate_from_records(const std::string& records_path);

// format "csv": rows to <base>.csv (schema comment + header + rows) and the
// summary to <base>.json; format "json": a single <base>.json with the rows
// embedded under "rows". a trailing .csv/.json on base is stripped first
struct OutputPaths {
  std::string rows_csv; // empty in json mode
  std::string summary;
};
OutputPaths write_outputs(const ScenarioResult& result, const std::string& base,
                          const std::string& format);

std::string software_version();

// first line of every csv file; bump when the column contract changes
std::string csv_schema_tag();

} // namespace rmqfi
