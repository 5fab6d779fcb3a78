#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rmqfi/experiments.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
};

void attach_common(CLI::App* sub, CommonArgs& args, bool with_config) {
  if (with_config) {
    sub->add_option("--config", args.config,
                    "key=value config file (# comments, strict keys)");
    sub->add_option("--seed", args.seed,
                    "rng seed; overrides the config file value");
  }
  sub->add_option("--out", args.out,
                  "output path stem (default: scenario name)");
  sub->add_option("--format", args.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
}

int run_one(rmqfi::Scenario scenario, const CommonArgs& args) {
  const rmqfi::ScenarioConfig cfg =
      rmqfi::load_scenario_config(scenario, args.config, args.seed, args.out);
  const rmqfi::ScenarioResult result = rmqfi::run_scenario(cfg);
  const rmqfi::OutputPaths paths =
      rmqfi::write_outputs(result, cfg.output_base, args.format);
  if (!paths.rows_csv.empty()) std::printf("wrote %s\n", paths.rows_csv.c_str());
  std::printf("wrote %s\n", paths.summary.c_str());
  if (result.exit_code != rmqfi::exit_ok)
    std::fprintf(stderr,
                 "self-audit failed: see the audit section of %s\n",
                 paths.summary.c_str());
  return result.exit_code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"randomized-measurement estimation of the quantum fisher "
               "information and its measured lower bound"};
  app.require_subcommand(1);

  struct SubDef {
    const char* name;
    const char* help;
    rmqfi::Scenario scenario;
  };
  const SubDef defs[] = {
      {"ramsey-time", "single-qubit qfi vs free-evolution time",
       rmqfi::Scenario::ramsey_qfi_vs_time},
      {"ramsey-phi", "single-qubit qfi vs preparation angle",
       rmqfi::Scenario::ramsey_qfi_vs_phi},
      {"ghz-sweep", "measured distance sweep and fit for a ghz probe",
       rmqfi::Scenario::ghz_sweep},
      {"scaling", "unitaries required vs qubit count under disordered "
                  "hamiltonian ensembles",
       rmqfi::Scenario::manybody_scaling},
      {"time-evolution", "8-qubit estimates along a dephasing trajectory",
       rmqfi::Scenario::manybody_time_evolution},
  };

  CommonArgs scenario_args[5];
  CLI::App* scenario_subs[5];
  for (int i = 0; i < 5; ++i) {
    scenario_subs[i] = app.add_subcommand(defs[i].name, defs[i].help);
    attach_common(scenario_subs[i], scenario_args[i], true);
  }

  CommonArgs records_args;
  records_args.out = "estimate_from_records";
  std::string records_path;
  CLI::App* records_sub = app.add_subcommand(
      "estimate-from-records",
      "recompute kernel estimators from a json-lines record file");
  records_sub->add_option("records", records_path, "record file (json lines)")
      ->required();
  attach_common(records_sub, records_args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return rmqfi::exit_config;
  }

  try {
    for (int i = 0; i < 5; ++i)
      if (scenario_subs[i]->parsed())
        return run_one(defs[i].scenario, scenario_args[i]);
    if (records_sub->parsed()) {
      const rmqfi::ScenarioResult result =
          rmqfi::run_estimate_from_records(records_path);
      const rmqfi::OutputPaths paths = rmqfi::write_outputs(
          result, records_args.out, records_args.format);
      if (!paths.rows_csv.empty())
        std::printf("wrote %s\n", paths.rows_csv.c_str());
      std::printf("wrote %s\n", paths.summary.c_str());
      return result.exit_code;
    }
  } catch (const rmqfi::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return rmqfi::exit_config;
  } catch (const rmqfi::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return rmqfi::exit_io;
  } catch (const rmqfi::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return rmqfi::exit_numerical;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return rmqfi::exit_config;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return rmqfi::exit_numerical;
  }
  return rmqfi::exit_config;
}
