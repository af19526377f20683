// tohm: Euler characteristics of excursion sets, curvature calibration,
// global p-values, and a two-dimensional bump hunt, from the command line.
//
// Exit codes: 0 success, 1 numerical failure, 2 bad input.

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tohm/commands.hpp"
#include "tohm/errors.hpp"

namespace {

// --seed/--threads/--output beat the [run] section of the config file.
void add_run_flags(CLI::App* cmd, tohm::RunOptions& opt) {
  cmd->add_option("--config", opt.config_path, "run configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", opt.seed, "master seed (overrides [run] seed)");
  cmd->add_option("--threads", opt.threads, "worker threads, 0 = all cores");
  cmd->add_option("--output", opt.output, "output path (overrides [run] output)");
}

void finish_run_flags(CLI::App* cmd, tohm::RunOptions& opt) {
  opt.has_seed = cmd->count("--seed") > 0;
  opt.has_threads = cmd->count("--threads") > 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological excursion-set statistics"};
  app.require_subcommand(1);

  // ec
  std::string field_path;
  double threshold = 0.0;
  CLI::App* ec = app.add_subcommand("ec", "Euler characteristic of one excursion set");
  ec->add_option("--field", field_path, "field file")->required()->check(CLI::ExistingFile);
  ec->add_option("--threshold", threshold, "excursion threshold c")->required();

  // pvalue
  std::string lkc_path;
  double c_obs = 0.0;
  CLI::App* pvalue = app.add_subcommand("pvalue", "global p-value from a curvature record");
  pvalue->add_option("--lkc", lkc_path, "curvature record file")
      ->required()
      ->check(CLI::ExistingFile);
  pvalue->add_option("--c", c_obs, "observed supremum")->required();

  // config-driven commands
  tohm::RunOptions sim_opt, cal_opt, val_opt, bump_opt;
  CLI::App* simulate =
      app.add_subcommand("simulate-field", "draw one Gaussian (or chi-bar) random field");
  add_run_flags(simulate, sim_opt);
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "fit curvatures from Monte Carlo EC estimates");
  add_run_flags(calibrate, cal_opt);
  CLI::App* validate =
      app.add_subcommand("validate", "compare the tail approximation with simulation");
  add_run_flags(validate, val_opt);
  CLI::App* bumphunt = app.add_subcommand("bumphunt", "two-dimensional bump-hunt demo");
  add_run_flags(bumphunt, bump_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  finish_run_flags(simulate, sim_opt);
  finish_run_flags(calibrate, cal_opt);
  finish_run_flags(validate, val_opt);
  finish_run_flags(bumphunt, bump_opt);

  try {
    if (*ec) {
      tohm::run_ec(field_path, threshold, std::cout);
    } else if (*pvalue) {
      tohm::run_pvalue(lkc_path, c_obs, std::cout);
    } else if (*simulate) {
      tohm::run_simulate_field(sim_opt, std::cout);
    } else if (*calibrate) {
      tohm::run_calibrate(cal_opt, std::cout);
    } else if (*validate) {
      tohm::run_validate(val_opt, std::cout);
    } else if (*bumphunt) {
      tohm::run_bumphunt(bump_opt, std::cout);
    }
  } catch (const tohm::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tohm::NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
