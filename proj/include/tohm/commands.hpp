#ifndef TOHM_COMMANDS_HPP
#define TOHM_COMMANDS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

namespace tohm {

/// Flag-level overrides applied on top of the config file.  Values read
/// from [run] are still consumed when overridden, so reject_unknown does
/// not misfire on them.
struct RunOptions {
  std::string config_path;
  bool has_seed = false;
  std::uint64_t seed = 0;
  bool has_threads = false;
  int threads = 0;
  std::string output;  // empty: take [run] output (when the command writes)
};

/// Command bodies behind the CLI.  Each validates its inputs fully before
/// computing, prints a human-readable summary to `out`, and reports
/// failures by throwing (ValidationError/ParseError for bad input,
/// NumericError for numerical trouble); the CLI maps those to exit codes.
void run_ec(const std::string& field_path, double threshold, std::ostream& out);
void run_pvalue(const std::string& lkc_path, double c, std::ostream& out);
void run_simulate_field(const RunOptions& opt, std::ostream& out);
void run_calibrate(const RunOptions& opt, std::ostream& out);
void run_validate(const RunOptions& opt, std::ostream& out);
void run_bumphunt(const RunOptions& opt, std::ostream& out);

}  // namespace tohm

#endif
