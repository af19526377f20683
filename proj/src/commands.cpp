#include "tohm/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tohm/bumphunt.hpp"
#include "tohm/config.hpp"
#include "tohm/errors.hpp"
#include "tohm/euler.hpp"
#include "tohm/field_io.hpp"
#include "tohm/lattice.hpp"
#include "tohm/rft.hpp"
#include "tohm/rng.hpp"
#include "tohm/simulate.hpp"
#include "tohm/stats.hpp"

namespace tohm {

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string fmt_sigma(double z) { return fmt(z, "%.3f"); }

// One axis from "lo:hi:count" (count evenly spaced points, endpoints
// included) or from an explicit strictly increasing list.
std::vector<double> parse_axis(const Config& cfg, const std::string& key) {
  std::string value = cfg.require_string("lattice", key);
  if (value.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      std::size_t colon = value.find(':', start);
      parts.push_back(value.substr(start, colon - start));
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
    if (parts.size() != 3)
      throw ValidationError(cfg.path() + ": " + key + " must be lo:hi:count, got '" + value +
                            "'");
    char* end = nullptr;
    double lo = std::strtod(parts[0].c_str(), &end);
    if (end != parts[0].c_str() + parts[0].size() || !std::isfinite(lo))
      throw ValidationError(cfg.path() + ": malformed axis bound '" + parts[0] + "'");
    double hi = std::strtod(parts[1].c_str(), &end);
    if (end != parts[1].c_str() + parts[1].size() || !std::isfinite(hi))
      throw ValidationError(cfg.path() + ": malformed axis bound '" + parts[1] + "'");
    long count = std::strtol(parts[2].c_str(), &end, 10);
    if (end != parts[2].c_str() + parts[2].size())
      throw ValidationError(cfg.path() + ": malformed axis count '" + parts[2] + "'");
    if (count < 1) throw ValidationError(cfg.path() + ": " + key + " needs count >= 1");
    if (count == 1) {
      if (lo != hi)
        throw ValidationError(cfg.path() + ": " + key + " with count 1 needs lo == hi");
      return {lo};
    }
    if (!(lo < hi)) throw ValidationError(cfg.path() + ": " + key + " needs lo < hi");
    std::vector<double> axis(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i)
      axis[static_cast<std::size_t>(i)] = lo + (hi - lo) * double(i) / double(count - 1);
    return axis;
  }
  // Explicit point list; Lattice construction validates monotonicity.
  return cfg.require_doubles("lattice", key);
}

// Axes axis1..axisD (consecutive, at least axis1), then the optional mask.
LatticePtr build_lattice(const Config& cfg) {
  std::vector<std::vector<double>> axes;
  for (int d = 1;; ++d) {
    std::string key = "axis" + std::to_string(d);
    if (!cfg.has("lattice", key)) break;
    axes.push_back(parse_axis(cfg, key));
  }
  if (axes.empty())
    throw ValidationError(cfg.path() + ": [lattice] needs axis1 (and axis2, ...)");

  std::string mask = cfg.get_string("lattice", "mask", "none");
  if (mask == "none")
    return std::make_shared<Lattice>(std::move(axes));
  std::vector<std::string> toks;
  {
    std::istringstream in(mask);
    std::string t;
    while (in >> t) toks.push_back(t);
  }
  if (toks.size() == 4 && toks[0] == "disc") {
    auto num = [&](const std::string& t) {
      char* end = nullptr;
      double v = std::strtod(t.c_str(), &end);
      if (end != t.c_str() + t.size() || !std::isfinite(v))
        throw ValidationError(cfg.path() + ": malformed mask number '" + t + "'");
      return v;
    };
    Region disc = Region::disc(num(toks[1]), num(toks[2]), num(toks[3]));
    return std::make_shared<Lattice>(Lattice::with_predicate(
        std::move(axes),
        [disc](const std::vector<double>& p) { return disc.contains(p[0], p[1]); }));
  }
  throw ValidationError(cfg.path() + ": mask must be 'none' or 'disc CX CY R', got '" + mask +
                        "'");
}

SqExpKernel build_kernel(const Config& cfg) {
  return SqExpKernel(cfg.require_doubles("kernel", "lengthscale"));
}

std::uint64_t resolve_seed(const Config& cfg, const RunOptions& opt) {
  bool in_config = cfg.has("run", "seed");
  std::uint64_t from_config = in_config ? cfg.require_u64("run", "seed") : 0;
  if (opt.has_seed) return opt.seed;
  if (!in_config)
    throw ValidationError("a master seed is required (--seed or [run] seed)");
  return from_config;
}

int resolve_threads(const Config& cfg, const RunOptions& opt) {
  long long from_config = cfg.get_int("run", "threads", 0);
  long long t = opt.has_threads ? opt.threads : from_config;
  if (t < 0 || t > 4096) throw ValidationError("threads must lie in [0, 4096] (0 = all cores)");
  return static_cast<int>(t);
}

std::string resolve_output(const Config& cfg, const RunOptions& opt) {
  std::string from_config = cfg.get_string("run", "output", "");
  if (!opt.output.empty()) return opt.output;
  if (from_config.empty())
    throw ValidationError("an output path is required (--output or [run] output)");
  return from_config;
}

// sigma view of a tail probability, with the reporting conventions of
// PValueReport: mass at or below 0 is +inf sigma, at or above 1 is -inf.
double sigma_of(double p) {
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  if (p >= 1.0) return -std::numeric_limits<double>::infinity();
  return sigma_significance(p);
}

Region parse_region(const Config& cfg, const std::string& section, const std::string& key) {
  std::vector<std::string> toks = cfg.require_tokens(section, key);
  auto num = [&](const std::string& t) {
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v))
      throw ValidationError(cfg.path() + ": malformed region number '" + t + "'");
    return v;
  };
  if (toks.size() == 5 && toks[0] == "rect")
    return Region::rectangle(num(toks[1]), num(toks[2]), num(toks[3]), num(toks[4]));
  if (toks.size() == 4 && toks[0] == "disc")
    return Region::disc(num(toks[1]), num(toks[2]), num(toks[3]));
  throw ValidationError(cfg.path() + ": region must be 'rect X0 X1 Y0 Y1' or 'disc CX CY R'");
}

void print_lkc_summary(const LKCSolution& lkc, std::ostream& out) {
  for (std::size_t d = 0; d < lkc.lkcs.size(); ++d) {
    double var = lkc.covariance[d * lkc.lkcs.size() + d];
    out << "L_" << (d + 1) << " = " << fmt(lkc.lkcs[d]) << " +- " << fmt(std::sqrt(var))
        << "\n";
  }
  out << "condition number = " << fmt(lkc.condition_number) << "\n";
  if (lkc.condition_warning)
    out << "warning: the threshold design is badly conditioned\n";
}

void print_pvalue_report(const PValueReport& report, std::ostream& out) {
  out << "p-value = " << fmt(report.pvalue, "%.3e") << "\n";
  out << "sigma = " << fmt_sigma(report.sigma) << "\n";
  out << "sigma interval = [" << fmt_sigma(sigma_of(report.mc_high)) << ", "
      << fmt_sigma(sigma_of(report.mc_low)) << "]\n";
  out << "note: plug-in expected-EC approximation, not an exact tail bound\n";
}

}  // namespace

void run_ec(const std::string& field_path, double threshold, std::ostream& out) {
  FieldSample field = load_field(field_path);
  EulerResult result = euler_characteristic(field, threshold);
  for (std::size_t d = 0; d < result.clique_counts.size(); ++d)
    out << "|C^" << d << "| = " << result.clique_counts[d] << "\n";
  out << "EC = " << result.ec << "\n";
  if (result.clique_counts[0] == 0)
    out << "note: the excursion set is empty at this threshold\n";
}

void run_pvalue(const std::string& lkc_path, double c, std::ostream& out) {
  LKCSolution lkc = load_lkc(lkc_path);
  PValueReport report = global_pvalue(c, lkc);
  out << "family = " << lkc.family.name() << "\n";
  out << "c = " << fmt(c) << "\n";
  print_pvalue_report(report, out);
}

void run_simulate_field(const RunOptions& opt, std::ostream& out) {
  Config cfg = Config::parse_file(opt.config_path);
  LatticePtr lattice = build_lattice(cfg);
  SqExpKernel kernel = build_kernel(cfg);
  Transform transform = parse_transform(cfg.get_string("field", "transform", "identity"));
  std::uint64_t seed = resolve_seed(cfg, opt);
  (void)resolve_threads(cfg, opt);  // one draw needs no workers; consume the key anyway
  std::string output = resolve_output(cfg, opt);
  cfg.reject_unknown("lattice");
  cfg.reject_unknown("kernel");
  cfg.reject_unknown("field");
  cfg.reject_unknown("run");

  FieldSample field = sample_grf(lattice, kernel, seed);
  if (transform == Transform::ChiBar) field = chibar_transform(field);
  save_field(field, output);
  out << "R = " << lattice->size() << " lattice points\n";
  out << "wrote field to '" << output << "'\n";
}

void run_calibrate(const RunOptions& opt, std::ostream& out) {
  Config cfg = Config::parse_file(opt.config_path);
  LatticePtr lattice = build_lattice(cfg);
  SqExpKernel kernel = build_kernel(cfg);
  DensityFamily family = DensityFamily::parse(cfg.require_string("calibrate", "family"));
  Transform transform = parse_transform(cfg.require_string("calibrate", "transform"));
  double l0 = cfg.require_double("calibrate", "l0");
  std::vector<double> thresholds = cfg.require_doubles("calibrate", "thresholds");
  long long n_reps = cfg.require_int("calibrate", "n_reps");
  double cond_warn = cfg.get_double("calibrate", "cond_warn", 1e8);
  std::uint64_t seed = resolve_seed(cfg, opt);
  int threads = resolve_threads(cfg, opt);
  std::string output = resolve_output(cfg, opt);
  cfg.reject_unknown("lattice");
  cfg.reject_unknown("kernel");
  cfg.reject_unknown("calibrate");
  cfg.reject_unknown("run");
  if (n_reps < 2 || n_reps > 100000000)
    throw ValidationError("n_reps must lie in [2, 1e8]");

  std::vector<MCEstimate> estimates = estimate_expected_ec(
      lattice, kernel, transform, thresholds, static_cast<int>(n_reps), seed, threads);
  std::vector<double> means, ses;
  for (const MCEstimate& e : estimates) {
    means.push_back(e.mean);
    ses.push_back(e.se);
  }
  LKCSolution lkc = solve_lkc(family, l0, thresholds, means, ses, cond_warn);
  save_lkc(lkc, output);

  out << "R = " << lattice->size() << " lattice points\n";
  out << "n_reps = " << n_reps << "\n";
  for (const MCEstimate& e : estimates)
    out << "E[EC] at c = " << fmt(e.threshold) << ": " << fmt(e.mean) << " (se " << fmt(e.se)
        << ")\n";
  print_lkc_summary(lkc, out);
  out << "wrote LKC record to '" << output << "'\n";
}

void run_validate(const RunOptions& opt, std::ostream& out) {
  Config cfg = Config::parse_file(opt.config_path);
  LatticePtr lattice = build_lattice(cfg);
  SqExpKernel kernel = build_kernel(cfg);
  DensityFamily family = DensityFamily::parse(cfg.require_string("validate", "family"));
  Transform transform = parse_transform(cfg.require_string("validate", "transform"));
  double l0 = cfg.require_double("validate", "l0");
  std::vector<double> grid = cfg.require_doubles("validate", "grid");
  std::vector<double> thresholds = cfg.require_doubles("validate", "thresholds");
  long long n_calib = cfg.require_int("validate", "n_calib");
  long long n_tail = cfg.require_int("validate", "n_tail");
  std::uint64_t seed = resolve_seed(cfg, opt);
  int threads = resolve_threads(cfg, opt);
  std::string output = resolve_output(cfg, opt);
  cfg.reject_unknown("lattice");
  cfg.reject_unknown("kernel");
  cfg.reject_unknown("validate");
  cfg.reject_unknown("run");
  if (n_calib < 2 || n_calib > 100000000) throw ValidationError("n_calib must lie in [2, 1e8]");
  if (n_tail < 100 || n_tail > 100000000)
    throw ValidationError("n_tail must lie in [100, 1e8]");

  ValidationResult result =
      validation_curve(lattice, kernel, transform, grid, thresholds, static_cast<int>(n_calib),
                       static_cast<int>(n_tail), l0, family, seed, threads);
  save_validation_table(result.rows, output);

  out << "R = " << lattice->size() << " lattice points\n";
  print_lkc_summary(result.lkc, out);
  for (const ValidationRow& row : result.rows)
    out << "c = " << fmt(row.c) << ": empirical " << fmt(row.empirical_tail) << " (se "
        << fmt(row.empirical_se) << "), approx " << fmt(row.approx_pvalue) << "\n";
  out << "wrote validation table to '" << output << "'\n";
}

void run_bumphunt(const RunOptions& opt, std::ostream& out) {
  Config cfg = Config::parse_file(opt.config_path);
  if (cfg.has("lattice", "mask"))
    throw ValidationError(cfg.path() +
                          ": [lattice] mask is not allowed here; the bump-hunt region masks "
                          "the lattice");
  Region region = parse_region(cfg, "bumphunt", "region");
  double nu = cfg.require_double("bumphunt", "nu");

  // Build the axes, then keep the points the region contains.
  std::vector<std::vector<double>> axes;
  for (int d = 1;; ++d) {
    std::string key = "axis" + std::to_string(d);
    if (!cfg.has("lattice", key)) break;
    axes.push_back(parse_axis(cfg, key));
  }
  if (axes.size() != 2)
    throw ValidationError(cfg.path() + ": the bump hunt needs exactly axis1 and axis2");
  LatticePtr lattice = std::make_shared<Lattice>(Lattice::with_predicate(
      std::move(axes),
      [region](const std::vector<double>& p) { return region.contains(p[0], p[1]); }));

  BumpCalibration calib;
  calib.mode = parse_calib_mode(cfg.get_string("bumphunt", "calib_mode", "kernel"));
  calib.l0 = cfg.get_double("bumphunt", "l0", 1.0);
  calib.thresholds = cfg.require_doubles("bumphunt", "thresholds");
  long long n_reps = cfg.require_int("bumphunt", "n_reps");
  if (n_reps < 2 || n_reps > 100000000) throw ValidationError("n_reps must lie in [2, 1e8]");
  calib.n_reps = static_cast<int>(n_reps);
  if (cfg.has("bumphunt", "lengthscale"))
    calib.lengthscales = cfg.require_doubles("bumphunt", "lengthscale");

  std::uint64_t seed = resolve_seed(cfg, opt);
  int threads = resolve_threads(cfg, opt);

  EventSet events;
  std::string events_file = cfg.get_string("bumphunt", "events_file", "");
  if (!events_file.empty()) {
    if (cfg.has("bumphunt", "eta") || cfg.has("bumphunt", "theta") ||
        cfg.has("bumphunt", "n_events"))
      throw ValidationError(cfg.path() +
                            ": give either events_file or (eta, theta, n_events), not both");
    events = load_events(events_file);
    out << "events: " << events.size() << " from '" << events_file << "'\n";
  } else {
    double eta = cfg.require_double("bumphunt", "eta");
    std::vector<double> theta = cfg.require_doubles("bumphunt", "theta");
    if (theta.size() != 2)
      throw ValidationError(cfg.path() + ": theta needs exactly two coordinates");
    long long n_events = cfg.require_int("bumphunt", "n_events");
    if (n_events < 1 || n_events > 100000000)
      throw ValidationError("n_events must lie in [1, 1e8]");
    BumpModel model(region, nu, eta, theta[0], theta[1]);
    events = simulate_events(model, static_cast<int>(n_events), derive_stream(seed, 0));
    out << "events: " << events.size() << " simulated (eta = " << fmt(eta) << ")\n";
  }
  cfg.reject_unknown("lattice");
  cfg.reject_unknown("bumphunt");
  cfg.reject_unknown("run");

  BumpHuntResult result = bump_hunt_pipeline(events, lattice, region, nu, calib, seed, threads);
  out << "R = " << lattice->size() << " lattice points\n";
  out << "observed sup W = " << fmt(result.report.c) << " at (" << fmt(result.argmax[0]) << ", "
      << fmt(result.argmax[1]) << ")\n";
  out << "eta_hat at argmax = " << fmt(result.eta_hat) << "\n";
  print_lkc_summary(result.report.lkc, out);
  print_pvalue_report(result.report, out);

  std::string output = opt.output.empty() ? cfg.get_string("run", "output", "") : opt.output;
  if (!output.empty()) {
    save_field(result.observed.field, output);
    out << "wrote observed field to '" << output << "'\n";
  }
}

}  // namespace tohm
