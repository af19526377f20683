// Acceptance suite: nine end-to-end checks of the excursion-set pipeline,
// one [PASS]/[FAIL] line each, nonzero exit if any check fails.
//
// Each check pins its own configuration and seeds; statistical checks use
// windows sized from pilot runs so a pass is reproducible, not lucky.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "acceptance_oracle.hpp"
#include "tohm/bumphunt.hpp"
#include "tohm/euler.hpp"
#include "tohm/lattice.hpp"
#include "tohm/rft.hpp"
#include "tohm/rng.hpp"
#include "tohm/simulate.hpp"
#include "tohm/stats.hpp"

using namespace tohm;

namespace {

int g_failures = 0;

double now_s() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void report(int number, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", number, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double uniform(SplitMix64& rng) {
  return (double)(rng.next() >> 11) * 0x1.0p-53;
}

std::string fmt(const char* spec, ...) {
  char buf[512];
  va_list args;
  va_start(args, spec);
  std::vsnprintf(buf, sizeof(buf), spec, args);
  va_end(args);
  return buf;
}

LatticePtr grid_lattice(const std::vector<int>& shape, double step = 1.0) {
  std::vector<std::vector<double>> axes;
  for (int n : shape) {
    std::vector<double> ax(n);
    for (int i = 0; i < n; ++i) ax[i] = i * step;
    axes.push_back(std::move(ax));
  }
  return std::make_shared<Lattice>(std::move(axes));
}

FieldSample field_from_cells(LatticePtr lat, const std::vector<std::vector<int>>& cells) {
  FieldSample f{lat, std::vector<double>(lat->size(), 0.0)};
  for (const auto& cell : cells) {
    std::int64_t flat = 0;
    for (int d = 0; d < lat->dims(); ++d) flat += lat->strides()[d] * cell[d];
    f.values[(std::size_t)lat->included_of_cell(flat)] = 1.0;
  }
  return f;
}

// ---------------------------------------------------------------------------
// 1. Graph/clique EC against the independent cubical-mesh enumerator.

void criterion_1() {
  double t0 = now_s();
  SplitMix64 rng(0xace5u);
  long long mismatches = 0, total = 0;

  auto run_batch = [&](int D, int max_axis, int n_fields) {
    for (int trial = 0; trial < n_fields; ++trial) {
      std::vector<int> shape(D);
      long long cells = 1;
      for (int d = 0; d < D; ++d) {
        shape[d] = 1 + (int)(rng.next() % (std::uint64_t)max_axis);
        cells *= shape[d];
      }

      // Half the fields get a random mask; always keep at least one cell.
      std::vector<std::uint8_t> mask;
      if (uniform(rng) < 0.5) {
        mask.assign(cells, 0);
        bool any = false;
        for (long long i = 0; i < cells; ++i) {
          mask[i] = uniform(rng) < 0.7 ? 1 : 0;
          any = any || mask[i];
        }
        if (!any) mask[(std::int64_t)(rng.next() % (std::uint64_t)cells)] = 1;
      }

      std::vector<std::vector<double>> axes(D);
      for (int d = 0; d < D; ++d)
        for (int i = 0; i < shape[d]; ++i) axes[d].push_back(i);
      LatticePtr lat = mask.empty()
                           ? std::make_shared<Lattice>(std::move(axes))
                           : std::make_shared<Lattice>(std::move(axes), mask);

      FieldSample field{lat, std::vector<double>((std::size_t)lat->size())};
      for (double& v : field.values) v = uniform(rng);
      double c = 0.15 + 0.7 * uniform(rng);

      // The mesh oracle sees the same membership as a full-grid bitmap.
      std::vector<std::uint8_t> marked(cells, 0);
      for (std::int64_t r = 0; r < lat->size(); ++r)
        if (field.values[(std::size_t)r] >= c) marked[lat->cell_of(r)] = 1;

      long long graph_ec = euler_characteristic(field, c).ec;
      long long mesh_ec = mesh_euler_characteristic(shape, marked);
      ++total;
      if (graph_ec != mesh_ec) ++mismatches;
    }
  };

  run_batch(1, 8, 1000);
  run_batch(2, 8, 1000);
  run_batch(3, 8, 1000);
  run_batch(4, 5, 100);

  report(1, "oracle equivalence", mismatches == 0,
         fmt("%lld/%lld random fields agree (graph/clique vs independent mesh), %.1f s",
             total - mismatches, total, now_s() - t0));
}

// ---------------------------------------------------------------------------
// 2. The three blob/components/ring-plus-points configurations.

void criterion_2() {
  auto lat = grid_lattice({9, 9});
  long long one =
      euler_characteristic(
          field_from_cells(lat, {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {3, 1}, {3, 2}}), 0.5)
          .ec;
  long long two =
      euler_characteristic(
          field_from_cells(lat, {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {6, 6}, {6, 7}}), 0.5)
          .ec;
  long long three = euler_characteristic(field_from_cells(lat, {{0, 0},
                                                                {0, 1},
                                                                {0, 2},
                                                                {1, 0},
                                                                {1, 2},
                                                                {2, 0},
                                                                {2, 1},
                                                                {2, 2},
                                                                {5, 5},
                                                                {7, 1},
                                                                {1, 7}}),
                                         0.5)
                        .ec;
  report(2, "fixture configurations", one == 1 && two == 2 && three == 3,
         fmt("blob EC = %lld, two components EC = %lld, ring plus points EC = %lld "
             "(want 1, 2, 3)",
             one, two, three));
}

// ---------------------------------------------------------------------------
// 3. Curvature recovery against closed-form values on a known kernel.

void criterion_3() {
  double t0 = now_s();
  // Squared-exponential kernel with length-scale l has second spectral
  // moment 1/l^2, so a 49 x 49 square carries L1 = 98/5 and L2 = 2401/25.
  const double kL1 = 19.6, kL2 = 96.04;
  auto lat = grid_lattice({50, 50});
  SqExpKernel kernel(5.0);
  std::vector<double> thr{1.0, 2.5};
  auto est = estimate_expected_ec(lat, kernel, Transform::Identity, thr, 400, 20260816, 0);
  auto lkc = solve_lkc(DensityFamily::gaussian(), 1.0, thr, {est[0].mean, est[1].mean},
                       {est[0].se, est[1].se});
  double se1 = std::sqrt(lkc.covariance[0]);
  double se2 = std::sqrt(lkc.covariance[3]);
  bool ok = std::fabs(lkc.lkcs[0] - kL1) <= 3 * se1 && std::fabs(lkc.lkcs[1] - kL2) <= 3 * se2;
  report(3, "known-curvature recovery", ok,
         fmt("L1 = %.2f +- %.2f vs %.2f (%.2f se), L2 = %.2f +- %.2f vs %.2f (%.2f se), "
             "400 reps, %.1f s",
             lkc.lkcs[0], se1, kL1, (lkc.lkcs[0] - kL1) / se1, lkc.lkcs[1], se2, kL2,
             (lkc.lkcs[1] - kL2) / se2, now_s() - t0));
}

// ---------------------------------------------------------------------------
// 4. Tail approximation against the simulated supremum distribution.

void criterion_4() {
  double t0 = now_s();
  auto lat = grid_lattice({30, 30});
  SqExpKernel kernel(4.0);
  std::vector<double> grid{15.5, 16.5, 17.5, 18.5, 20.0, 22.0};
  auto res = validation_curve(lat, kernel, Transform::ChiBar, grid, {1.0, 4.0}, 100000,
                              100000, 1.0, DensityFamily::chi_bar01(), 777, 0);
  int in_window = 0, in_band = 0;
  double worst = 0.0;
  for (const auto& row : res.rows) {
    if (row.empirical_tail < 1e-3 || row.empirical_tail > 1e-1) continue;
    ++in_window;
    double dev = std::fabs(row.approx_pvalue - row.empirical_tail) / row.empirical_se;
    worst = std::max(worst, dev);
    if (dev <= 2.0) ++in_band;
  }
  bool ok = in_window > 0 && in_band == in_window;
  report(4, "validation-curve agreement", ok,
         fmt("%d/%d thresholds with empirical tail in [1e-3, 1e-1] sit inside the +-2 se "
             "band (worst %.2f se), n_tail = 1e5, %.0f s",
             in_band, in_window, worst, now_s() - t0));
}

// ---------------------------------------------------------------------------
// 5. Sigma conversion: benchmark value and tail round trip.

void criterion_5() {
  double bench = sigma_significance(1.092e-26);
  bool bench_ok = std::fabs(bench - 10.629) <= 0.005;
  double worst = 0.0;
  for (int i = 0; i <= 11000; ++i) {
    double z = i * 1e-3;
    double back = sigma_significance(normal_tail(z));
    worst = std::max(worst, std::fabs(back - z));
  }
  bool round_ok = worst <= 1e-6;
  report(5, "sigma conversion", bench_ok && round_ok,
         fmt("sigma(1.092e-26) = %.6f (want 10.629 +- 0.005); worst round-trip error "
             "%.2e over z in [0, 11]",
             bench, worst));
}

// ---------------------------------------------------------------------------
// 6. Marginal law of the chibar transform at one lattice point.

void criterion_6() {
  double t0 = now_s();
  auto lat = grid_lattice({4, 4});
  SqExpKernel kernel(2.0);
  GrfSampler sampler(lat, kernel);
  const int n = 2000;
  int zeros = 0;
  std::vector<double> positive;
  for (int i = 0; i < n; ++i) {
    FieldSample f = chibar_transform(sampler.sample(derive_stream(606060, (std::uint64_t)i)));
    double w = f.values[5];
    if (w == 0.0)
      ++zeros;
    else
      positive.push_back(w);
  }
  double zero_frac = (double)zeros / n;
  bool frac_ok = zero_frac >= 0.47 && zero_frac <= 0.53;

  // One-sample Kolmogorov-Smirnov against the square of a positive normal:
  // F(c) = erf(sqrt(c/2)).
  std::sort(positive.begin(), positive.end());
  const std::size_t m = positive.size();
  double ks = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double F = std::erf(std::sqrt(positive[i] / 2.0));
    ks = std::max(ks, std::fabs(F - (double)i / m));
    ks = std::max(ks, std::fabs(F - (double)(i + 1) / m));
  }
  double crit = 1.6276236115189503 / std::sqrt((double)m);  // alpha = 0.01
  bool ks_ok = ks <= crit;
  report(6, "marginal mixture law", frac_ok && ks_ok,
         fmt("zero fraction %.4f (want [0.47, 0.53]); KS = %.4f vs %.4f at level 0.01 "
             "(%zu nonzero of %d), %.1f s",
             zero_frac, ks, crit, m, n, now_s() - t0));
}

// ---------------------------------------------------------------------------
// 7. expected_ec -> solve_lkc round trip on random curvature vectors.

void criterion_7() {
  SplitMix64 rng(0x707u);
  int trials = 0, exact = 0, resamples = 0;
  double worst = 0.0;
  while (trials < 100) {
    int pick = (int)(rng.next() % 7);
    DensityFamily fam = pick == 0   ? DensityFamily::gaussian()
                        : pick == 1 ? DensityFamily::chi_bar01()
                                    : DensityFamily::chi_square(pick - 1);
    int D = 1 + (int)(rng.next() % 3);
    std::vector<double> thr;
    bool spaced = true;
    for (int d = 0; d < D; ++d) {
      double lo = fam.kind == DensityFamily::Kind::Gaussian ? 0.3 : 0.5;
      double hi = fam.kind == DensityFamily::Kind::Gaussian ? 3.2 : 7.0;
      thr.push_back(lo + (hi - lo) * uniform(rng));
    }
    std::sort(thr.begin(), thr.end());
    for (int d = 1; d < D; ++d)
      if (thr[d] - thr[d - 1] < 0.2) spaced = false;
    if (!spaced) {
      ++resamples;
      continue;
    }

    std::vector<double> lkcs;
    for (int d = 0; d < D; ++d) {
      double mag = 1.0 + 299.0 * uniform(rng);
      lkcs.push_back(uniform(rng) < 0.3 ? -mag : mag);
    }
    double l0 = 0.5 + 1.5 * uniform(rng);

    std::vector<double> means;
    for (double c : thr) means.push_back(expected_ec(fam, l0, lkcs, c));
    LKCSolution sol = solve_lkc(fam, l0, thr, means, std::vector<double>(D, 0.0));
    if (sol.condition_number >= 1e6) {
      ++resamples;
      continue;
    }
    ++trials;
    double err = 0.0;
    for (int d = 0; d < D; ++d)
      err = std::max(err, std::fabs(sol.lkcs[d] - lkcs[d]) / std::fabs(lkcs[d]));
    worst = std::max(worst, err);
    if (err <= 1e-10) ++exact;
  }
  report(7, "linear-system round trip", exact == 100,
         fmt("%d/100 random (family, thresholds, L) triples recovered to 1e-10 relative "
             "(worst %.2e, condition < 1e6, %d resamples)",
             exact, worst, resamples));
}

// ---------------------------------------------------------------------------
// 8. Size of the bump-hunt global test under the null.

void criterion_8() {
  double t0 = now_s();
  Region region = Region::rectangle(0, 12, 0, 9);
  auto lat = grid_lattice({25, 19}, 0.5);
  const double nu = 0.5;
  const int n_events = 10000, n_runs = 200, calib_reps = 400;
  const std::uint64_t seed = 909090;
  LrtEvaluator eval(lat, region, nu);
  BumpModel null_model(region, nu, 0.0, 6.0, 4.5);

  // The null calibration is a functional of H0 alone, so one calibration
  // legitimately serves every run.
  std::vector<double> thr{1.0, 6.0};
  std::vector<double> ec_sum(thr.size(), 0.0), ec_sq(thr.size(), 0.0);
  for (int i = 0; i < calib_reps; ++i) {
    EventSet ev = simulate_events(null_model, n_events, derive_stream(seed, 1000 + i));
    LrtField f = eval.evaluate(ev);
    for (std::size_t k = 0; k < thr.size(); ++k) {
      double ec = (double)euler_characteristic(f.field, thr[k]).ec;
      ec_sum[k] += ec;
      ec_sq[k] += ec * ec;
    }
  }
  std::vector<double> means(thr.size()), ses(thr.size());
  for (std::size_t k = 0; k < thr.size(); ++k) {
    means[k] = ec_sum[k] / calib_reps;
    double var = (ec_sq[k] - calib_reps * means[k] * means[k]) / (calib_reps - 1);
    ses[k] = std::sqrt(var / calib_reps);
  }
  LKCSolution lkc = solve_lkc(DensityFamily::chi_bar01(), 1.0, thr, means, ses);

  int reject = 0;
  for (int run = 0; run < n_runs; ++run) {
    EventSet ev = simulate_events(null_model, n_events, derive_stream(seed, (std::uint64_t)run));
    LrtField f = eval.evaluate(ev);
    double c_obs = 0.0;
    for (double w : f.field.values) c_obs = std::max(c_obs, w);
    double p = c_obs > 0.0 ? global_pvalue(c_obs, lkc).pvalue : 1.0;
    if (p <= 0.05) ++reject;
  }
  double frac = (double)reject / n_runs;
  report(8, "null size of the bump hunt", frac >= 0.02 && frac <= 0.09,
         fmt("p <= 0.05 in %d/%d null runs = %.3f (want [0.02, 0.09]), n = 1e4 events, "
             "%.0f s",
             reject, n_runs, frac, now_s() - t0));
}

// ---------------------------------------------------------------------------
// 9. Byte determinism of every file-writing command across thread counts.

int run_cli(const std::string& args) {
  std::string cmd = std::string("\"") + TOHM_CLI_PATH + "\" " + args +
                    " > /tmp/tohm_acc_stdout 2> /tmp/tohm_acc_stderr";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void criterion_9() {
  double t0 = now_s();
  std::string dir = "/tmp/tohm_acceptance_" + std::to_string((long)::getpid());
  std::string mk = "mkdir -p " + dir;
  if (std::system(mk.c_str()) != 0) {
    report(9, "determinism across threads", false, "could not create " + dir);
    return;
  }

  struct Job {
    const char* name;
    const char* command;
    std::string config;
  };
  std::vector<Job> jobs = {
      {"calibrate", "calibrate",
       "[lattice]\naxis1 = 0:10:11\naxis2 = 0:8:9\n[kernel]\nlengthscale = 3\n"
       "[calibrate]\nfamily = gaussian\ntransform = identity\nl0 = 1\n"
       "thresholds = 1 2.5\nn_reps = 60\n[run]\nseed = 99\n"},
      {"simulate-field", "simulate-field",
       "[lattice]\naxis1 = 0:10:11\naxis2 = 0:10:11\nmask = disc 5 5 4\n"
       "[kernel]\nlengthscale = 3\n[field]\ntransform = chibar\n[run]\nseed = 12\n"},
      {"validate", "validate",
       "[lattice]\naxis1 = 0:12:13\naxis2 = 0:12:13\n[kernel]\nlengthscale = 4\n"
       "[validate]\nfamily = gaussian\ntransform = identity\nl0 = 1\ngrid = 2.5 3\n"
       "thresholds = 1 2\nn_calib = 300\nn_tail = 500\n[run]\nseed = 31\n"},
      {"bumphunt", "bumphunt",
       "[lattice]\naxis1 = 0:8:9\naxis2 = 0:6:7\n[bumphunt]\nregion = rect 0 8 0 6\n"
       "nu = 0.5\nthresholds = 1 5\nn_reps = 30\neta = 0.05\ntheta = 4 3\n"
       "n_events = 400\n[run]\nseed = 77\n"},
  };

  bool all_ok = true;
  std::string detail;
  for (const auto& job : jobs) {
    std::string cfg_path = dir + "/" + job.name + ".ini";
    std::ofstream(cfg_path) << job.config;
    std::vector<std::string> outputs;
    bool job_ok = true;
    for (int threads : {1, 2, 4}) {
      std::string out_path = dir + "/" + job.name + "_t" + std::to_string(threads) + ".out";
      int code = run_cli(std::string(job.command) + " --config " + cfg_path + " --threads " +
                         std::to_string(threads) + " --output " + out_path);
      if (code != 0) job_ok = false;
      outputs.push_back(slurp(out_path));
    }
    // And the first setting repeated: reruns may not drift either.
    std::string rerun_path = dir + "/" + job.name + "_rerun.out";
    int code = run_cli(std::string(job.command) + " --config " + cfg_path +
                       " --threads 1 --output " + rerun_path);
    if (code != 0) job_ok = false;
    outputs.push_back(slurp(rerun_path));

    for (std::size_t i = 1; i < outputs.size(); ++i)
      if (outputs[i] != outputs[0] || outputs[0].empty()) job_ok = false;
    if (!job_ok) {
      all_ok = false;
      detail += std::string(job.name) + " drifted; ";
    }
  }
  std::string rm = "rm -rf " + dir;
  if (std::system(rm.c_str()) != 0) detail += "cleanup failed; ";
  report(9, "determinism across threads", all_ok,
         all_ok ? fmt("calibrate, simulate-field, validate, bumphunt each byte-identical "
                      "at --threads 1/2/4 and on rerun, %.0f s",
                      now_s() - t0)
                : detail);
}

}  // namespace

int main() {
  double t0 = now_s();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  std::printf("%d/9 acceptance checks passed, %.0f s total\n", 9 - g_failures, now_s() - t0);
  return g_failures == 0 ? 0 : 1;
}
