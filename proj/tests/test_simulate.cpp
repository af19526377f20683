#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "tohm/errors.hpp"
#include "tohm/rft.hpp"
#include "tohm/simulate.hpp"
#include "tohm/stats.hpp"

using namespace tohm;

namespace {

LatticePtr grid(std::vector<int> sizes) {
  std::vector<std::vector<double>> axes;
  for (int n : sizes) {
    std::vector<double> ax(n);
    for (int i = 0; i < n; ++i) ax[i] = i;
    axes.push_back(ax);
  }
  return std::make_shared<Lattice>(std::move(axes));
}

}  // namespace

TEST_CASE("field draws are deterministic and thread-count independent") {
  auto lat = grid({6, 5});
  SqExpKernel kernel(2.0);

  FieldSample a = sample_grf(lat, kernel, 42);
  FieldSample b = sample_grf(lat, kernel, 42);
  CHECK(a.values == b.values);
  FieldSample c = sample_grf(lat, kernel, 43);
  CHECK(a.values != c.values);

  std::vector<double> thresholds = {0.5, 1.5};
  auto est1 = estimate_expected_ec(lat, kernel, Transform::Identity, thresholds, 40, 7, 1);
  auto est4 = estimate_expected_ec(lat, kernel, Transform::Identity, thresholds, 40, 7, 4);
  REQUIRE(est1.size() == est4.size());
  for (std::size_t k = 0; k < est1.size(); ++k) {
    CHECK(est1[k].mean == est4[k].mean);
    CHECK(est1[k].se == est4[k].se);
    CHECK(est1[k].n_reps == 40);
    CHECK(est1[k].master_seed == 7);
  }

  auto tail1 = empirical_sup_tail(lat, kernel, Transform::ChiBar, {1.0, 4.0}, 200, 9, 1);
  auto tail4 = empirical_sup_tail(lat, kernel, Transform::ChiBar, {1.0, 4.0}, 200, 9, 4);
  for (std::size_t k = 0; k < tail1.size(); ++k) {
    CHECK(tail1[k].prob == tail4[k].prob);
    CHECK(tail1[k].se == tail4[k].se);
  }
}

TEST_CASE("draws have unit margins and kernel-shaped correlation") {
  auto lat = grid({5, 5});
  SqExpKernel kernel(2.0);
  GrfSampler sampler(lat, kernel);

  const int n = 2000;
  const int probes[5] = {0, 6, 12, 18, 24};
  std::vector<std::vector<double>> samples(5, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    FieldSample f = sampler.sample(derive_stream(1234, i));
    for (int p = 0; p < 5; ++p) samples[p][i] = f.values[probes[p]];
  }
  for (int p = 0; p < 5; ++p) {
    double mean = 0.0, ss = 0.0;
    for (double v : samples[p]) mean += v;
    mean /= n;
    for (double v : samples[p]) ss += (v - mean) * (v - mean);
    double var = ss / (n - 1);
    CHECK(var >= 0.94);
    CHECK(var <= 1.06);
  }

  // Correlation between probe 0 = (0,0) and probe 12 = (2,2) against the
  // kernel value for those coordinates.
  double m0 = 0.0, m1 = 0.0;
  for (int i = 0; i < n; ++i) m0 += samples[0][i], m1 += samples[2][i];
  m0 /= n, m1 /= n;
  double c01 = 0.0, v0 = 0.0, v1 = 0.0;
  for (int i = 0; i < n; ++i) {
    c01 += (samples[0][i] - m0) * (samples[2][i] - m1);
    v0 += (samples[0][i] - m0) * (samples[0][i] - m0);
    v1 += (samples[2][i] - m1) * (samples[2][i] - m1);
  }
  double corr = c01 / std::sqrt(v0 * v1);
  double a[2] = {0.0, 0.0}, b[2] = {2.0, 2.0};
  double expected = kernel(a, b, 2);
  CHECK(std::fabs(corr - expected) <= 0.07);
}

TEST_CASE("huge length-scale gives a flat field") {
  auto lat = grid({4, 4});
  SqExpKernel kernel(1e6 * 3.0);
  FieldSample f = sample_grf(lat, kernel, 5);
  auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
  CHECK(*hi - *lo < 1e-2);
}

TEST_CASE("per-axis length-scales stretch correlation anisotropically") {
  SqExpKernel kernel(std::vector<double>{1.0, 10.0});
  double o[2] = {0.0, 0.0}, dx[2] = {2.0, 0.0}, dy[2] = {0.0, 2.0};
  CHECK(kernel(o, dx, 2) < kernel(o, dy, 2));
  CHECK(kernel(o, o, 2) == 1.0);
}

TEST_CASE("chibar transform squares the positive part") {
  auto lat = grid({4});
  FieldSample f{lat, {-1.3, 2.0, 0.0, -0.0}};
  FieldSample w = chibar_transform(f);
  CHECK(w.values[0] == 0.0);
  CHECK(w.values[1] == 4.0);
  CHECK(w.values[2] == 0.0);
  CHECK(w.values[3] == 0.0);
  for (double v : w.values) CHECK(v >= 0.0);

  CHECK(parse_transform("identity") == Transform::Identity);
  CHECK(parse_transform("chibar") == Transform::ChiBar);
  CHECK_THROWS_AS(parse_transform("square"), ValidationError);
}

TEST_CASE("chibar margins are a half-half mixture of zero and chi-square_1") {
  auto lat = grid({3, 3});
  GrfSampler sampler(lat, SqExpKernel(1.5));
  const int n = 2000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) {
    FieldSample w = chibar_transform(sampler.sample(derive_stream(88, i)));
    if (w.values[4] == 0.0) ++zeros;
  }
  double frac = (double)zeros / n;
  CHECK(frac >= 0.47);
  CHECK(frac <= 0.53);
}

TEST_CASE("threshold below every value recovers the region EC exactly") {
  auto lat = grid({7, 4});
  auto est = estimate_expected_ec(lat, SqExpKernel(2.0), Transform::Identity, {-1e6}, 25, 3);
  CHECK(est[0].mean == 1.0);
  CHECK(est[0].se == 0.0);
}

TEST_CASE("standard errors shrink like one over sqrt(n_reps)") {
  auto lat = grid({10, 10});
  SqExpKernel kernel(3.0);
  double xs[3], ys[3];
  int ns[3] = {25, 100, 400};
  for (int t = 0; t < 3; ++t) {
    auto est = estimate_expected_ec(lat, kernel, Transform::Identity, {1.0}, ns[t], 2024);
    xs[t] = std::log((double)ns[t]);
    ys[t] = std::log(est[0].se);
  }
  double xm = (xs[0] + xs[1] + xs[2]) / 3.0, ym = (ys[0] + ys[1] + ys[2]) / 3.0;
  double num = 0.0, den = 0.0;
  for (int t = 0; t < 3; ++t) {
    num += (xs[t] - xm) * (ys[t] - ym);
    den += (xs[t] - xm) * (xs[t] - xm);
  }
  double slope = num / den;
  CHECK(slope >= -0.6);
  CHECK(slope <= -0.4);
}

TEST_CASE("mean excursion EC agrees with the known-kernel curvatures") {
  // For the squared-exponential kernel the scaled curvatures of an
  // axis-aligned rectangle [0,a] x [0,b] are (a+b)/l and ab/l^2.
  auto lat = grid({20, 20});
  const double l = 4.0;
  std::vector<double> lkcs = {38.0 / l, 361.0 / (l * l)};
  double theory = expected_ec(DensityFamily::gaussian(), 1.0, lkcs, 2.0);
  auto est = estimate_expected_ec(lat, SqExpKernel(l), Transform::Identity, {2.0}, 200, 555);
  CHECK(est[0].se > 0.0);
  CHECK(std::fabs(est[0].mean - theory) <= 3.0 * est[0].se);
}

TEST_CASE("sup-tail estimates are exact at trivial thresholds and monotone") {
  auto lat = grid({6, 6});
  std::vector<double> cs = {-1e6, 0.2, 0.8, 1.6, 2.4, 3.5};
  auto tails = empirical_sup_tail(lat, SqExpKernel(2.0), Transform::Identity, cs, 300, 11);
  CHECK(tails[0].prob == 1.0);
  CHECK(tails[0].se == 0.0);
  for (std::size_t k = 1; k < tails.size(); ++k) CHECK(tails[k].prob <= tails[k - 1].prob);
}

TEST_CASE("single-point sup-tail reproduces the chibar marginal law") {
  auto lat = grid({1});
  auto tails = empirical_sup_tail(lat, SqExpKernel(1.0), Transform::ChiBar, {0.5, 2.0}, 2000, 31);
  for (const auto& t : tails) {
    double truth = 0.5 * chi2_tail(1, t.threshold);
    double slack = 3.0 * std::sqrt(truth * (1.0 - truth) / 2000.0);
    CHECK(std::fabs(t.prob - truth) <= slack);
  }
}

TEST_CASE("validation curve pairs simulation with the fitted approximation") {
  auto lat = grid({12, 12});
  SqExpKernel kernel(3.0);
  std::vector<double> cgrid = {2.0, 4.0, 6.0, 8.0};
  ValidationResult res =
      validation_curve(lat, kernel, Transform::ChiBar, cgrid, {1.0, 4.0}, 80, 200, 1.0,
                       DensityFamily::chi_bar01(), 99);
  REQUIRE(res.rows.size() == 4);
  CHECK(res.lkc.lkcs.size() == 2);
  for (std::size_t k = 0; k < res.rows.size(); ++k) {
    const auto& r = res.rows[k];
    CHECK(r.c == cgrid[k]);
    CHECK(r.approx_low <= r.approx_pvalue);
    CHECK(r.approx_pvalue <= r.approx_high);
    if (k > 0) {
      CHECK(r.empirical_tail <= res.rows[k - 1].empirical_tail);
      CHECK(r.approx_pvalue < res.rows[k - 1].approx_pvalue);
    }
  }

  const std::string path = "/tmp/tohm_validation_test.tsv";
  save_validation_table(res.rows, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  int data_lines = 0, comment_lines = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      ++comment_lines;
      continue;
    }
    ++data_lines;
    std::istringstream row(line);
    double v;
    int cols = 0;
    while (row >> v) ++cols;
    CHECK(cols == 6);
  }
  CHECK(comment_lines == 2);
  CHECK(data_lines == 4);
  std::remove(path.c_str());
}

TEST_CASE("simulation input validation") {
  auto lat = grid({4, 4});
  SqExpKernel kernel(2.0);
  CHECK_THROWS_AS(estimate_expected_ec(lat, kernel, Transform::Identity, {}, 10, 1),
                  ValidationError);
  CHECK_THROWS_AS(estimate_expected_ec(lat, kernel, Transform::Identity, {1.0}, 1, 1),
                  ValidationError);
  CHECK_THROWS_AS(empirical_sup_tail(lat, kernel, Transform::Identity, {1.0}, 99, 1),
                  ValidationError);
  CHECK_THROWS_AS(SqExpKernel bad(0.0); GrfSampler(lat, bad), ValidationError);
  CHECK_THROWS_AS(SqExpKernel bad(-1.0); GrfSampler(lat, bad), ValidationError);
  CHECK_THROWS_AS(SqExpKernel bad(std::vector<double>{1.0, 2.0, 3.0}); GrfSampler(lat, bad),
                  ValidationError);
  CHECK_THROWS_AS(GrfSampler(grid({65, 65}), kernel), ValidationError);
  CHECK_THROWS_AS(validation_curve(lat, kernel, Transform::ChiBar, {}, {1.0, 2.0}, 10, 100, 1.0,
                                   DensityFamily::chi_bar01(), 1),
                  ValidationError);
  CHECK_THROWS_AS(validation_curve(lat, kernel, Transform::ChiBar, {2.0}, {1.0}, 10, 100, 1.0,
                                   DensityFamily::chi_bar01(), 1),
                  ValidationError);
}
