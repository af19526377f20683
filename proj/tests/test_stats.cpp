#include "doctest.h"

#include <cmath>

#include "tohm/errors.hpp"
#include "tohm/optimize.hpp"
#include "tohm/rng.hpp"
#include "tohm/stats.hpp"

using namespace tohm;

// Reference values computed with 50-digit extended-precision arithmetic.

TEST_CASE("normal tail against extended-precision references") {
  struct Row { double z, tail; };
  const Row rows[] = {
      {0.0, 0.5},
      {0.5, 0.30853753872598690},
      {1.0, 0.15865525393145705},
      {1.645, 0.049984905539121365},
      {2.0, 0.022750131948179207},
      {2.5, 0.0062096653257761352},
      {3.0, 0.0013498980316300945},
      {5.0, 2.8665157187919391e-7},
      {8.0, 6.2209605742717841e-16},
      {10.629, 1.0922104994253067e-26},
      {11.0, 1.9106595744986757e-28},
  };
  for (const auto& row : rows)
    CHECK(normal_tail(row.z) == doctest::Approx(row.tail).epsilon(1e-13));
}

TEST_CASE("normal quantile against extended-precision references") {
  CHECK(normal_quantile_upper(0.5) == 0.0);
  CHECK(normal_quantile_upper(0.05) == doctest::Approx(1.6448536269514727).epsilon(1e-12));
  CHECK(normal_quantile_upper(1.3499e-3) == doctest::Approx(2.9999995558583211).epsilon(1e-12));
  CHECK(normal_quantile_upper(1.092e-26) == doctest::Approx(10.629017977573756).epsilon(1e-12));
  CHECK(normal_quantile_upper(1e-30) == doctest::Approx(11.464024688443616).epsilon(1e-12));
  // Lower half by symmetry.
  CHECK(normal_quantile_upper(0.95) == doctest::Approx(-1.6448536269514727).epsilon(1e-12));
}

TEST_CASE("quantile/tail round trip across the working range") {
  for (double z = 0.0; z <= 11.0 + 1e-12; z += 0.01) {
    double p = normal_tail(z);
    CHECK(std::fabs(normal_quantile_upper(p) - z) <= 1e-6);
  }
}

TEST_CASE("sigma significance basics and domain") {
  CHECK(sigma_significance(0.5) == 0.0);
  CHECK(sigma_significance(1.3498980316300945e-3) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sigma_significance(1.092e-26) == doctest::Approx(10.629017977573756).epsilon(1e-12));
  CHECK_THROWS_AS(sigma_significance(0.0), ValidationError);
  CHECK_THROWS_AS(sigma_significance(1.0), ValidationError);
  CHECK_THROWS_AS(sigma_significance(-0.1), ValidationError);
  CHECK_THROWS_AS(sigma_significance(1.5), ValidationError);
}

TEST_CASE("chi-square tail against extended-precision references") {
  struct Row { double s, c, tail; };
  const Row rows[] = {
      {1, 4, 0.045500263896358414},
      {1, 1, 0.31731050786291410},
      {1, 24, 9.6335700864309459e-7},
      {2, 5, 0.082084998623898795},
      {3, 2.5, 0.47529108334302059},
      {5, 7.3, 0.19926778992124203},
      {4, 9.1, 0.058647984330382235},
  };
  for (const auto& row : rows)
    CHECK(chi2_tail(row.s, row.c) == doctest::Approx(row.tail).epsilon(1e-12));
  CHECK(chi2_tail(3.0, 0.0) == 1.0);
  CHECK(chi2_tail(3.0, -2.0) == 1.0);
  CHECK_THROWS_AS(chi2_tail(0.0, 1.0), ValidationError);
}

TEST_CASE("chi-square tail matches closed forms for small integer dof") {
  for (double c = 0.25; c < 30.0; c += 0.816) {
    // s = 1: folded normal; s = 2: exponential; s = 3, 4: one step of the
    // recurrence.  All independent of the incomplete-gamma series.
    CHECK(chi2_tail(1, c) == doctest::Approx(2.0 * normal_tail(std::sqrt(c))).epsilon(1e-12));
    CHECK(chi2_tail(2, c) == doctest::Approx(std::exp(-0.5 * c)).epsilon(1e-12));
    double s3 = 2.0 * normal_tail(std::sqrt(c)) +
                std::sqrt(2.0 * c / M_PI) * std::exp(-0.5 * c);
    CHECK(chi2_tail(3, c) == doctest::Approx(s3).epsilon(1e-12));
    CHECK(chi2_tail(4, c) == doctest::Approx(std::exp(-0.5 * c) * (1.0 + 0.5 * c)).epsilon(1e-12));
  }
}

TEST_CASE("stream derivation is pure and collision-free in practice") {
  CHECK(derive_stream(42, 0) == derive_stream(42, 0));
  CHECK(derive_stream(42, 0) != derive_stream(42, 1));
  CHECK(derive_stream(42, 0) != derive_stream(43, 0));
  // No repeats among a block of consecutive streams.
  std::uint64_t seen[256];
  for (int i = 0; i < 256; ++i) seen[i] = derive_stream(7, i);
  for (int i = 0; i < 256; ++i)
    for (int j = i + 1; j < 256; ++j) CHECK(seen[i] != seen[j]);
}

TEST_CASE("normal draws reproduce and have sane moments") {
  SplitMix64 a(derive_stream(99, 5)), b(derive_stream(99, 5));
  for (int i = 0; i < 32; ++i) CHECK(standard_normal(a) == standard_normal(b));

  SplitMix64 rng(derive_stream(99, 6));
  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = standard_normal(rng);
    sum += z;
    sum2 += z * z;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::fabs(mean) < 0.03);
  CHECK(std::fabs(var - 1.0) < 0.05);
}

TEST_CASE("bounded Brent minimizer") {
  auto quad = [](double x) { return (x - 0.3) * (x - 0.3); };
  auto res = brent_minimize(quad, 0.0, 1.0);
  CHECK(res.converged);
  CHECK(res.x == doctest::Approx(0.3).epsilon(1e-7));

  // Objective diverging at the upper bound; endpoints are never evaluated.
  auto steep = [](double x) { return -std::log(1.0 - x) * 0.001 + (x - 0.6) * (x - 0.6); };
  res = brent_minimize(steep, 0.0, 1.0);
  CHECK(res.converged);
  CHECK(std::fabs(res.x - 0.6) < 0.01);

  // Minimum at the lower boundary of the interval.
  auto rising = [](double x) { return x; };
  res = brent_minimize(rising, 0.0, 1.0, 1e-10);
  CHECK(res.converged);
  CHECK(res.x < 1e-8);
}
