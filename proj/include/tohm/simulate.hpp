#ifndef TOHM_SIMULATE_HPP
#define TOHM_SIMULATE_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tohm/lattice.hpp"
#include "tohm/rft.hpp"

namespace tohm {

/// Squared-exponential covariance on physical coordinates with unit
/// marginal variance: k(x, y) = exp(-1/2 sum ((x_k - y_k) / l_k)^2).
/// One length-scale applies to every axis; several give one per axis.
struct SqExpKernel {
  std::vector<double> lengthscales;

  explicit SqExpKernel(double l) : lengthscales{l} {}
  explicit SqExpKernel(std::vector<double> ls) : lengthscales(std::move(ls)) {}

  /// Kernel value between two coordinate vectors of length dims.
  double operator()(const double* a, const double* b, int dims) const;
};

/// Draws mean-zero unit-variance Gaussian random fields on the included
/// points of a lattice.  The dense covariance matrix is factorized once
/// (Cholesky, with additive jitter from 1e-10 doubling to 1e-6 if the
/// plain factorization fails); draws then cost one triangular product.
/// Dense factorization is capped at 4096 points.
class GrfSampler {
 public:
  GrfSampler(LatticePtr lattice, const SqExpKernel& kernel);
  ~GrfSampler();
  GrfSampler(GrfSampler&&) noexcept;
  GrfSampler& operator=(GrfSampler&&) noexcept;

  /// One draw; deterministic in (lattice, kernel, seed).
  FieldSample sample(std::uint64_t seed) const;

  const LatticePtr& lattice() const { return lattice_; }
  double jitter() const { return jitter_; }

 private:
  struct Impl;
  LatticePtr lattice_;
  std::unique_ptr<Impl> impl_;
  double jitter_ = 0.0;
};

/// Convenience wrapper: factorize, draw once.
FieldSample sample_grf(LatticePtr lattice, const SqExpKernel& kernel, std::uint64_t seed);

/// Pointwise w = z^2 1{z >= 0}: the square of the positive part.  Each
/// margin becomes the half-half mixture of zero and a chi-square_1.
FieldSample chibar_transform(const FieldSample& field);

enum class Transform { Identity, ChiBar };

Transform parse_transform(const std::string& text);  // "identity" | "chibar"

/// Monte Carlo estimate of the expected excursion-set Euler characteristic
/// at one threshold.
struct MCEstimate {
  double threshold = 0.0;
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(n_reps)
  int n_reps = 0;
  std::uint64_t master_seed = 0;
};

/// Estimates E[phi(A_c)] at every threshold from n_reps field draws.  All
/// thresholds are evaluated on the same replicates, so estimates at
/// different thresholds are correlated; SEs are per-threshold.  Replicate
/// i uses the stream derived from (master_seed, i), and results are
/// reduced in replicate order, so the output is byte-identical for any
/// thread count.
std::vector<MCEstimate> estimate_expected_ec(LatticePtr lattice, const SqExpKernel& kernel,
                                             Transform transform,
                                             const std::vector<double>& thresholds, int n_reps,
                                             std::uint64_t master_seed, int threads = 1);

/// Empirical tail of the field supremum with binomial standard errors.
struct TailEstimate {
  double threshold = 0.0;
  double prob = 0.0;  // fraction of replicates with max strictly above c
  double se = 0.0;    // sqrt(p (1 - p) / n)
};

std::vector<TailEstimate> empirical_sup_tail(LatticePtr lattice, const SqExpKernel& kernel,
                                             Transform transform,
                                             const std::vector<double>& thresholds, int n_reps,
                                             std::uint64_t master_seed, int threads = 1);

/// One row of the approximation-vs-simulation comparison table.
struct ValidationRow {
  double c = 0.0;
  double empirical_tail = 0.0;
  double empirical_se = 0.0;
  double approx_pvalue = 0.0;  // unclamped expansion value
  double approx_low = 0.0;     // approx_pvalue -+ one propagated SE
  double approx_high = 0.0;
};

struct ValidationResult {
  std::vector<ValidationRow> rows;
  LKCSolution lkc;  // the calibration behind the approximation column
};

/// Calibrates curvatures with n_calib replicates (stream 1 of seed),
/// estimates the empirical sup-tail with n_tail replicates (stream 2),
/// and tabulates both over the threshold grid.
ValidationResult validation_curve(LatticePtr lattice, const SqExpKernel& kernel,
                                  Transform transform, const std::vector<double>& grid,
                                  const std::vector<double>& calib_thresholds, int n_calib,
                                  int n_tail, double l0, const DensityFamily& family,
                                  std::uint64_t seed, int threads = 1);

/// Writes the table as TSV: c, empirical_tail, empirical_se,
/// approx_pvalue, approx_low, approx_high.
void save_validation_table(const std::vector<ValidationRow>& rows, const std::string& path);

}  // namespace tohm

#endif
