#include "tohm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "tohm/errors.hpp"
#include "tohm/euler.hpp"
#include "tohm/field_io.hpp"
#include "tohm/parallel.hpp"
#include "tohm/rng.hpp"
#include "tohm/stats.hpp"

namespace tohm {

namespace {

// Cap for the dense covariance factorization; quadratic memory and cubic
// factorization time make larger lattices a different engineering problem.
constexpr std::int64_t kMaxDensePoints = 4096;

void check_kernel(const SqExpKernel& kernel, int dims) {
  const auto& ls = kernel.lengthscales;
  if (ls.size() != 1 && (int)ls.size() != dims)
    throw ValidationError("kernel: need one length-scale or one per axis (" +
                          std::to_string(dims) + "), got " + std::to_string(ls.size()));
  for (double l : ls)
    if (!(l > 0.0) || !std::isfinite(l))
      throw ValidationError("kernel: length-scales must be positive and finite");
}

}  // namespace

double SqExpKernel::operator()(const double* a, const double* b, int dims) const {
  double q = 0.0;
  for (int k = 0; k < dims; ++k) {
    double l = lengthscales[lengthscales.size() == 1 ? 0 : k];
    double t = (a[k] - b[k]) / l;
    q += t * t;
  }
  return std::exp(-0.5 * q);
}

struct GrfSampler::Impl {
  Eigen::MatrixXd chol;  // lower-triangular factor of K (+ jitter I)
};

GrfSampler::GrfSampler(LatticePtr lattice, const SqExpKernel& kernel)
    : lattice_(std::move(lattice)), impl_(new Impl) {
  if (!lattice_) throw ValidationError("grf sampler: missing lattice");
  const std::int64_t R = lattice_->size();
  if (R > kMaxDensePoints)
    throw ValidationError("grf sampler: dense factorization is capped at " +
                          std::to_string(kMaxDensePoints) + " points, lattice has " +
                          std::to_string(R));
  const int dims = lattice_->dims();
  check_kernel(kernel, dims);

  std::vector<double> coords((std::size_t)R * dims);
  for (std::int64_t r = 0; r < R; ++r) {
    auto c = lattice_->coords(r);
    std::copy(c.begin(), c.end(), coords.begin() + (std::size_t)r * dims);
  }

  Eigen::MatrixXd K(R, R);
  for (std::int64_t i = 0; i < R; ++i) {
    K(i, i) = 1.0;
    for (std::int64_t j = 0; j < i; ++j) {
      double v = kernel(&coords[(std::size_t)i * dims], &coords[(std::size_t)j * dims], dims);
      K(i, j) = v;
      K(j, i) = v;
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(K);
  double jitter = 0.0;
  while (llt.info() != Eigen::Success && jitter < 1e-6) {
    jitter = jitter == 0.0 ? 1e-10 : jitter * 2.0;
    llt.compute(K + jitter * Eigen::MatrixXd::Identity(R, R));
  }
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K, Eigen::EigenvaluesOnly);
    double lmin = eig.info() == Eigen::Success ? eig.eigenvalues().minCoeff()
                                               : std::numeric_limits<double>::quiet_NaN();
    throw NumericError("grf sampler: covariance factorization failed even with jitter 1e-6"
                       "; smallest eigenvalue is about " +
                       format_double(lmin));
  }
  jitter_ = jitter;
  impl_->chol = llt.matrixL();
}

GrfSampler::~GrfSampler() = default;
GrfSampler::GrfSampler(GrfSampler&&) noexcept = default;
GrfSampler& GrfSampler::operator=(GrfSampler&&) noexcept = default;

FieldSample GrfSampler::sample(std::uint64_t seed) const {
  const std::int64_t R = lattice_->size();
  SplitMix64 rng(seed);
  Eigen::VectorXd z(R);
  for (std::int64_t i = 0; i < R; ++i) z(i) = standard_normal(rng);
  Eigen::VectorXd v = impl_->chol * z;
  FieldSample out{lattice_, std::vector<double>(v.data(), v.data() + R)};
  return out;
}

FieldSample sample_grf(LatticePtr lattice, const SqExpKernel& kernel, std::uint64_t seed) {
  return GrfSampler(std::move(lattice), kernel).sample(seed);
}

FieldSample chibar_transform(const FieldSample& field) {
  FieldSample out{field.lattice, field.values};
  for (double& v : out.values) v = v >= 0.0 ? v * v : 0.0;
  return out;
}

Transform parse_transform(const std::string& text) {
  if (text == "identity") return Transform::Identity;
  if (text == "chibar") return Transform::ChiBar;
  throw ValidationError("unknown transform '" + text + "' (expected identity or chibar)");
}

namespace {

FieldSample apply_transform(Transform transform, FieldSample field) {
  return transform == Transform::ChiBar ? chibar_transform(field) : field;
}

}  // namespace

std::vector<MCEstimate> estimate_expected_ec(LatticePtr lattice, const SqExpKernel& kernel,
                                             Transform transform,
                                             const std::vector<double>& thresholds, int n_reps,
                                             std::uint64_t master_seed, int threads) {
  if (thresholds.empty()) throw ValidationError("estimate_expected_ec: no thresholds");
  if (n_reps < 2) throw ValidationError("estimate_expected_ec: need n_reps >= 2");
  GrfSampler sampler(std::move(lattice), kernel);

  const std::size_t K = thresholds.size();
  std::vector<double> ecs((std::size_t)n_reps * K);
  parallel_for(n_reps, threads, [&](std::int64_t i) {
    FieldSample w = apply_transform(transform, sampler.sample(derive_stream(master_seed, i)));
    for (std::size_t k = 0; k < K; ++k)
      ecs[(std::size_t)i * K + k] = (double)euler_characteristic(w, thresholds[k]).ec;
  });

  std::vector<MCEstimate> out(K);
  for (std::size_t k = 0; k < K; ++k) {
    double mean = 0.0;
    for (int i = 0; i < n_reps; ++i) mean += ecs[(std::size_t)i * K + k];
    mean /= n_reps;
    double ss = 0.0;
    for (int i = 0; i < n_reps; ++i) {
      double d = ecs[(std::size_t)i * K + k] - mean;
      ss += d * d;
    }
    out[k].threshold = thresholds[k];
    out[k].mean = mean;
    out[k].se = std::sqrt(ss / (n_reps - 1)) / std::sqrt((double)n_reps);
    out[k].n_reps = n_reps;
    out[k].master_seed = master_seed;
  }
  return out;
}

std::vector<TailEstimate> empirical_sup_tail(LatticePtr lattice, const SqExpKernel& kernel,
                                             Transform transform,
                                             const std::vector<double>& thresholds, int n_reps,
                                             std::uint64_t master_seed, int threads) {
  if (thresholds.empty()) throw ValidationError("empirical_sup_tail: no thresholds");
  if (n_reps < 100) throw ValidationError("empirical_sup_tail: need n_reps >= 100");
  GrfSampler sampler(std::move(lattice), kernel);

  std::vector<double> maxima(n_reps);
  parallel_for(n_reps, threads, [&](std::int64_t i) {
    FieldSample w = apply_transform(transform, sampler.sample(derive_stream(master_seed, i)));
    maxima[i] = *std::max_element(w.values.begin(), w.values.end());
  });

  std::vector<TailEstimate> out(thresholds.size());
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    std::int64_t hits = 0;
    for (double m : maxima)
      if (m > thresholds[k]) ++hits;
    double p = (double)hits / n_reps;
    out[k].threshold = thresholds[k];
    out[k].prob = p;
    out[k].se = std::sqrt(p * (1.0 - p) / n_reps);
  }
  return out;
}

ValidationResult validation_curve(LatticePtr lattice, const SqExpKernel& kernel,
                                  Transform transform, const std::vector<double>& grid,
                                  const std::vector<double>& calib_thresholds, int n_calib,
                                  int n_tail, double l0, const DensityFamily& family,
                                  std::uint64_t seed, int threads) {
  if (!lattice) throw ValidationError("validation_curve: missing lattice");
  if (grid.empty()) throw ValidationError("validation_curve: empty threshold grid");
  if ((int)calib_thresholds.size() != lattice->dims())
    throw ValidationError("validation_curve: need one calibration threshold per lattice "
                          "dimension (" +
                          std::to_string(lattice->dims()) + "), got " +
                          std::to_string(calib_thresholds.size()));

  auto estimates = estimate_expected_ec(lattice, kernel, transform, calib_thresholds, n_calib,
                                        derive_stream(seed, 1), threads);
  std::vector<double> means, ses;
  for (const auto& e : estimates) {
    means.push_back(e.mean);
    ses.push_back(e.se);
  }
  LKCSolution lkc = solve_lkc(family, l0, calib_thresholds, means, ses);

  auto tails =
      empirical_sup_tail(lattice, kernel, transform, grid, n_tail, derive_stream(seed, 2), threads);

  ValidationResult out;
  out.lkc = lkc;
  out.rows.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    PValueReport rep = global_pvalue(grid[k], lkc);
    out.rows[k].c = grid[k];
    out.rows[k].empirical_tail = tails[k].prob;
    out.rows[k].empirical_se = tails[k].se;
    out.rows[k].approx_pvalue = rep.pvalue_raw;
    out.rows[k].approx_low = rep.mc_low;
    out.rows[k].approx_high = rep.mc_high;
  }
  return out;
}

void save_validation_table(const std::vector<ValidationRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "# tohm-validation v1\n";
  out << "# c\tempirical_tail\tempirical_se\tapprox_pvalue\tapprox_low\tapprox_high\n";
  for (const auto& r : rows) {
    out << format_double(r.c) << "\t" << format_double(r.empirical_tail) << "\t"
        << format_double(r.empirical_se) << "\t" << format_double(r.approx_pvalue) << "\t"
        << format_double(r.approx_low) << "\t" << format_double(r.approx_high) << "\n";
  }
  if (!out) throw Error("failed while writing '" + path + "'");
}

}  // namespace tohm
