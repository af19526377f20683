#ifndef TOHM_RFT_HPP
#define TOHM_RFT_HPP

#include <string>
#include <vector>

namespace tohm {

/// Marginal law of the random field whose excursion-set geometry is being
/// summarized.  Each family carries closed-form Euler-characteristic
/// densities rho_d(c) up to a family-specific dimension:
///
///   Gaussian    d = 0..5
///   ChiSquare   d = 0..3   (s >= 1 degrees of freedom; c > 0 for d >= 1)
///   ChiBar01    d = 0..3   (the half-half mixture delta_0 / chi-square_1
///                           realized by Z^2 1{Z >= 0}; densities are half
///                           the chi-square_1 ones for c > 0)
struct DensityFamily {
  enum class Kind { Gaussian, ChiSquare, ChiBar01 };

  Kind kind = Kind::Gaussian;
  int dof = 0;  // ChiSquare only

  static DensityFamily gaussian() { return {Kind::Gaussian, 0}; }
  static DensityFamily chi_square(int s);
  static DensityFamily chi_bar01() { return {Kind::ChiBar01, 0}; }

  /// Largest d with a closed-form density for this family.
  int max_density_dim() const;

  /// Short stable token: "gaussian", "chisq:<s>", "chibar01".  parse()
  /// accepts exactly these.
  std::string name() const;
  static DensityFamily parse(const std::string& text);

  bool operator==(const DensityFamily& o) const {
    return kind == o.kind && dof == o.dof;
  }
};

/// EC density rho_d(c).  rho_0 is the marginal upper-tail probability
/// P(W > c).  Unsupported d or out-of-range c raise ValidationError.
double ec_density(const DensityFamily& family, int d, double c);

/// E[phi(A_c)] = l0 * rho_0(c) + sum_d lkcs[d-1] * rho_d(c), the curvature
/// expansion of the expected excursion-set Euler characteristic.
double expected_ec(const DensityFamily& family, double l0,
                   const std::vector<double>& lkcs, double c);

/// Lipschitz-Killing curvatures fitted from Monte Carlo EC estimates.
struct LKCSolution {
  DensityFamily family;
  double l0 = 1.0;                  // EC of the search region, user supplied
  std::vector<double> thresholds;   // c_1..c_D used in the fit
  std::vector<double> lkcs;         // L_1..L_D
  std::vector<double> covariance;   // D x D, row-major
  double condition_number = 0.0;    // of the density matrix
  bool condition_warning = false;   // condition_number above the bound
};

/// Solves the D x D linear system M L = b for the curvatures, where
/// M[k][d-1] = rho_d(c_k) and b[k] = ec_mean[k] - l0 * rho_0(c_k), and
/// propagates the estimates' standard errors exactly through the linear
/// map: covariance = M^-1 diag(se^2) M^-T.  Thresholds must be pairwise
/// distinct and exactly D = len(thresholds) curvatures are produced.
/// A condition number above cond_warn_bound sets condition_warning.
LKCSolution solve_lkc(const DensityFamily& family, double l0,
                      const std::vector<double>& thresholds,
                      const std::vector<double>& ec_means,
                      const std::vector<double>& ec_ses,
                      double cond_warn_bound = 1e8);

/// Global p-value approximation at the observed statistic c.  The point
/// value is the expected EC; it is an approximation (the expected EC is
/// not an upper bound for the tail probability).  pvalue is clamped to
/// [0, 1] for reporting; pvalue_raw keeps the unclamped expansion value,
/// and [mc_low, mc_high] = raw +- one standard error from the curvature
/// covariance.  sigma is the normal-quantile significance of the raw
/// value when it lies in (0, 1), +inf below, -inf above.
struct PValueReport {
  double c = 0.0;
  double pvalue = 0.0;
  double pvalue_raw = 0.0;
  double sigma = 0.0;
  double se = 0.0;
  double mc_low = 0.0;
  double mc_high = 0.0;
  LKCSolution lkc;
};

PValueReport global_pvalue(double c, const LKCSolution& lkc);

/// Tab-separated on-disk record of an LKCSolution:
///
///   # tohm-lkc v1
///   family      <token>
///   l0          <value>
///   thresholds  <c_1> ... <c_D>
///   lkcs        <L_1> ... <L_D>
///   cov         <D*D values, row-major>
void save_lkc(const LKCSolution& lkc, const std::string& path);
LKCSolution load_lkc(const std::string& path);

}  // namespace tohm

#endif
