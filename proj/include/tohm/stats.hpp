#ifndef TOHM_STATS_HPP
#define TOHM_STATS_HPP

#include "tohm/rng.hpp"

namespace tohm {

/// P(Z > z) for standard normal Z.  erfc-based, relatively accurate far
/// into the tail (good to z ~ 37, i.e. p ~ 1e-300).
double normal_tail(double z);

/// P(Z <= z).
double normal_cdf(double z);

/// Standard normal density.
double normal_pdf(double z);

/// Inverse of normal_tail: the z with P(Z > z) = p, for p in (0, 1).
/// Accurate to ~1e-14 in z across the full double tail range; never computes
/// 1 - p, so p = 1e-30 poses no cancellation problem.
double normal_quantile_upper(double p);

/// Significance of a global p-value in one-sided sigma units,
/// #sigma = Phi^-1(1 - p), computed tail-safely.  Requires 0 < p < 1.
double sigma_significance(double p);

/// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
double gamma_q(double a, double x);

/// P(chi^2_s > c).  c <= 0 gives 1.  s > 0 need not be an integer.
double chi2_tail(double s, double c);

/// P(chi^2_s <= c).
double chi2_cdf(double s, double c);

/// One standard normal draw by inverse-CDF transform of a (0,1) uniform.
/// Deterministic given the generator state, independent of the C++ library's
/// own (unspecified) normal_distribution algorithm.
double standard_normal(SplitMix64& rng);

}  // namespace tohm

#endif
