#ifndef TOHM_OPTIMIZE_HPP
#define TOHM_OPTIMIZE_HPP

#include <cmath>

namespace tohm {

struct BrentResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Brent's bounded scalar minimizer (golden section with parabolic
// interpolation).  Evaluates strictly inside (a, b), so objectives that
// diverge at an endpoint are fine.  xatol is the absolute tolerance on x.
template <class F>
BrentResult brent_minimize(F f, double a, double b, double xatol = 1e-9,
                           int maxiter = 200) {
  const double golden = 0.3819660112501051;  // 2 - phi
  const double eps = 1e-12;

  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x);
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  BrentResult result;
  for (int iter = 0; iter < maxiter; ++iter) {
    double m = 0.5 * (a + b);
    double tol1 = eps * std::fabs(x) + xatol;
    double tol2 = 2.0 * tol1;
    if (std::fabs(x - m) <= tol2 - 0.5 * (b - a)) {
      result.x = x;
      result.fx = fx;
      result.iterations = iter;
      result.converged = true;
      return result;
    }
    bool use_golden = true;
    if (std::fabs(e) > tol1) {
      // Fit a parabola through (v,fv), (w,fw), (x,fx).
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      double e_prev = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * e_prev) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol1 : -tol1;
        use_golden = false;
      }
    }
    if (use_golden) {
      e = (x < m) ? b - x : a - x;
      d = golden * e;
    }
    double u = (std::fabs(d) >= tol1) ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  result.x = x;
  result.fx = fx;
  result.iterations = maxiter;
  result.converged = false;
  return result;
}

}  // namespace tohm

#endif
