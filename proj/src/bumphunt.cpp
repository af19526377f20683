#include "tohm/bumphunt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tohm/errors.hpp"
#include "tohm/euler.hpp"
#include "tohm/field_io.hpp"
#include "tohm/optimize.hpp"
#include "tohm/parallel.hpp"
#include "tohm/rng.hpp"
#include "tohm/stats.hpp"

namespace tohm {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Bump terms are dropped beyond this many widths from the evaluation
// point; exp(-8^2/2) ~ 1.3e-14 relative to the peak.
constexpr double kFarWidths = 8.0;

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ValidationError(std::string(what) + " must be finite");
}

std::string point_str(double x, double y) {
  return "(" + format_double(x) + ", " + format_double(y) + ")";
}

}  // namespace

Region Region::rectangle(double x0, double x1, double y0, double y1) {
  check_finite(x0, "rectangle bound");
  check_finite(x1, "rectangle bound");
  check_finite(y0, "rectangle bound");
  check_finite(y1, "rectangle bound");
  if (!(x0 < x1) || !(y0 < y1))
    throw ValidationError("rectangle bounds must satisfy x0 < x1 and y0 < y1");
  Region r;
  r.kind = Kind::Rectangle;
  r.x0 = x0;
  r.x1 = x1;
  r.y0 = y0;
  r.y1 = y1;
  return r;
}

Region Region::disc(double cx, double cy, double radius) {
  check_finite(cx, "disc center");
  check_finite(cy, "disc center");
  check_finite(radius, "disc radius");
  if (!(radius > 0.0)) throw ValidationError("disc radius must be positive");
  Region r;
  r.kind = Kind::Disc;
  r.cx = cx;
  r.cy = cy;
  r.radius = radius;
  r.x0 = cx - radius;
  r.x1 = cx + radius;
  r.y0 = cy - radius;
  r.y1 = cy + radius;
  return r;
}

bool Region::contains(double x, double y) const {
  if (kind == Kind::Rectangle) return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  double dx = x - cx, dy = y - cy;
  return dx * dx + dy * dy <= radius * radius;
}

double Region::area() const {
  if (kind == Kind::Rectangle) return (x1 - x0) * (y1 - y0);
  return 0.5 * kTwoPi * radius * radius;
}

BumpModel::BumpModel(Region region_in, double nu_in, double eta_in, double theta1_in,
                     double theta2_in)
    : region(region_in), nu(nu_in), eta(eta_in), theta1(theta1_in), theta2(theta2_in) {
  check_finite(nu, "nu");
  check_finite(eta, "eta");
  check_finite(theta1, "theta");
  check_finite(theta2, "theta");
  if (!(nu > 0.0)) throw ValidationError("nu must be positive");
  if (eta < 0.0 || eta > 1.0) throw ValidationError("eta must lie in [0, 1]");
  if (!region.contains(theta1, theta2))
    throw ValidationError("theta " + point_str(theta1, theta2) + " lies outside the region");
}

namespace {

// Gaussian x-marginal density times the y-slice probability of the disc
// chord at x.
double disc_slice(const Region& disc, double tx, double ty, double nu, double x) {
  double dx = x - disc.cx;
  double h2 = disc.radius * disc.radius - dx * dx;
  if (h2 <= 0.0) return 0.0;
  double h = std::sqrt(h2);
  double zx = (x - tx) / nu;
  double marginal = std::exp(-0.5 * zx * zx) / (nu * std::sqrt(kTwoPi));
  double slice = normal_cdf((disc.cy + h - ty) / nu) - normal_cdf((disc.cy - h - ty) / nu);
  return marginal * slice;
}

double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double eps, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(fa, flm, fm, a, m);
  double right = simpson(fm, frm, fb, m, b);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double eps) {
  if (!(a < b)) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = simpson(fa, fm, fb, a, b);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, eps, 48);
}

}  // namespace

double gaussian_region_mass(const Region& region, double tx, double ty, double nu) {
  check_finite(tx, "center");
  check_finite(ty, "center");
  check_finite(nu, "nu");
  if (!(nu > 0.0)) throw ValidationError("nu must be positive");

  double mass;
  if (region.kind == Region::Kind::Rectangle) {
    double px = normal_cdf((region.x1 - tx) / nu) - normal_cdf((region.x0 - tx) / nu);
    double py = normal_cdf((region.y1 - ty) / nu) - normal_cdf((region.y0 - ty) / nu);
    mass = px * py;
  } else {
    // The x-marginal beyond ~9.5 widths carries < 1e-21 mass, so clip the
    // slice integral to the window that matters and split it at the mode.
    double lo = std::max(region.x0, tx - 9.5 * nu);
    double hi = std::min(region.x1, tx + 9.5 * nu);
    auto f = [&](double x) { return disc_slice(region, tx, ty, nu, x); };
    if (lo >= hi) {
      mass = 0.0;
    } else if (tx > lo && tx < hi) {
      mass = integrate(f, lo, tx, 0.5e-12) + integrate(f, tx, hi, 0.5e-12);
    } else {
      mass = integrate(f, lo, hi, 1e-12);
    }
  }
  return std::min(1.0, std::max(0.0, mass));
}

EventSet simulate_events(const BumpModel& model, int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("event count must be at least 1");
  const Region& reg = model.region;
  if (model.eta > 0.0) {
    double mass = gaussian_region_mass(reg, model.theta1, model.theta2, model.nu);
    if (mass < 1e-6)
      throw ValidationError("bump mass inside the region is " + format_double(mass) +
                            "; the rejection sampler would stall");
  }

  constexpr long kMaxAttempts = 10000000;
  SplitMix64 rng(seed);
  EventSet events;
  events.x.reserve(static_cast<std::size_t>(n));
  events.y.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    bool bump = rng.uniform01() < model.eta;
    double x = 0.0, y = 0.0;
    long attempt = 0;
    for (;; ++attempt) {
      if (attempt >= kMaxAttempts)
        throw NumericError("rejection sampler exceeded the attempt limit");
      if (bump) {
        x = model.theta1 + model.nu * standard_normal(rng);
        y = model.theta2 + model.nu * standard_normal(rng);
      } else {
        x = reg.x0 + (reg.x1 - reg.x0) * rng.uniform01();
        y = reg.y0 + (reg.y1 - reg.y0) * rng.uniform01();
      }
      if (reg.contains(x, y)) break;
    }
    events.x.push_back(x);
    events.y.push_back(y);
  }
  return events;
}

void save_events(const EventSet& events, const std::string& path) {
  if (events.x.size() != events.y.size())
    throw ValidationError("event coordinate arrays differ in length");
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << "# tohm-events v1\n";
  for (std::size_t i = 0; i < events.x.size(); ++i)
    out << format_double(events.x[i]) << '\t' << format_double(events.y[i]) << '\n';
  if (!out) throw ValidationError("failed writing events to '" + path + "'");
}

EventSet load_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open events file '" + path + "'");
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  ++lineno;
  if (line.rfind("# tohm-events v1", 0) != 0)
    throw ParseError(path, lineno, "missing '# tohm-events v1' header");

  EventSet events;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tx, ty, extra;
    if (!(ls >> tx)) continue;  // blank line
    if (!(ls >> ty)) throw ParseError(path, lineno, "expected two coordinates");
    if (ls >> extra) throw ParseError(path, lineno, "trailing token '" + extra + "'");
    char* end = nullptr;
    double x = std::strtod(tx.c_str(), &end);
    if (end != tx.c_str() + tx.size() || !std::isfinite(x))
      throw ParseError(path, lineno, "malformed coordinate '" + tx + "'");
    double y = std::strtod(ty.c_str(), &end);
    if (end != ty.c_str() + ty.size() || !std::isfinite(y))
      throw ParseError(path, lineno, "malformed coordinate '" + ty + "'");
    events.x.push_back(x);
    events.y.push_back(y);
  }
  return events;
}

LrtEvaluator::LrtEvaluator(LatticePtr lattice, const Region& region, double nu)
    : lattice_(std::move(lattice)), region_(region), nu_(nu) {
  if (!lattice_) throw ValidationError("lattice must not be null");
  if (lattice_->dims() != 2) throw ValidationError("the bump hunt is two-dimensional");
  check_finite(nu_, "nu");
  if (!(nu_ > 0.0)) throw ValidationError("nu must be positive");

  std::size_t n = lattice_->size();
  px_.resize(n);
  py_.resize(n);
  scale_.resize(n);
  double area = region_.area();
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> xy = lattice_->coords(r);
    if (!region_.contains(xy[0], xy[1]))
      throw ValidationError("lattice point " + point_str(xy[0], xy[1]) +
                            " lies outside the region");
    double mass = gaussian_region_mass(region_, xy[0], xy[1], nu_);
    double k = kTwoPi * nu_ * nu_ * mass;
    if (!(k > 0.0))
      throw NumericError("bump normalizer vanished at " + point_str(xy[0], xy[1]));
    px_[r] = xy[0];
    py_[r] = xy[1];
    scale_[r] = area / k;
  }
}

LrtField LrtEvaluator::evaluate(const EventSet& events, int threads) const {
  if (events.x.size() != events.y.size())
    throw ValidationError("event coordinate arrays differ in length");
  std::size_t n = events.size();
  if (n == 0) throw ValidationError("event set must not be empty");
  for (std::size_t i = 0; i < n; ++i)
    if (!region_.contains(events.x[i], events.y[i]))
      throw ValidationError("event " + std::to_string(i) + " at " +
                            point_str(events.x[i], events.y[i]) +
                            " lies outside the region");

  const double inv_two_nu2 = 1.0 / (2.0 * nu_ * nu_);
  const double far_q = 0.5 * kFarWidths * kFarWidths;
  std::size_t points = lattice_->size();

  LrtField out;
  out.field.lattice = lattice_;
  out.field.values.assign(points, 0.0);
  out.eta_hat.assign(points, 0.0);

  parallel_for(static_cast<std::int64_t>(points), threads, [&](std::int64_t r) {
    double tx = px_[r], ty = py_[r], s = scale_[r];
    std::vector<double> a;
    long n_far = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double dx = events.x[i] - tx;
      double dy = events.y[i] - ty;
      double q = (dx * dx + dy * dy) * inv_two_nu2;
      if (q > far_q)
        ++n_far;
      else
        a.push_back(std::exp(-q) * s - 1.0);
    }
    // Summing in sorted order makes the result an exact function of the
    // event multiset, so reordering a dataset cannot move any bit.
    std::sort(a.begin(), a.end());
    double score = 0.0;
    for (double ai : a) score += ai;
    score -= static_cast<double>(n_far);
    if (score <= 0.0) return;  // concave profile peaks at eta = 0

    double far = static_cast<double>(n_far);
    auto neg_profile = [&](double eta) {
      double l = far * std::log1p(-eta);
      for (double ai : a) l += std::log1p(eta * ai);
      return -l;
    };
    BrentResult opt = brent_minimize(neg_profile, 0.0, 1.0, 1e-9, 200);
    if (!opt.converged)
      throw NumericError("eta profile failed to converge at " + point_str(tx, ty));
    out.field.values[r] = std::max(0.0, -2.0 * opt.fx);
    out.eta_hat[r] = opt.x;
  });
  return out;
}

LrtField lrt_field(const EventSet& events, LatticePtr lattice, const Region& region,
                   double nu, int threads) {
  LrtEvaluator evaluator(std::move(lattice), region, nu);
  return evaluator.evaluate(events, threads);
}

CalibMode parse_calib_mode(const std::string& text) {
  if (text == "kernel") return CalibMode::Kernel;
  if (text == "exact") return CalibMode::Exact;
  throw ValidationError("unknown calibration mode '" + text + "' (use kernel or exact)");
}

BumpHuntResult bump_hunt_pipeline(const EventSet& events, LatticePtr lattice,
                                  const Region& region, double nu,
                                  const BumpCalibration& calib, std::uint64_t seed,
                                  int threads) {
  if (calib.thresholds.empty()) throw ValidationError("calibration needs thresholds");
  for (std::size_t i = 0; i < calib.thresholds.size(); ++i) {
    double c = calib.thresholds[i];
    check_finite(c, "threshold");
    if (!(c > 0.0)) throw ValidationError("calibration thresholds must be positive");
    for (std::size_t j = i + 1; j < calib.thresholds.size(); ++j)
      if (c == calib.thresholds[j])
        throw ValidationError("calibration thresholds must be distinct");
  }
  if (calib.n_reps < 2) throw ValidationError("calibration needs at least 2 replicates");

  LrtEvaluator evaluator(lattice, region, nu);
  BumpHuntResult result;
  result.observed = evaluator.evaluate(events, threads);

  const std::vector<double>& w = result.observed.field.values;
  std::size_t best = 0;
  for (std::size_t r = 1; r < w.size(); ++r)
    if (w[r] > w[best]) best = r;
  double c_obs = w[best];
  result.argmax = lattice->coords(best);
  result.eta_hat = result.observed.eta_hat[best];

  std::vector<double> means, ses;
  if (calib.mode == CalibMode::Kernel) {
    SqExpKernel kernel(calib.lengthscales.empty() ? std::vector<double>{std::sqrt(2.0) * nu}
                                                  : calib.lengthscales);
    std::vector<MCEstimate> est =
        estimate_expected_ec(lattice, kernel, Transform::ChiBar, calib.thresholds,
                             calib.n_reps, derive_stream(seed, 1), threads);
    for (const MCEstimate& e : est) {
      means.push_back(e.mean);
      ses.push_back(e.se);
    }
  } else {
    // Refit the LRT surface on eta = 0 replicates of the observed size.
    double tcx = 0.5 * (region.x0 + region.x1);
    double tcy = 0.5 * (region.y0 + region.y1);
    BumpModel null_model(region, nu, 0.0, tcx, tcy);
    int n_events = static_cast<int>(events.size());
    std::size_t n_thr = calib.thresholds.size();
    std::vector<double> ecs(static_cast<std::size_t>(calib.n_reps) * n_thr);
    parallel_for(calib.n_reps, threads, [&](std::int64_t i) {
      EventSet ev = simulate_events(null_model, n_events,
                                    derive_stream(seed, static_cast<std::uint64_t>(i) + 1));
      LrtField rep = evaluator.evaluate(ev, 1);
      for (std::size_t k = 0; k < n_thr; ++k)
        ecs[static_cast<std::size_t>(i) * n_thr + k] = static_cast<double>(
            euler_characteristic(rep.field, calib.thresholds[k]).ec);
    });
    for (std::size_t k = 0; k < n_thr; ++k) {
      double sum = 0.0;
      for (int i = 0; i < calib.n_reps; ++i)
        sum += ecs[static_cast<std::size_t>(i) * n_thr + k];
      double mean = sum / calib.n_reps;
      double ss = 0.0;
      for (int i = 0; i < calib.n_reps; ++i) {
        double d = ecs[static_cast<std::size_t>(i) * n_thr + k] - mean;
        ss += d * d;
      }
      means.push_back(mean);
      ses.push_back(std::sqrt(ss / (calib.n_reps - 1) / calib.n_reps));
    }
  }

  LKCSolution lkc =
      solve_lkc(DensityFamily::chi_bar01(), calib.l0, calib.thresholds, means, ses);
  result.report = global_pvalue(c_obs, lkc);
  return result;
}

}  // namespace tohm
