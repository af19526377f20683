#include "tohm/rft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "tohm/errors.hpp"
#include "tohm/field_io.hpp"
#include "tohm/stats.hpp"

namespace tohm {

DensityFamily DensityFamily::chi_square(int s) {
  if (s < 1)
    throw ValidationError("chi-square family: degrees of freedom must be >= 1, got " +
                          std::to_string(s));
  return {Kind::ChiSquare, s};
}

int DensityFamily::max_density_dim() const {
  return kind == Kind::Gaussian ? 5 : 3;
}

std::string DensityFamily::name() const {
  switch (kind) {
    case Kind::Gaussian: return "gaussian";
    case Kind::ChiSquare: return "chisq:" + std::to_string(dof);
    case Kind::ChiBar01: return "chibar01";
  }
  return "?";
}

DensityFamily DensityFamily::parse(const std::string& text) {
  if (text == "gaussian") return gaussian();
  if (text == "chibar01") return chi_bar01();
  if (text.rfind("chisq:", 0) == 0) {
    const std::string arg = text.substr(6);
    char* end = nullptr;
    long s = std::strtol(arg.c_str(), &end, 10);
    if (end == arg.c_str() || *end != '\0')
      throw ValidationError("density family: bad degrees of freedom '" + arg + "'");
    return chi_square((int)s);
  }
  throw ValidationError("unknown density family '" + text +
                        "' (expected gaussian, chisq:<s>, or chibar01)");
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Probabilist-style Hermite polynomials H_0..H_4, the polynomial parts of
// the repeated derivatives of the normal density.
double hermite(int n, double c) {
  switch (n) {
    case 0: return 1.0;
    case 1: return c;
    case 2: return c * c - 1.0;
    case 3: return c * (c * c - 3.0);
    case 4: return (c * c - 6.0) * c * c + 3.0;
  }
  throw ValidationError("hermite: order out of range");
}

double gaussian_density(int d, double c) {
  if (d == 0) return normal_tail(c);
  return std::pow(kTwoPi, -0.5 * (d + 1)) * hermite(d - 1, c) * std::exp(-0.5 * c * c);
}

// Chi-square EC densities for s >= 1 degrees of freedom, valid for c > 0
// at d >= 1.  Terms that exist only for enough degrees of freedom are
// gated explicitly.
double chi_square_density(int s, int d, double c) {
  if (d == 0) return chi2_tail(s, c);
  if (!(c > 0.0))
    throw ValidationError("ec_density: chi-square families need c > 0 for d >= 1, got c = " +
                          format_double(c));
  const double g = std::tgamma(0.5 * s);
  const double ec2 = std::exp(-0.5 * c);
  switch (d) {
    case 1:
      return std::pow(c, 0.5 * (s - 1)) * ec2 /
             (std::pow(2.0, 0.5 * (s - 2)) * g * std::sqrt(kTwoPi));
    case 2: {
      double poly = c - (s >= 2 ? (double)(s - 1) : 0.0);
      return std::pow(0.5 * c, 0.5 * (s - 2)) * ec2 / (kTwoPi * g) * poly;
    }
    case 3: {
      double poly = (s >= 3 ? (double)(s - 1) * (s - 2) : 0.0);
      poly -= (s >= 2 ? 2.0 * (s - 1) * c : 0.0);
      poly += c * c - c;
      return std::pow(c, 0.5 * (s - 3)) * ec2 /
             (std::pow(kTwoPi, 1.5) * g * std::pow(2.0, 0.5 * (s - 2))) * poly;
    }
  }
  throw ValidationError("chi_square_density: d out of range");
}

}  // namespace

double ec_density(const DensityFamily& family, int d, double c) {
  const int dmax = family.max_density_dim();
  if (d < 0 || d > dmax)
    throw ValidationError("ec_density: family " + family.name() + " supports d = 0.." +
                          std::to_string(dmax) + ", got d = " + std::to_string(d));
  switch (family.kind) {
    case DensityFamily::Kind::Gaussian:
      return gaussian_density(d, c);
    case DensityFamily::Kind::ChiSquare:
      return chi_square_density(family.dof, d, c);
    case DensityFamily::Kind::ChiBar01:
      // Half-half mixture of a point mass at zero and a chi-square_1: for
      // c > 0 every density is the chi-square_1 one at half weight; the
      // d = 0 tail is 1 below zero and exactly 1/2 at zero.
      if (d == 0) {
        if (c < 0.0) return 1.0;
        if (c == 0.0) return 0.5;
        return 0.5 * chi2_tail(1, c);
      }
      if (!(c > 0.0))
        throw ValidationError("ec_density: chibar01 needs c > 0 for d >= 1, got c = " +
                              format_double(c));
      return 0.5 * chi_square_density(1, d, c);
  }
  throw ValidationError("ec_density: bad family");
}

double expected_ec(const DensityFamily& family, double l0,
                   const std::vector<double>& lkcs, double c) {
  double sum = l0 * ec_density(family, 0, c);
  for (std::size_t d = 1; d <= lkcs.size(); ++d)
    sum += lkcs[d - 1] * ec_density(family, (int)d, c);
  return sum;
}

LKCSolution solve_lkc(const DensityFamily& family, double l0,
                      const std::vector<double>& thresholds,
                      const std::vector<double>& ec_means,
                      const std::vector<double>& ec_ses,
                      double cond_warn_bound) {
  const int D = (int)thresholds.size();
  if (D < 1) throw ValidationError("solve_lkc: need at least one threshold");
  if (D > family.max_density_dim())
    throw ValidationError("solve_lkc: family " + family.name() + " supports at most " +
                          std::to_string(family.max_density_dim()) + " curvatures, got " +
                          std::to_string(D));
  if ((int)ec_means.size() != D || (int)ec_ses.size() != D)
    throw ValidationError("solve_lkc: thresholds, means, and ses must have equal length");
  for (int i = 0; i < D; ++i) {
    if (!std::isfinite(thresholds[i]) || !std::isfinite(ec_means[i]) ||
        !std::isfinite(ec_ses[i]) || ec_ses[i] < 0.0)
      throw ValidationError("solve_lkc: estimates must be finite with nonnegative errors");
    for (int j = i + 1; j < D; ++j)
      if (thresholds[i] == thresholds[j])
        throw ValidationError("solve_lkc: thresholds must be pairwise distinct (c = " +
                              format_double(thresholds[i]) + " repeats)");
  }

  Eigen::MatrixXd M(D, D);
  Eigen::VectorXd b(D);
  for (int k = 0; k < D; ++k) {
    for (int d = 1; d <= D; ++d) M(k, d - 1) = ec_density(family, d, thresholds[k]);
    b(k) = ec_means[k] - l0 * ec_density(family, 0, thresholds[k]);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(D - 1);
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smin > 0.0) || !std::isfinite(cond))
    throw NumericError("solve_lkc: density matrix is singular (condition number " +
                       format_double(cond) + "); choose other thresholds");

  Eigen::MatrixXd Minv = M.fullPivLu().inverse();
  Eigen::VectorXd L = Minv * b;
  Eigen::MatrixXd cov = Minv * Eigen::VectorXd::Map(ec_ses.data(), D)
                                   .array()
                                   .square()
                                   .matrix()
                                   .asDiagonal() *
                        Minv.transpose();

  LKCSolution out;
  out.family = family;
  out.l0 = l0;
  out.thresholds = thresholds;
  out.lkcs.assign(L.data(), L.data() + D);
  out.covariance.resize((std::size_t)D * D);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) out.covariance[(std::size_t)i * D + j] = cov(i, j);
  out.condition_number = cond;
  out.condition_warning = cond > cond_warn_bound;
  return out;
}

PValueReport global_pvalue(double c, const LKCSolution& lkc) {
  const int D = (int)lkc.lkcs.size();
  PValueReport rep;
  rep.c = c;
  rep.lkc = lkc;
  rep.pvalue_raw = expected_ec(lkc.family, lkc.l0, lkc.lkcs, c);

  // The expansion is linear in the curvatures, so the standard error is
  // sqrt(g' Cov g) with g the density vector at c.
  double var = 0.0;
  if (!lkc.covariance.empty()) {
    std::vector<double> g(D);
    for (int d = 1; d <= D; ++d) g[d - 1] = ec_density(lkc.family, d, c);
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        var += g[i] * lkc.covariance[(std::size_t)i * D + j] * g[j];
  }
  rep.se = std::sqrt(std::max(var, 0.0));
  rep.mc_low = rep.pvalue_raw - rep.se;
  rep.mc_high = rep.pvalue_raw + rep.se;
  rep.pvalue = std::min(std::max(rep.pvalue_raw, 0.0), 1.0);

  if (rep.pvalue_raw > 0.0 && rep.pvalue_raw < 1.0)
    rep.sigma = sigma_significance(rep.pvalue_raw);
  else
    rep.sigma = rep.pvalue_raw <= 0.0 ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
  return rep;
}

namespace {

std::vector<double> parse_numbers(const std::string& path, int line,
                                  std::istringstream& in, const char* what) {
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || !std::isfinite(v))
      throw ParseError(path, line, std::string("bad ") + what + " value '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ParseError(path, line, std::string("missing ") + what + " values");
  return out;
}

}  // namespace

void save_lkc(const LKCSolution& lkc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "# tohm-lkc v1\n";
  out << "family\t" << lkc.family.name() << "\n";
  out << "l0\t" << format_double(lkc.l0) << "\n";
  out << "thresholds";
  for (double c : lkc.thresholds) out << "\t" << format_double(c);
  out << "\nlkcs";
  for (double l : lkc.lkcs) out << "\t" << format_double(l);
  out << "\ncov";
  for (double v : lkc.covariance) out << "\t" << format_double(v);
  out << "\n";
  if (!out) throw Error("failed while writing '" + path + "'");
}

LKCSolution load_lkc(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");

  LKCSolution lkc;
  std::string line;
  int lineno = 0;

  auto next_line = [&](const char* want) -> std::istringstream {
    if (!std::getline(in, line))
      throw ParseError(path, lineno + 1, std::string("missing ") + want + " line");
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key != want)
      throw ParseError(path, lineno, std::string("expected '") + want + "', found '" + key + "'");
    return ls;
  };

  if (!std::getline(in, line) || line.rfind("# tohm-lkc v1", 0) != 0)
    throw ParseError(path, 1, "not a tohm-lkc v1 file");
  ++lineno;

  {
    std::istringstream ls = next_line("family");
    std::string token;
    if (!(ls >> token)) throw ParseError(path, lineno, "missing family token");
    try {
      lkc.family = DensityFamily::parse(token);
    } catch (const ValidationError& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  {
    std::istringstream ls = next_line("l0");
    auto vals = parse_numbers(path, lineno, ls, "l0");
    if (vals.size() != 1) throw ParseError(path, lineno, "l0 takes exactly one value");
    lkc.l0 = vals[0];
  }
  {
    std::istringstream ls = next_line("thresholds");
    lkc.thresholds = parse_numbers(path, lineno, ls, "threshold");
  }
  {
    std::istringstream ls = next_line("lkcs");
    lkc.lkcs = parse_numbers(path, lineno, ls, "curvature");
  }
  {
    std::istringstream ls = next_line("cov");
    lkc.covariance = parse_numbers(path, lineno, ls, "covariance");
  }

  const std::size_t D = lkc.thresholds.size();
  if (lkc.lkcs.size() != D)
    throw ParseError(path, lineno, "curvature count does not match threshold count");
  if (lkc.covariance.size() != D * D)
    throw ParseError(path, lineno, "covariance must hold " + std::to_string(D * D) +
                                       " row-major values");
  return lkc;
}

}  // namespace tohm
