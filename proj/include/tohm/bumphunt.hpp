#ifndef TOHM_BUMPHUNT_HPP
#define TOHM_BUMPHUNT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tohm/lattice.hpp"
#include "tohm/rft.hpp"
#include "tohm/simulate.hpp"

namespace tohm {

/// Planar search region: an axis-aligned rectangle or a disc.  Carries
/// the continuous geometry that the lattice discretizes; area() feeds the
/// uniform background density and bbox the rejection samplers.
struct Region {
  enum class Kind { Rectangle, Disc };

  static Region rectangle(double x0, double x1, double y0, double y1);
  static Region disc(double cx, double cy, double radius);

  bool contains(double x, double y) const;
  double area() const;

  Kind kind = Kind::Rectangle;
  // Bounding box, which for rectangles is the region itself.
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  // Disc parameters (unused for rectangles).
  double cx = 0.0, cy = 0.0, radius = 0.0;
};

/// Uniform background plus one Gaussian bump of known width nu centered
/// at theta, mixed with weight eta:
///
///   h(x, y) = (1 - eta) / area + eta exp(-r^2 / (2 nu^2)) / k_theta
///
/// where r is the distance to theta and k_theta renormalizes the bump to
/// the region (truncation matters near the boundary).
struct BumpModel {
  BumpModel(Region region, double nu, double eta, double theta1, double theta2);

  Region region;
  double nu;
  double eta;
  double theta1;
  double theta2;
};

/// Planar event coordinates, structure-of-arrays.
struct EventSet {
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const { return x.size(); }
};

/// Probability mass of an isotropic Gaussian of width nu centered at
/// (tx, ty) inside the region.  Rectangles use the exact erf product;
/// discs integrate the x-slices adaptively to ~1e-12 absolute error.
double gaussian_region_mass(const Region& region, double tx, double ty, double nu);

/// Draws n i.i.d. events from the model by rejection: uniform draws over
/// the bounding box for the background component, Gaussian draws around
/// theta for the bump.  A bump with region mass below 1e-6 would stall
/// the sampler and is rejected up front.  Deterministic in seed.
EventSet simulate_events(const BumpModel& model, int n, std::uint64_t seed);

/// Event coordinates on disk: `# tohm-events v1` header, then one
/// x <tab> y pair per line, full round-trip precision.
void save_events(const EventSet& events, const std::string& path);
EventSet load_events(const std::string& path);

/// Profile-likelihood-ratio surface and the bump weight that attains it
/// at every lattice point.
struct LrtField {
  FieldSample field;            // W at each included lattice point
  std::vector<double> eta_hat;  // argmax weight at the same points
};

/// Evaluates the bump-hunt likelihood-ratio statistic
///
///   W(theta_r) = 2 [ max_{eta in [0,1]} l(eta, theta_r) - l(0) ]
///
/// on every included lattice point.  Construction validates that all
/// points lie inside the region and precomputes the per-point bump
/// normalizers, so one evaluator can score many event sets.
///
/// The profile over eta uses the concavity of l: a nonpositive score at
/// eta = 0 gives W = 0 exactly, otherwise Brent maximization on [0, 1]
/// to 1e-9.  Events farther than 8 nu from a point contribute a bump
/// density below 2e-14 of the peak; their terms collapse to the
/// background-only form and are aggregated by count, keeping the
/// evaluation exactly additive under dataset duplication.
class LrtEvaluator {
 public:
  LrtEvaluator(LatticePtr lattice, const Region& region, double nu);

  /// Scores one event set; deterministic and independent of threads.
  LrtField evaluate(const EventSet& events, int threads = 1) const;

  const LatticePtr& lattice() const { return lattice_; }
  const Region& region() const { return region_; }
  double nu() const { return nu_; }

 private:
  LatticePtr lattice_;
  Region region_;
  double nu_;
  std::vector<double> px_, py_;   // included-point coordinates
  std::vector<double> scale_;     // area / k_theta per point
};

/// One-shot convenience wrapper around LrtEvaluator.
LrtField lrt_field(const EventSet& events, LatticePtr lattice, const Region& region,
                   double nu, int threads = 1);

/// How the null curvatures are calibrated inside bump_hunt_pipeline.
///
///   Kernel  draw smooth Gaussian fields with a squared-exponential
///           kernel (default length-scale sqrt(2) nu, the small-spacing
///           correlation of the score field) and square their positive
///           part; fast, approximate.
///   Exact   re-simulate eta = 0 event sets of the observed size and
///           refit the LRT surface per replicate; slow, assumption-free.
enum class CalibMode { Kernel, Exact };

CalibMode parse_calib_mode(const std::string& text);  // "kernel" | "exact"

struct BumpCalibration {
  CalibMode mode = CalibMode::Kernel;
  std::vector<double> lengthscales;  // Kernel mode; empty -> sqrt(2) nu
  std::vector<double> thresholds;    // distinct, positive
  int n_reps = 100;
  double l0 = 1.0;
};

struct BumpHuntResult {
  PValueReport report;          // global p-value at the observed supremum
  std::vector<double> argmax;   // coordinates of the supremum
  double eta_hat = 0.0;         // fitted bump weight at the argmax
  LrtField observed;            // the full observed surface
};

/// Full demonstration pipeline: score the events, locate the supremum,
/// calibrate null curvatures per `calib` (replicates use streams derived
/// from seed), and convert the supremum into a global p-value with its
/// sigma significance.
BumpHuntResult bump_hunt_pipeline(const EventSet& events, LatticePtr lattice,
                                  const Region& region, double nu,
                                  const BumpCalibration& calib, std::uint64_t seed,
                                  int threads = 1);

}  // namespace tohm

#endif
