#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "quasispec/dos.hpp"

namespace quasispec {

/// Point in trace coordinates.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double max_abs() const;
  bool finite() const;
};

/// T(x, y, z) = (2xy - z, x, y). Throws NumericFailure on non-finite output.
Point3 trace_step(const Point3& p);

/// T^-1(x, y, z) = (y, z, 2yz - x).
Point3 trace_step_inverse(const Point3& p);

/// Fricke-Vogt invariant x^2 + y^2 + z^2 - 2xyz - 1, preserved by T.
double fricke_vogt(const Point3& p);

/// Line of initial conditions E -> ((E - lambda)/2, E/2, 1); lies on the
/// level set fricke_vogt = lambda^2 / 4.
Point3 initial_point(double energy, double lambda);

/// max(4, 2 + lambda).
double default_escape_threshold(double lambda);

/// ceil(depth * ln 2 / ln(2 + lambda)) + 2. Near-spectrum orbits for lambda > 0
/// leave the bounded region after a number of steps that grows with log of the
/// inverse distance, so the horizon has to follow the grid resolution.
int default_max_iter(int depth, double lambda);

struct EscapeResult {
  bool escaped = false;
  int steps = 0;
  double exit_norm = 0.0;
};

/// Iterates T from initial_point(E, lambda). The orbit counts as escaped at
/// the first step whose max coordinate exceeds `threshold` after strictly
/// increasing over the last three iterates; a non-finite iterate also counts
/// as escaped. Otherwise bounded after `max_iter` steps.
EscapeResult escape_test(double energy, double lambda, int max_iter, double threshold);

/// Sorted, disjoint closed intervals.
class IntervalSet {
 public:
  IntervalSet() = default;
  /// Sorts and merges overlapping or touching intervals.
  explicit IntervalSet(std::vector<std::pair<double, double>> intervals);

  std::span<const std::pair<double, double>> intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }
  bool empty() const { return intervals_.empty(); }

  /// True when x lies in some interval.
  bool contains(double x) const;
  /// Distance from x to the set (0 inside). Throws on an empty set.
  double distance(double x) const;
  /// Point-set inclusion this subset-of other.
  bool subset_of(const IntervalSet& other) const;

 private:
  std::vector<std::pair<double, double>> intervals_;
};

struct CoverParams {
  double lambda = 0.0;
  double emin = -3.0;
  double emax = 3.0;
  int depth = 12;
  int max_iter = 0;        // <= 0 selects default_max_iter(depth, lambda)
  double threshold = 0.0;  // <= 0 selects default_escape_threshold(lambda)

  int resolved_max_iter() const;
  double resolved_threshold() const;
};

/// Window [-2.5, 2.5 + lambda], which contains the spectrum with margin.
CoverParams default_cover_params(double lambda, int depth);

/// Outer approximation of the spectrum: the window is split into 2^depth
/// cells, and a cell is kept when any of its endpoints or midpoint has a
/// bounded orbit.
IntervalSet spectrum_cover(const CoverParams& params);

double lebesgue_length(const IntervalSet& s);

/// Box-counting slope of log N(eps) against log(1/eps), N(eps) the number
/// of cells [k eps, (k+1) eps) meeting the set.
SlopeFit box_dimension(const IntervalSet& s, std::span<const double> scales);

/// Finite-time top Lyapunov exponent (1/m) log |D T^m v| along the orbit of
/// initial_point(E, lambda), with v the energy direction of the line of
/// initial conditions. Throws NumericFailure when the orbit escapes first.
double lyapunov_finite(double energy, double lambda, int m);

/// Searches [a, b] for an energy whose orbit stays bounded for `steps`
/// iterations by repeatedly zooming in on the longest-surviving probe.
/// Returns false when no such energy is found at double resolution.
bool refine_bounded_energy(double a, double b, double lambda, int steps, double& energy);

struct LyapunovScanRow {
  double lambda = 0.0;
  double mean = 0.0;
  double spread = 0.0;  // standard error of the mean
  int samples = 0;
};

struct LyapunovScanParams {
  int e_samples = 64;
  int m = 24;
  int depth = 12;
  std::uint64_t seed = 1;
};

/// For each lambda, averages lyapunov_finite over energies drawn from the
/// spectrum cover and refined to bounded orbits.
std::vector<LyapunovScanRow> lyapunov_scan(std::span<const double> lambdas, const LyapunovScanParams& params);

}  // namespace quasispec
