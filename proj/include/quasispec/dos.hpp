#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "quasispec/eigensolve.hpp"

namespace quasispec {

/// One point mass.
struct Atom {
  double position;
  double weight;
};

/// Finitely supported probability measure on the line: strictly increasing
/// positions, positive weights summing to 1 within 1e-12.
///
/// Atoms closer than the merge tolerance (1e-12 * max(1, diameter)) are
/// merged into the leftmost atom of their cluster, so two measures built from
/// the same multiset of positions always come out identical.
class AtomicMeasure {
 public:
  /// Sorts, merges and validates. Throws InvalidArgument on empty input,
  /// non-positive weights or total mass outside 1 +- 1e-12.
  explicit AtomicMeasure(std::vector<Atom> atoms);

  static AtomicMeasure dirac(double x);
  /// Equal weights 1/n on the given positions.
  static AtomicMeasure uniform(std::span<const double> positions);

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double min_position() const { return atoms_.front().position; }
  double max_position() const { return atoms_.back().position; }
  double diameter() const { return max_position() - min_position(); }
  double merge_tolerance() const { return merge_tol_; }

  /// Cumulative weight of atoms with index < i (prefix sums, size()+1 entries).
  std::span<const double> cumulative() const { return cumulative_; }

  double mean() const;
  double variance() const;

  /// Mass of the closed ball [x - r, x + r].
  double ball_mass(double x, double r) const;

  /// Index of the atom selected by a uniform variate u in [0, 1).
  std::size_t sample_index(double u) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
  double merge_tol_ = 0.0;
};

/// Uniform grid min, min + step, ..., covering [min, max].
struct UniformGrid {
  double min = 0.0;
  double max = 1.0;
  double step = 1e-3;

  std::size_t points() const;
  double at(std::size_t i) const { return min + static_cast<double>(i) * step; }
};

/// Kernel density estimate sampled on a uniform grid.
struct DensityEstimate {
  UniformGrid grid;
  std::vector<double> values;
  double bandwidth = 0.0;

  /// Trapezoid integral of the values.
  double integral() const;
};

/// Empirical eigenvalue distribution: weight 1/N per eigenvalue.
AtomicMeasure empirical_measure(const Spectrum1D& eigs);
AtomicMeasure empirical_measure(std::span<const double> eigenvalues);

/// Right-continuous distribution function m((-inf, e]).
double cdf(const AtomicMeasure& m, double e);

inline constexpr std::size_t kDefaultConvolutionCap = 100'000'000;

/// Exact convolution: all pairwise sums with product weights, merged.
AtomicMeasure convolve(const AtomicMeasure& a, const AtomicMeasure& b,
                       std::size_t max_pairs = kDefaultConvolutionCap);

/// Kolmogorov distance sup_x |F_a(x) - F_b(x)|.
double sup_cdf_distance(const AtomicMeasure& a, const AtomicMeasure& b);

/// Triangular-kernel smoothing, K_h(x) = max(0, 1 - |x|/h) / h. Each atom's
/// kernel is renormalized by its lattice sum so that the trapezoid integral
/// is exact. The grid must cover [min - h, max + h] and step <= h / 4.
DensityEstimate kde_density(const AtomicMeasure& m, double bandwidth, const UniformGrid& grid);

/// Grid with the given step that covers the measure's support plus one bandwidth.
UniformGrid covering_grid(const AtomicMeasure& m, double bandwidth, double step);

/// sqrt of the trapezoid integral of values^2.
double l2_norm(const DensityEstimate& d);

/// Least-squares line fit result.
struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
};

SlopeFit fit_line(std::span<const double> x, std::span<const double> y);

/// Dyadic radii 2^-from .. 2^-to.
std::vector<double> dyadic_radii(int from, int to);

struct LocalDimension {
  SlopeFit fit;
  std::vector<double> radii;
  std::vector<double> mean_log_mass;
};

/// Draws `samples` atoms by weight (seeded) and fits the slope of
/// mean log m(B_r(x)) against log r.
LocalDimension local_dimension(const AtomicMeasure& m, std::span<const double> radii, int samples,
                               std::uint64_t seed);

/// (E, m((-inf, E])) for each energy.
std::vector<std::pair<double, double>> ids_curve(const Spectrum1D& eigs, std::span<const double> energies);

}  // namespace quasispec
