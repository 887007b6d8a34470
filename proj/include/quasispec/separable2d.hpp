#pragma once

#include <tuple>
#include <vector>

#include "quasispec/eigensolve.hpp"
#include "quasispec/tracemap.hpp"

namespace quasispec {

/// Square box [0, N-1]^2 of the separable operator with potential
/// V1(m) + V2(n), each factor a 1D Fibonacci potential.
struct BoxSpec2D {
  ModelParams p1;
  ModelParams p2;
  std::int64_t n = 1;

  /// Both factors share the box size n.
  static BoxSpec2D make(double lambda1, double omega1, double lambda2, double omega2, std::int64_t n);
  void validate() const;
};

/// All N^2 pairwise sums s1[i] + s2[j], sorted.
std::vector<double> eigs2d_from_sums(const Spectrum1D& s1, const Spectrum1D& s2);

inline constexpr std::int64_t kMaxDenseBox = 16;

/// Dense N^2 x N^2 Dirichlet Hamiltonian, site (m, n) at row m*N + n.
DenseMatrix assemble_dense_2d(const BoxSpec2D& spec);

/// Minkowski sum {a + b}, merged into disjoint intervals.
IntervalSet sumset(const IntervalSet& a, const IntervalSet& b);

struct Gap {
  double start;
  double end;
  double width;
};

/// Open gaps between consecutive intervals.
std::vector<Gap> gap_report(const IntervalSet& s);

}  // namespace quasispec
