#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace quasispec {

/// Golden-ratio conjugate (sqrt(5) - 1) / 2 at full double precision.
inline constexpr double kGoldenConjugate = 0.6180339887498948482;

/// Parameters of one Fibonacci (Sturmian) Hamiltonian instance restricted
/// to a box of `n_sites` sites starting at site index `start`.
struct ModelParams {
  double lambda = 1.0;
  double omega = 0.0;
  double alpha = kGoldenConjugate;
  std::int64_t n_sites = 1;
  std::int64_t start = 0;

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;
};

/// Fractional part x - floor(x), always in [0, 1).
double frac(double x);

/// lambda if frac(n*alpha + omega) lies in [1 - alpha, 1), else 0.
/// Values within 1e-12 of the left endpoint are reclassified with a
/// compensated (double-double) evaluation of n*alpha + omega.
double potential_value(std::int64_t n, const ModelParams& p);

/// potential_value(start + i, p) for i = 0 .. p.n_sites - 1.
std::vector<double> potential_vector(std::int64_t start, const ModelParams& p);

/// Same as potential_vector(p.start, p).
std::vector<double> potential_vector(const ModelParams& p);

inline constexpr int kMaxSubstitutionLevel = 30;

/// k-th iterate of a -> ab, b -> a applied to "a"; 1 encodes a, 0 encodes b.
std::vector<std::uint8_t> substitution_word(int k, int max_level = kMaxSubstitutionLevel);

}  // namespace quasispec
