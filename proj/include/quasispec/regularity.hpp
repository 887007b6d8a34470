#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quasispec/dos.hpp"

namespace quasispec {

using Word = std::vector<int>;

/// Symbolic model for the absolute-continuity criterion: a one-sided
/// topological Markov chain on `ell` symbols, digit values for the linear
/// projection Pi_lambda(w) = sum_k digits[w_k] lambda^k, and symbol weights
/// defining the Markov measure mu.
struct SymbolicSystem {
  int ell = 2;
  std::vector<std::vector<int>> transition;
  std::vector<double> digits;
  std::vector<double> weights;

  /// Full shift on digits.size() symbols.
  static SymbolicSystem full_shift(std::vector<double> digits, std::vector<double> weights);

  /// Checks shapes, 0-1 entries, primitivity (some power <= max(2 ell, (ell-1)^2 + 1) strictly
  /// positive) and weights. Throws InvalidArgument.
  void validate() const;

  bool allows(int from, int to) const { return transition[from][to] != 0; }
  bool is_full_shift() const;
  /// mu transition probability: A_ij w_j / sum_k A_ik w_k.
  double transition_probability(int from, int to) const;
  /// mu([word]).
  double cylinder_mass(std::span<const int> word) const;
  bool admissible(std::span<const int> word) const;
};

/// Parameter interval J = [lo, hi] inside (0, 1).
struct ParameterInterval {
  double lo = 0.3;
  double hi = 0.35;

  double length() const { return hi - lo; }
};

struct Projection {
  double value = 0.0;
  /// max |digit| * lambda^|word| / (1 - lambda): bound on the omitted tail.
  double truncation_bound = 0.0;
};

Projection pi_lambda(std::span<const int> word, double lambda, const SymbolicSystem& sys);

/// Pi_lambda(omega) - Pi_lambda(tau) for words of equal length.
double phi(std::span<const int> omega, std::span<const int> tau, double lambda, const SymbolicSystem& sys);

/// d/dlambda of phi for the truncated words, evaluated symbolically.
double phi_derivative_exact(std::span<const int> omega, std::span<const int> tau, double lambda,
                            const SymbolicSystem& sys);

/// Length of the maximal common prefix.
std::size_t common_prefix_len(std::span<const int> omega, std::span<const int> tau);

/// Push-forward of mu under Pi_lambda, truncated to words of length `depth`.
AtomicMeasure projected_measure(const SymbolicSystem& sys, double lambda, int depth);

struct SamplingParams {
  int depth = 12;          // largest prefix stratum
  int k0 = 2;              // smallest prefix stratum
  int sample_pairs = 2000;
  int tail = 16;           // symbols beyond the deepest stratum
  std::uint64_t seed = 1;
};

struct WordPair {
  Word omega;
  Word tau;
  int prefix = 0;
};

/// Pairs with |omega ^ tau| = k, equal counts per stratum k0 .. depth.
std::vector<WordPair> sample_pairs(const SymbolicSystem& sys, const SamplingParams& params);

/// Fitted bound  value(k) <= constant * ell^(-exponent * k)  (or >= for cond2).
struct DecayFit {
  double exponent = 0.0;
  double constant = 0.0;
  int pairs_used = 0;
  int pairs_flagged = 0;
  int max_certified_depth = 0;
};

/// Multiplicative headroom applied to fitted constants so the bounds carry
/// over to pairs outside the fitting sample.
inline constexpr double kConstantHeadroom = 1.25;

/// Sampled max over J of |phi|, evaluated on `grid_points` values of lambda.
double max_abs_phi(const WordPair& pair, const ParameterInterval& j, const SymbolicSystem& sys,
                   int grid_points = 65);

/// Condition (max over J of |phi| <= C1 ell^(-alpha k)): exponent alpha, constant C1.
DecayFit estimate_cond1(const SymbolicSystem& sys, const ParameterInterval& j, const SamplingParams& params);

/// Central-difference step max(1e-6, 1e-3 |J|).
double derivative_step(const ParameterInterval& j);

struct DerivativeProbe {
  double min_abs = 0.0;
  bool flagged = false;  // sign change or below resolution on the grid
};

/// min over the lambda grid (step <= grid_step) of |d phi / d lambda| by central differences.
DerivativeProbe min_abs_phi_derivative(const WordPair& pair, const ParameterInterval& j, const SymbolicSystem& sys,
                                       double grid_step = 1e-4);

/// Transversality through the derivative lower bound
/// min_J |phi'| >= C2' ell^(-beta k); reports beta and C2 = 2 / C2'.
DecayFit estimate_cond2(const SymbolicSystem& sys, const ParameterInterval& j, const SamplingParams& params,
                        double grid_step = 1e-4);

struct MeasureDecay {
  double gamma = 0.0;
  double c3 = 0.0;
  std::vector<double> max_mass;  // index n-1 holds the max cylinder mass at depth n
  std::vector<double> total_mass;
};

/// max_{|u|=n} mu([u]) <= C3 ell^(-gamma n) for n = 1 .. depth.
MeasureDecay measure_decay(const SymbolicSystem& sys, int depth);

struct Verdict {
  bool dimension_sum = false;  // d_eta + gamma/beta > 1
  bool far_field = false;      // d_eta > (beta - gamma)/alpha
};

Verdict criterion_verdict(double d_eta, double alpha, double beta, double gamma);

/// Monte-Carlo estimate of E[(eta*nu)(B_r(x))] / (2r), x ~ eta*nu.
std::vector<std::pair<double, double>> correlation_integral(const AtomicMeasure& eta, const AtomicMeasure& nu,
                                                            std::span<const double> radii, int samples,
                                                            std::uint64_t seed);

struct NearFarSplit {
  double r = 0.0;
  double near = 0.0;           // pairs with |y - z| < 2r
  double far = 0.0;            // pairs with |y - z| >= 2r
  double near_fraction = 0.0;  // eta x eta mass of {|y - z| < 2r}
};

/// Decomposition of P(|y + a - z - b| <= r), y,z ~ eta, a,b ~ nu, by the
/// distance between y and z. In expectation near + far equals 2r times the
/// correlation integral.
NearFarSplit near_far_split(const AtomicMeasure& eta, const AtomicMeasure& nu, double r, int samples,
                            std::uint64_t seed);

struct TransversalityReport {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double gamma_hat = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  int k0 = 0;
  bool verdict_1 = false;
  bool verdict_2 = false;
  double d_eta = 0.0;
  int max_certified_depth = 0;
  double flagged_fraction = 0.0;
};

TransversalityReport build_report(const SymbolicSystem& sys, const ParameterInterval& j,
                                  const SamplingParams& params, double d_eta);

}  // namespace quasispec
