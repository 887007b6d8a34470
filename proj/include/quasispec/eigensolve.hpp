#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "quasispec/model.hpp"

namespace quasispec {

/// Symmetric tridiagonal matrix with arbitrary diagonal and unit off-diagonal
/// (the Dirichlet restriction of a discrete Schrodinger operator).
class TridiagMatrix {
 public:
  explicit TridiagMatrix(std::vector<double> diag);

  std::size_t size() const { return diag_.size(); }
  std::span<const double> diag() const { return diag_; }

  /// Gershgorin enclosure [min(diag) - 2, max(diag) + 2] (tightened for n <= 2).
  double lower_bound() const;
  double upper_bound() const;
  /// max |diag| + 2: bound on the spectral radius.
  double radius_bound() const;

  /// Leading principal submatrix of dimension k.
  TridiagMatrix leading(std::size_t k) const;

 private:
  std::vector<double> diag_;
  double min_diag_ = 0.0;
  double max_diag_ = 0.0;
};

/// Dirichlet box Hamiltonian for the given model parameters.
TridiagMatrix fibonacci_matrix(const ModelParams& p);

/// Sorted eigenvalues of a finite box, with the parameters that produced them.
struct Spectrum1D {
  std::vector<double> eigenvalues;
  std::optional<ModelParams> params;
  double tol = 0.0;

  std::size_t size() const { return eigenvalues.size(); }
};

/// Number of eigenvalues strictly less than e, read off from the signs of
/// the LDL^T pivots of (m - e). Pivots with |d| < 2^-52 * scale are
/// replaced by +2^-52 * scale, so an exact eigenvalue at e is not counted.
std::size_t sturm_count(const TridiagMatrix& m, double e);

/// 1e-12 * max(1, spectral radius bound).
double default_tolerance(const TridiagMatrix& m);

/// All eigenvalues by Sturm bisection, each bracket shrunk to width <= tol.
Spectrum1D eigenvalues_bisect(const TridiagMatrix& m, double tol);

/// Eigenvalues of the Fibonacci box defined by p (tol <= 0 selects the default).
Spectrum1D fibonacci_spectrum(const ModelParams& p, double tol = 0.0);

/// Dense row-major square matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  static DenseMatrix from_tridiag(const TridiagMatrix& m);

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

inline constexpr std::size_t kMaxJacobiDim = 256;

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm is <= tol.
/// Returns the sorted diagonal. Small-scale oracle only.
std::vector<double> jacobi_dense(DenseMatrix a, double tol);

}  // namespace quasispec
