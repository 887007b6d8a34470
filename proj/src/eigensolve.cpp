#include "quasispec/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "quasispec/error.hpp"

namespace quasispec {

TridiagMatrix::TridiagMatrix(std::vector<double> diag) : diag_(std::move(diag)) {
  require(!diag_.empty(), "tridiagonal matrix needs n >= 1");
  for (double d : diag_) require(std::isfinite(d), "tridiagonal diagonal must be finite");
  auto [lo, hi] = std::minmax_element(diag_.begin(), diag_.end());
  min_diag_ = *lo;
  max_diag_ = *hi;
}

double TridiagMatrix::lower_bound() const {
  const double off = diag_.size() == 1 ? 0.0 : (diag_.size() == 2 ? 1.0 : 2.0);
  return min_diag_ - off;
}

double TridiagMatrix::upper_bound() const {
  const double off = diag_.size() == 1 ? 0.0 : (diag_.size() == 2 ? 1.0 : 2.0);
  return max_diag_ + off;
}

double TridiagMatrix::radius_bound() const {
  return std::max(std::abs(min_diag_), std::abs(max_diag_)) + 2.0;
}

TridiagMatrix TridiagMatrix::leading(std::size_t k) const {
  require(k >= 1 && k <= diag_.size(), "leading submatrix size out of range");
  return TridiagMatrix(std::vector<double>(diag_.begin(), diag_.begin() + static_cast<std::ptrdiff_t>(k)));
}

TridiagMatrix fibonacci_matrix(const ModelParams& p) {
  p.validate();
  return TridiagMatrix(potential_vector(p));
}

// A vanishing pivot is taken as +eps: when e is exactly an eigenvalue the
// last pivot is zero and must not be counted.
std::size_t sturm_count(const TridiagMatrix& m, double e) {
  const auto diag = m.diag();
  const double scale = std::max(m.radius_bound(), std::abs(e));
  const double eps = std::ldexp(1.0, -52) * scale;
  std::size_t negatives = 0;
  double d = diag[0] - e;
  if (std::abs(d) < eps) d = eps;
  if (d < 0.0) ++negatives;
  for (std::size_t i = 1; i < diag.size(); ++i) {
    d = diag[i] - e - 1.0 / d;
    if (std::abs(d) < eps) d = eps;
    if (d < 0.0) ++negatives;
  }
  return negatives;
}

double default_tolerance(const TridiagMatrix& m) { return 1e-12 * std::max(1.0, m.radius_bound()); }

namespace {

// k-th eigenvalue (0-based) by bisection on sturm_count.
double bisect_one(const TridiagMatrix& m, std::size_t k, double lo, double hi, double tol) {
  // Invariant: count(lo) <= k < count(hi).
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(m, mid) > k) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Spectrum1D eigenvalues_bisect(const TridiagMatrix& m, double tol) {
  require(tol > 0.0 && std::isfinite(tol), "bisection tolerance must be > 0");
  const std::size_t n = m.size();
  const double lo = m.lower_bound() - tol;
  const double hi = m.upper_bound() + tol;

  Spectrum1D out;
  out.tol = tol;
  out.eigenvalues.resize(n);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) out.eigenvalues[k] = bisect_one(m, k, lo, hi, tol);
  };

  const std::size_t threads =
      n < 4096 ? 1 : std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), 16));
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  // Independent bisections can disagree in the last ulp for clustered values.
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
  return out;
}

Spectrum1D fibonacci_spectrum(const ModelParams& p, double tol) {
  const TridiagMatrix m = fibonacci_matrix(p);
  Spectrum1D s = eigenvalues_bisect(m, tol > 0.0 ? tol : default_tolerance(m));
  s.params = p;
  return s;
}

DenseMatrix DenseMatrix::from_tridiag(const TridiagMatrix& m) {
  DenseMatrix a(m.size());
  const auto diag = m.diag();
  for (std::size_t i = 0; i < m.size(); ++i) {
    a(i, i) = diag[i];
    if (i + 1 < m.size()) {
      a(i, i + 1) = 1.0;
      a(i + 1, i) = 1.0;
    }
  }
  return a;
}

std::vector<double> jacobi_dense(DenseMatrix a, double tol) {
  const std::size_t n = a.size();
  require(n >= 1, "jacobi_dense needs a non-empty matrix");
  require(n <= kMaxJacobiDim, "jacobi_dense dimension exceeds " + std::to_string(kMaxJacobiDim));
  require(tol > 0.0, "jacobi_dense tolerance must be > 0");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-12) throw InvalidArgument("jacobi_dense input is not symmetric");
      a(j, i) = a(i, j);
    }
  }

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off_norm() > tol; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  if (off_norm() > tol) throw NumericFailure("jacobi_dense did not converge");

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace quasispec
