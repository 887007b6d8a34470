#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "quasispec/eigensolve.hpp"
#include "quasispec/error.hpp"

using namespace quasispec;

namespace {

TridiagMatrix random_tridiag(std::mt19937_64& rng, std::size_t n, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<double> d(n);
  for (auto& x : d) x = u(rng);
  return TridiagMatrix(d);
}

std::vector<double> dense_eigs(const TridiagMatrix& m) { return jacobi_dense(DenseMatrix::from_tridiag(m), 1e-14); }

std::size_t count_below(const std::vector<double>& eigs, double e) {
  return static_cast<std::size_t>(std::count_if(eigs.begin(), eigs.end(), [e](double v) { return v < e; }));
}

}  // namespace

TEST_CASE("sturm counts on the 3-site Laplacian") {
  const TridiagMatrix m({0, 0, 0});
  CHECK(sturm_count(m, -3.0) == 0);
  CHECK(sturm_count(m, -0.1) == 1);
  CHECK(sturm_count(m, 0.1) == 2);
  CHECK(sturm_count(m, 0.0) == 1);
  CHECK(sturm_count(m, 1.5) == 3);
  CHECK(sturm_count(m, 1.4) == 2);
}

TEST_CASE("sturm counts match the dense oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> probe(-3.5, 3.5);
  for (int t = 0; t < 100; ++t) {
    const auto m = random_tridiag(rng, 8, 1.0);
    const auto eigs = dense_eigs(m);
    for (int k = 0; k < 20; ++k) {
      const double e = probe(rng);
      const bool near = std::any_of(eigs.begin(), eigs.end(), [e](double v) { return std::abs(v - e) < 1e-9; });
      if (!near) REQUIRE(sturm_count(m, e) == count_below(eigs, e));
    }
  }
}

TEST_CASE("sturm count is monotone and saturates outside Gershgorin") {
  std::mt19937_64 rng(3);
  const auto m = random_tridiag(rng, 40, 2.0);
  std::size_t last = 0;
  for (double e = m.lower_bound() - 1.0; e <= m.upper_bound() + 1.0; e += 1e-3) {
    const std::size_t c = sturm_count(m, e);
    REQUIRE(c >= last);
    last = c;
  }
  CHECK(sturm_count(m, m.lower_bound() - 1e-9) == 0);
  CHECK(sturm_count(m, m.upper_bound() + 1e-9) == 40);
}

TEST_CASE("bisection examples") {
  auto one = eigenvalues_bisect(TridiagMatrix({0.7}), 1e-12);
  REQUIRE(one.size() == 1);
  CHECK(one.eigenvalues[0] == doctest::Approx(0.7).epsilon(1e-12));

  auto three = eigenvalues_bisect(TridiagMatrix({0, 0, 0}), 1e-12);
  CHECK(three.eigenvalues[0] == doctest::Approx(-std::numbers::sqrt2).epsilon(1e-11));
  CHECK(std::abs(three.eigenvalues[1]) < 1e-11);
  CHECK(three.eigenvalues[2] == doctest::Approx(std::numbers::sqrt2).epsilon(1e-11));

  CHECK_THROWS_AS(eigenvalues_bisect(TridiagMatrix({0, 0}), 0.0), InvalidArgument);
  CHECK_THROWS_AS(eigenvalues_bisect(TridiagMatrix({0, 0}), -1.0), InvalidArgument);
  CHECK_THROWS_AS(TridiagMatrix(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("Fibonacci box against the dense oracle") {
  ModelParams p;
  p.lambda = 1.0;
  p.n_sites = 20;
  const auto s = fibonacci_spectrum(p);
  const auto d = dense_eigs(fibonacci_matrix(p));
  for (std::size_t i = 0; i < 20; ++i) CHECK(std::abs(s.eigenvalues[i] - d[i]) < 1e-8);
  REQUIRE(s.params.has_value());
  CHECK(s.params->n_sites == 20);
}

TEST_CASE("jacobi examples") {
  DenseMatrix id(4);
  for (std::size_t i = 0; i < 4; ++i) id(i, i) = 1.0;
  CHECK(jacobi_dense(id, 1e-14) == std::vector<double>{1, 1, 1, 1});

  DenseMatrix x(2);
  x(0, 1) = x(1, 0) = 1.0;
  const auto e = jacobi_dense(x, 1e-14);
  CHECK(e[0] == doctest::Approx(-1.0));
  CHECK(e[1] == doctest::Approx(1.0));

  DenseMatrix bad(2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(jacobi_dense(bad, 1e-14), InvalidArgument);
  CHECK_THROWS_AS(jacobi_dense(DenseMatrix(257), 1e-14), InvalidArgument);
}

TEST_CASE("jacobi agrees with bisection on a 12-site box") {
  std::mt19937_64 rng(5);
  const auto m = random_tridiag(rng, 12, 3.0);
  const auto a = eigenvalues_bisect(m, 1e-13).eigenvalues;
  const auto b = dense_eigs(m);
  for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);
}

TEST_CASE("cross-solver agreement on 200 random tridiagonals") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(1, 32);
  for (int t = 0; t < 200; ++t) {
    const auto m = random_tridiag(rng, size(rng), 4.0);
    const double tol = default_tolerance(m);
    const auto a = eigenvalues_bisect(m, tol).eigenvalues;
    const auto b = dense_eigs(m);
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(std::abs(a[i] - b[i]) <= 10 * tol);
  }
}

TEST_CASE("Cauchy interlacing") {
  std::mt19937_64 rng(17);
  for (std::size_t n = 2; n <= 50; n += 4) {
    const auto m = random_tridiag(rng, n, 2.0);
    const auto big = eigenvalues_bisect(m, 1e-13).eigenvalues;
    const auto small = eigenvalues_bisect(m.leading(n - 1), 1e-13).eigenvalues;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      REQUIRE(big[i] < small[i] + 1e-12);
      REQUIRE(small[i] < big[i + 1] + 1e-12);
    }
  }
}

TEST_CASE("free Laplacian matches 2cos(k pi/(N+1))") {
  for (std::int64_t n : {1, 2, 7, 64, 300}) {
    ModelParams p;
    p.lambda = 0.0;
    p.n_sites = n;
    const auto s = fibonacci_spectrum(p);
    for (std::int64_t k = 1; k <= n; ++k) {
      REQUIRE(std::abs(s.eigenvalues[n - k] - 2 * std::cos(k * std::numbers::pi / (n + 1))) <= 2 * s.tol);
    }
  }
}

TEST_CASE("spectrum invariants on a large box, including the threaded path") {
  ModelParams p;
  p.lambda = 1.5;
  p.omega = 0.3;
  p.n_sites = 5000;
  const auto s = fibonacci_spectrum(p);
  const auto m = fibonacci_matrix(p);
  REQUIRE(s.size() == 5000);
  CHECK(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
  CHECK(s.eigenvalues.front() >= -2.0);
  CHECK(s.eigenvalues.back() <= 1.5 + 2.0);
  // each eigenvalue sits at the right place in the Sturm count
  for (std::size_t k = 0; k < 5000; k += 97) {
    CHECK(sturm_count(m, s.eigenvalues[k] - 2 * s.tol) <= k);
    CHECK(sturm_count(m, s.eigenvalues[k] + 2 * s.tol) >= k + 1);
  }
}

TEST_CASE("default tolerance") {
  CHECK(default_tolerance(TridiagMatrix({0, 0})) == doctest::Approx(2e-12));
  CHECK(default_tolerance(TridiagMatrix({-10, 0})) == doctest::Approx(12e-12));
}
