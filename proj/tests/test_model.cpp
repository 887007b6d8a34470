#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <string>

#include "quasispec/error.hpp"
#include "quasispec/model.hpp"

using namespace quasispec;

namespace {

ModelParams params(double lambda, double omega = 0.0, std::int64_t n = 1) {
  ModelParams p;
  p.lambda = lambda;
  p.omega = omega;
  p.n_sites = n;
  return p;
}

// Independent classification in long double.
int coded_site(std::int64_t n, long double omega) {
  const long double alpha = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double x = n * alpha + omega;
  x -= std::floor(x);
  return x >= 1.0L - alpha ? 1 : 0;
}

}  // namespace

TEST_CASE("potential values at the first sites") {
  CHECK(potential_value(0, params(1)) == 0.0);
  CHECK(potential_value(1, params(1)) == 1.0);
  CHECK(potential_value(2, params(1)) == 0.0);
}

TEST_CASE("potential vectors") {
  auto p = params(1, 0, 5);
  CHECK(potential_vector(1, p) == std::vector<double>{1, 0, 1, 1, 0});
  CHECK(potential_vector(0, params(0, 0, 3)) == std::vector<double>{0, 0, 0});
  CHECK(potential_vector(1, params(2, 0, 5)) == std::vector<double>{2, 0, 2, 2, 0});
  p.start = 1;
  CHECK(potential_vector(p) == potential_vector(1, p));
}

TEST_CASE("substitution words") {
  auto str = [](const std::vector<std::uint8_t>& w) {
    std::string s;
    for (auto c : w) s += char('0' + c);
    return s;
  };
  CHECK(str(substitution_word(1)) == "1");
  CHECK(str(substitution_word(3)) == "101");
  CHECK(str(substitution_word(5)) == "10110101");
  // lengths follow the Fibonacci numbers
  std::size_t a = 1, b = 2;
  for (int k = 2; k <= 25; ++k) {
    CHECK(substitution_word(k).size() == b);
    const std::size_t c = a + b;
    a = b;
    b = c;
  }
  CHECK_THROWS_AS(substitution_word(0), InvalidArgument);
  CHECK_THROWS_AS(substitution_word(31), InvalidArgument);
  CHECK_THROWS_AS(substitution_word(12, 10), InvalidArgument);
}

TEST_CASE("circle-map word agrees with the substitution word") {
  const auto w = substitution_word(20);
  REQUIRE(w.size() >= 5000);
  const auto p = params(1);
  for (std::int64_t n = 1; n <= 5000; ++n) {
    REQUIRE(potential_value(n, p) == static_cast<double>(w[static_cast<std::size_t>(n - 1)]));
  }
}

TEST_CASE("factor complexity is m + 1") {
  std::string word;
  const auto p = params(1);
  for (std::int64_t n = 1; n <= 5000; ++n) word += potential_value(n, p) != 0.0 ? '1' : '0';
  for (std::size_t m = 1; m <= 12; ++m) {
    std::set<std::string> factors;
    for (std::size_t i = 0; i + m <= word.size(); ++i) factors.insert(word.substr(i, m));
    CHECK(factors.size() == m + 1);
  }
}

TEST_CASE("values are 0 or lambda and match a long double oracle") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> site(-1000000, 1000000);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const long double alpha = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  for (int t = 0; t < 20000; ++t) {
    const double lambda = 3.0 * unit(rng);
    const double omega = unit(rng);
    const std::int64_t n = site(rng);
    const double v = potential_value(n, params(lambda, omega));
    REQUIRE((v == 0.0 || v == lambda));
    long double x = n * alpha + static_cast<long double>(omega);
    x -= std::floor(x);
    if (std::abs(x - (1.0L - alpha)) < 1e-8L || x < 1e-8L || x > 1.0L - 1e-8L) continue;
    if (lambda > 0.0) REQUIRE(v == lambda * coded_site(n, omega));
  }
}

TEST_CASE("half-open boundary is resolved deterministically") {
  const double left = 1.0 - kGoldenConjugate;
  CHECK(potential_value(0, params(1, left)) == 1.0);
  CHECK(potential_value(0, params(1, std::nextafter(left, 0.0))) == 0.0);
  CHECK(potential_value(0, params(1, 0.0)) == 0.0);
}

TEST_CASE("frac") {
  CHECK(frac(2.25) == doctest::Approx(0.25));
  CHECK(frac(-0.25) == doctest::Approx(0.75));
  CHECK(frac(3.0) == 0.0);
  CHECK(frac(-1e-300) < 1.0);
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(params(1).validate());
  CHECK_THROWS_AS(params(-1).validate(), InvalidArgument);
  CHECK_THROWS_AS(params(1, 1.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(params(1, -0.1).validate(), InvalidArgument);
  CHECK_THROWS_AS(params(1, 0, 0).validate(), InvalidArgument);
  auto p = params(1);
  p.alpha = 1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}
