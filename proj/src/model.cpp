#include "quasispec/model.hpp"

#include <cmath>

#include "quasispec/error.hpp"

namespace quasispec {

namespace {

constexpr double kTieWindow = 1e-12;

struct DoubleDouble {
  double hi;
  double lo;
};

DoubleDouble two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

DoubleDouble add(DoubleDouble a, DoubleDouble b) {
  DoubleDouble s = two_sum(a.hi, b.hi);
  double lo = s.lo + a.lo + b.lo;
  return two_sum(s.hi, lo);
}

// Compensated frac(n*alpha + omega) compared against 1 - alpha.
bool in_window_compensated(std::int64_t n, double alpha, double omega) {
  const double nd = static_cast<double>(n);
  const double prod = nd * alpha;
  const double prod_err = std::fma(nd, alpha, -prod);
  DoubleDouble x = add({prod, prod_err}, {omega, 0.0});
  const double fl = std::floor(x.hi);
  DoubleDouble f = add(x, {-fl, 0.0});
  if (f.hi + f.lo < 0.0) f = add(f, {1.0, 0.0});
  if (f.hi + f.lo >= 1.0) f = add(f, {-1.0, 0.0});
  const DoubleDouble left = two_sum(1.0, -alpha);
  const DoubleDouble diff = add(f, {-left.hi, -left.lo});
  return diff.hi > 0.0 || (diff.hi == 0.0 && diff.lo >= 0.0);
}

}  // namespace

void ModelParams::validate() const {
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be finite and >= 0");
  require(omega >= 0.0 && omega < 1.0, "omega must lie in [0, 1)");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(n_sites >= 1, "n_sites must be >= 1");
}

double frac(double x) {
  double f = x - std::floor(x);
  // x - floor(x) can round up to exactly 1 for tiny negative x.
  return f >= 1.0 ? 0.0 : f;
}

double potential_value(std::int64_t n, const ModelParams& p) {
  const double f = frac(static_cast<double>(n) * p.alpha + p.omega);
  const double left = 1.0 - p.alpha;
  bool inside;
  if (std::abs(f - left) < kTieWindow || f < kTieWindow || f > 1.0 - kTieWindow) {
    inside = in_window_compensated(n, p.alpha, p.omega);
  } else {
    inside = f >= left;
  }
  return inside ? p.lambda : 0.0;
}

std::vector<double> potential_vector(std::int64_t start, const ModelParams& p) {
  require(p.n_sites >= 1, "n_sites must be >= 1");
  std::vector<double> v(static_cast<std::size_t>(p.n_sites));
  for (std::int64_t i = 0; i < p.n_sites; ++i) v[static_cast<std::size_t>(i)] = potential_value(start + i, p);
  return v;
}

std::vector<double> potential_vector(const ModelParams& p) { return potential_vector(p.start, p); }

std::vector<std::uint8_t> substitution_word(int k, int max_level) {
  if (k < 1 || k > max_level) {
    throw InvalidArgument("substitution level " + std::to_string(k) + " outside [1, " +
                          std::to_string(max_level) + "]");
  }
  // w_{k+1} = w_k w_{k-1}, with w_1 = a and w_2 = ab.
  std::vector<std::uint8_t> prev{1};
  if (k == 1) return prev;
  std::vector<std::uint8_t> cur{1, 0};
  for (int level = 2; level < k; ++level) {
    std::vector<std::uint8_t> next;
    next.reserve(cur.size() + prev.size());
    next.insert(next.end(), cur.begin(), cur.end());
    next.insert(next.end(), prev.begin(), prev.end());
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

}  // namespace quasispec
