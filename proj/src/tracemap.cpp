#include "quasispec/tracemap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "quasispec/error.hpp"

namespace quasispec {

double Point3::max_abs() const { return std::max({std::abs(x), std::abs(y), std::abs(z)}); }

bool Point3::finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

namespace {

Point3 step_unchecked(const Point3& p) { return {2.0 * p.x * p.y - p.z, p.x, p.y}; }

}  // namespace

Point3 trace_step(const Point3& p) {
  const Point3 q = step_unchecked(p);
  if (!q.finite()) throw NumericFailure("trace map iterate overflowed");
  return q;
}

Point3 trace_step_inverse(const Point3& p) {
  const Point3 q{p.y, p.z, 2.0 * p.y * p.z - p.x};
  if (!q.finite()) throw NumericFailure("inverse trace map iterate overflowed");
  return q;
}

double fricke_vogt(const Point3& p) {
  return p.x * p.x + p.y * p.y + p.z * p.z - 2.0 * p.x * p.y * p.z - 1.0;
}

Point3 initial_point(double energy, double lambda) { return {(energy - lambda) / 2.0, energy / 2.0, 1.0}; }

double default_escape_threshold(double lambda) { return std::max(4.0, 2.0 + lambda); }

int default_max_iter(int depth, double lambda) {
  require(depth >= 0, "depth must be non-negative");
  require(lambda >= 0.0, "lambda must be non-negative");
  return static_cast<int>(std::ceil(depth * std::log(2.0) / std::log(2.0 + lambda))) + 2;
}

EscapeResult escape_test(double energy, double lambda, int max_iter, double threshold) {
  require(max_iter >= 1, "escape test needs max_iter >= 1");
  require(threshold >= 2.0, "escape threshold must be >= 2");
  Point3 p = initial_point(energy, lambda);
  double m2 = std::numeric_limits<double>::infinity();  // max_abs two iterates back
  double m1 = p.max_abs();
  EscapeResult r;
  for (int k = 1; k <= max_iter; ++k) {
    p = step_unchecked(p);
    const double m0 = p.max_abs();
    if (!p.finite() || !std::isfinite(m0)) {
      return {true, k, std::numeric_limits<double>::infinity()};
    }
    if (m0 > threshold && m2 < m1 && m1 < m0) return {true, k, m0};
    m2 = m1;
    m1 = m0;
  }
  r.escaped = false;
  r.steps = max_iter;
  r.exit_norm = m1;
  return r;
}

IntervalSet::IntervalSet(std::vector<std::pair<double, double>> intervals) {
  for (const auto& [a, b] : intervals) {
    require(std::isfinite(a) && std::isfinite(b) && a <= b, "interval endpoints must be finite with a <= b");
  }
  std::sort(intervals.begin(), intervals.end());
  for (const auto& iv : intervals) {
    if (!intervals_.empty() && iv.first <= intervals_.back().second) {
      intervals_.back().second = std::max(intervals_.back().second, iv.second);
    } else {
      intervals_.push_back(iv);
    }
  }
}

bool IntervalSet::contains(double x) const { return !empty() && distance(x) == 0.0; }

double IntervalSet::distance(double x) const {
  require(!empty(), "distance to an empty interval set");
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                             [](double v, const std::pair<double, double>& iv) { return v < iv.first; });
  double best = std::numeric_limits<double>::infinity();
  if (it != intervals_.end()) best = it->first - x;
  if (it != intervals_.begin()) {
    const auto& prev = *(it - 1);
    best = std::min(best, x <= prev.second ? 0.0 : x - prev.second);
  }
  return best;
}

bool IntervalSet::subset_of(const IntervalSet& other) const {
  for (const auto& [a, b] : intervals_) {
    auto it = std::upper_bound(other.intervals_.begin(), other.intervals_.end(), a,
                               [](double v, const std::pair<double, double>& iv) { return v < iv.first; });
    if (it == other.intervals_.begin()) return false;
    const auto& host = *(it - 1);
    if (b > host.second) return false;
  }
  return true;
}

int CoverParams::resolved_max_iter() const { return max_iter > 0 ? max_iter : default_max_iter(depth, lambda); }

double CoverParams::resolved_threshold() const {
  return threshold > 0.0 ? threshold : default_escape_threshold(lambda);
}

CoverParams default_cover_params(double lambda, int depth) {
  CoverParams p;
  p.lambda = lambda;
  p.emin = -2.5;
  p.emax = 2.5 + lambda;
  p.depth = depth;
  return p;
}

IntervalSet spectrum_cover(const CoverParams& params) {
  require(std::isfinite(params.emin) && std::isfinite(params.emax) && params.emin < params.emax,
          "cover window must be nonempty");
  require(params.depth >= 1 && params.depth <= 26, "cover depth must lie in [1, 26]");
  const int max_iter = params.resolved_max_iter();
  const double threshold = params.resolved_threshold();
  const std::size_t cells = std::size_t{1} << params.depth;
  const double width = params.emax - params.emin;
  auto edge = [&](std::size_t i) {
    return i == cells ? params.emax : params.emin + width * (static_cast<double>(i) / static_cast<double>(cells));
  };
  auto bounded = [&](double e) { return !escape_test(e, params.lambda, max_iter, threshold).escaped; };

  std::vector<char> edge_bounded(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) edge_bounded[i] = bounded(edge(i));

  std::vector<std::pair<double, double>> kept;
  for (std::size_t i = 0; i < cells; ++i) {
    const double a = edge(i);
    const double b = edge(i + 1);
    if (edge_bounded[i] || edge_bounded[i + 1] || bounded(0.5 * (a + b))) kept.emplace_back(a, b);
  }
  return IntervalSet(std::move(kept));
}

double lebesgue_length(const IntervalSet& s) {
  double total = 0.0;
  for (const auto& [a, b] : s.intervals()) total += b - a;
  return total;
}

SlopeFit box_dimension(const IntervalSet& s, std::span<const double> scales) {
  require(!s.empty(), "box dimension of an empty set");
  require(scales.size() >= 3, "box dimension needs at least 3 scales");
  std::vector<double> x, y;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    const double eps = scales[k];
    require(eps > 0.0, "box scales must be positive");
    if (k > 0) require(eps < scales[k - 1], "box scales must be decreasing");
    double count = 0.0;
    bool have_last = false;
    double last = 0.0;
    for (const auto& [a, b] : s.intervals()) {
      double first = std::floor(a / eps);
      const double final = std::floor(b / eps);
      if (have_last && first <= last) first = last + 1.0;
      if (final >= first) count += final - first + 1.0;
      if (!have_last || final > last) last = final;
      have_last = true;
    }
    x.push_back(std::log(1.0 / eps));
    y.push_back(std::log(count));
  }
  return fit_line(x, y);
}

double lyapunov_finite(double energy, double lambda, int m) {
  require(m >= 1, "Lyapunov exponent needs m >= 1");
  const double threshold = default_escape_threshold(lambda);
  if (escape_test(energy, lambda, m, threshold).escaped) {
    throw NumericFailure("orbit escapes before " + std::to_string(m) + " steps");
  }
  Point3 p = initial_point(energy, lambda);
  // Energy direction of the line of initial conditions.
  double v[3] = {0.5, 0.5, 0.0};
  double log_growth = 0.0;
  for (int k = 0; k < m; ++k) {
    const double w0 = 2.0 * p.y * v[0] + 2.0 * p.x * v[1] - v[2];
    const double w1 = v[0];
    const double w2 = v[1];
    const double norm_before = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    const double norm_after = std::sqrt(w0 * w0 + w1 * w1 + w2 * w2);
    log_growth += std::log(norm_after / norm_before);
    v[0] = w0 / norm_after;
    v[1] = w1 / norm_after;
    v[2] = w2 / norm_after;
    p = step_unchecked(p);
  }
  return log_growth / m;
}

bool refine_bounded_energy(double a, double b, double lambda, int steps, double& energy) {
  constexpr int kProbes = 33;
  const double threshold = default_escape_threshold(lambda);
  for (int level = 0; level < 200; ++level) {
    const double width = b - a;
    if (!(width > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a)))) return false;
    int best = -1;
    int best_steps = -1;
    for (int i = 0; i < kProbes; ++i) {
      const double e = a + width * i / (kProbes - 1);
      const EscapeResult r = escape_test(e, lambda, steps, threshold);
      if (!r.escaped) {
        energy = e;
        return true;
      }
      if (r.steps > best_steps) {
        best_steps = r.steps;
        best = i;
      }
    }
    const double lo = a + width * std::max(0, best - 1) / (kProbes - 1);
    const double hi = a + width * std::min(kProbes - 1, best + 1) / (kProbes - 1);
    a = lo;
    b = hi;
  }
  return false;
}

std::vector<LyapunovScanRow> lyapunov_scan(std::span<const double> lambdas, const LyapunovScanParams& params) {
  require(!lambdas.empty(), "Lyapunov scan needs a nonempty lambda grid");
  require(params.e_samples >= 2 && params.m >= 1, "Lyapunov scan needs >= 2 samples and m >= 1");
  std::vector<LyapunovScanRow> rows;
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    const double lambda = lambdas[li];
    const CoverParams cp = default_cover_params(lambda, params.depth);
    const IntervalSet cover = spectrum_cover(cp);
    if (cover.empty()) throw NumericFailure("no bounded energies found at lambda = " + std::to_string(lambda));
    const double cell = (cp.emax - cp.emin) / static_cast<double>(std::size_t{1} << cp.depth);
    const double total = lebesgue_length(cover);

    std::mt19937_64 rng(params.seed * 0x9E3779B97F4A7C15ULL + li);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> values;
    const int max_attempts = 50 * params.e_samples;
    for (int attempt = 0; attempt < max_attempts && static_cast<int>(values.size()) < params.e_samples; ++attempt) {
      double t = unit(rng) * total;
      double e = cover.intervals().back().second;
      for (const auto& [a, b] : cover.intervals()) {
        if (t <= b - a) {
          e = a + t;
          break;
        }
        t -= b - a;
      }
      double bounded_e = 0.0;
      if (!refine_bounded_energy(e - cell, e + cell, lambda, params.m, bounded_e)) continue;
      values.push_back(lyapunov_finite(bounded_e, lambda, params.m));
    }
    if (static_cast<int>(values.size()) < params.e_samples) {
      throw NumericFailure("no bounded energies found at lambda = " + std::to_string(lambda));
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size() - 1);
    rows.push_back({lambda, mean, std::sqrt(var / static_cast<double>(values.size())),
                    static_cast<int>(values.size())});
  }
  return rows;
}

}  // namespace quasispec
