#include "quasispec/dos.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>

#include "quasispec/error.hpp"

namespace quasispec {

namespace {

double merge_tolerance_for(double diameter) { return 1e-12 * std::max(1.0, diameter); }

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Appends `a` to sorted `out`, folding it into the last cluster when it lies
// within `tol` of that cluster's leftmost position.
class ClusterMerger {
 public:
  ClusterMerger(std::vector<Atom>& out, double tol) : out_(out), tol_(tol) {}

  void push(double position, double weight) {
    if (!out_.empty() && position - anchor_ <= tol_) {
      out_.back().weight += weight;
      return;
    }
    out_.push_back({position, weight});
    anchor_ = position;
  }

 private:
  std::vector<Atom>& out_;
  double tol_;
  double anchor_ = 0.0;
};

}  // namespace

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) {
  require(!atoms.empty(), "atomic measure needs at least one atom");
  CompensatedSum total;
  for (const Atom& a : atoms) {
    require(std::isfinite(a.position), "atom position must be finite");
    require(a.weight > 0.0 && std::isfinite(a.weight), "atom weight must be positive");
    total.add(a.weight);
  }
  require(std::abs(total.value() - 1.0) <= 1e-12, "atom weights must sum to 1 within 1e-12");

  std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.position < y.position; });
  merge_tol_ = merge_tolerance_for(atoms.back().position - atoms.front().position);
  atoms_.reserve(atoms.size());
  ClusterMerger merger(atoms_, merge_tol_);
  for (const Atom& a : atoms) merger.push(a.position, a.weight);

  cumulative_.resize(atoms_.size() + 1);
  CompensatedSum run;
  cumulative_[0] = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    run.add(atoms_[i].weight);
    cumulative_[i + 1] = run.value();
  }
}

AtomicMeasure AtomicMeasure::dirac(double x) { return AtomicMeasure({{x, 1.0}}); }

AtomicMeasure AtomicMeasure::uniform(std::span<const double> positions) {
  require(!positions.empty(), "uniform measure needs at least one position");
  const double w = 1.0 / static_cast<double>(positions.size());
  std::vector<Atom> atoms;
  atoms.reserve(positions.size());
  for (double x : positions) atoms.push_back({x, w});
  return AtomicMeasure(std::move(atoms));
}

double AtomicMeasure::mean() const {
  CompensatedSum s;
  for (const Atom& a : atoms_) s.add(a.position * a.weight);
  return s.value();
}

double AtomicMeasure::variance() const {
  const double mu = mean();
  CompensatedSum s;
  for (const Atom& a : atoms_) s.add((a.position - mu) * (a.position - mu) * a.weight);
  return s.value();
}

double AtomicMeasure::ball_mass(double x, double r) const {
  auto less_pos = [](const Atom& a, double v) { return a.position < v; };
  auto pos_less = [](double v, const Atom& a) { return v < a.position; };
  const auto lo = std::lower_bound(atoms_.begin(), atoms_.end(), x - r, less_pos);
  const auto hi = std::upper_bound(atoms_.begin(), atoms_.end(), x + r, pos_less);
  return cumulative_[static_cast<std::size_t>(hi - atoms_.begin())] -
         cumulative_[static_cast<std::size_t>(lo - atoms_.begin())];
}

std::size_t AtomicMeasure::sample_index(double u) const {
  const double target = u * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin() + 1, cumulative_.end(), target);
  const auto idx = static_cast<std::size_t>(it - (cumulative_.begin() + 1));
  return std::min(idx, atoms_.size() - 1);
}

std::size_t UniformGrid::points() const {
  return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

double DensityEstimate::integral() const {
  if (values.size() < 2) return 0.0;
  CompensatedSum s;
  for (double v : values) s.add(v);
  return grid.step * (s.value() - 0.5 * (values.front() + values.back()));
}

AtomicMeasure empirical_measure(std::span<const double> eigenvalues) {
  require(!eigenvalues.empty(), "empirical measure of an empty spectrum");
  return AtomicMeasure::uniform(eigenvalues);
}

AtomicMeasure empirical_measure(const Spectrum1D& eigs) { return empirical_measure(eigs.eigenvalues); }

double cdf(const AtomicMeasure& m, double e) {
  const auto atoms = m.atoms();
  const auto it = std::upper_bound(atoms.begin(), atoms.end(), e,
                                   [](double v, const Atom& a) { return v < a.position; });
  return m.cumulative()[static_cast<std::size_t>(it - atoms.begin())];
}

AtomicMeasure convolve(const AtomicMeasure& a, const AtomicMeasure& b, std::size_t max_pairs) {
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  if (na > max_pairs / nb) {
    throw NumericFailure("convolution needs " + std::to_string(na) + " x " + std::to_string(nb) +
                         " pairs, above the cap of " + std::to_string(max_pairs));
  }
  const auto aa = a.atoms();
  const auto bb = b.atoms();

  // Row i is the sorted sequence aa[i] + bb[*]; k-way merge of the rows.
  struct Head {
    double value;
    std::uint32_t row;
    std::uint32_t col;
  };
  auto greater = [](const Head& x, const Head& y) {
    if (x.value != y.value) return x.value > y.value;
    return x.row > y.row;
  };
  std::priority_queue<Head, std::vector<Head>, decltype(greater)> heap(greater);
  for (std::size_t i = 0; i < na; ++i) {
    heap.push({aa[i].position + bb[0].position, static_cast<std::uint32_t>(i), 0});
  }

  std::vector<Atom> merged;
  ClusterMerger merger(merged, merge_tolerance_for(a.diameter() + b.diameter()));
  while (!heap.empty()) {
    const Head h = heap.top();
    heap.pop();
    merger.push(h.value, aa[h.row].weight * bb[h.col].weight);
    if (h.col + 1 < nb) heap.push({aa[h.row].position + bb[h.col + 1].position, h.row, h.col + 1});
  }
  return AtomicMeasure(std::move(merged));
}

double sup_cdf_distance(const AtomicMeasure& a, const AtomicMeasure& b) {
  // Both distribution functions are constant between consecutive atoms of
  // the merged grid, so right limits at grid points realize the supremum.
  const auto xa = a.atoms();
  const auto xb = b.atoms();
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  while (i < xa.size() || j < xb.size()) {
    double x;
    if (j >= xb.size() || (i < xa.size() && xa[i].position <= xb[j].position)) {
      x = xa[i].position;
    } else {
      x = xb[j].position;
    }
    while (i < xa.size() && xa[i].position <= x) ++i;
    while (j < xb.size() && xb[j].position <= x) ++j;
    best = std::max(best, std::abs(a.cumulative()[i] - b.cumulative()[j]));
  }
  return best;
}

UniformGrid covering_grid(const AtomicMeasure& m, double bandwidth, double step) {
  require(bandwidth > 0.0 && step > 0.0, "covering grid needs positive bandwidth and step");
  UniformGrid g;
  g.step = step;
  g.min = std::floor((m.min_position() - bandwidth) / step) * step - step;
  const double hi = std::ceil((m.max_position() + bandwidth) / step) * step + step;
  g.max = g.min + std::ceil((hi - g.min) / step) * step;
  return g;
}

DensityEstimate kde_density(const AtomicMeasure& m, double bandwidth, const UniformGrid& grid) {
  require(bandwidth > 0.0 && std::isfinite(bandwidth), "KDE bandwidth must be > 0");
  require(grid.step > 0.0 && grid.max > grid.min, "KDE grid must have positive step and extent");
  require(grid.step <= bandwidth / 4.0 * (1.0 + 1e-12), "KDE grid step must be <= bandwidth / 4");
  require(grid.min <= m.min_position() - bandwidth && grid.max >= m.max_position() + bandwidth,
          "KDE grid must cover the support plus one bandwidth");

  DensityEstimate d;
  d.grid = grid;
  d.bandwidth = bandwidth;
  const std::size_t n = grid.points();
  d.values.assign(n, 0.0);

  const double h = bandwidth;
  std::vector<double> local;
  for (const Atom& a : m.atoms()) {
    const auto first = static_cast<std::ptrdiff_t>(std::ceil((a.position - h - grid.min) / grid.step));
    const auto last = static_cast<std::ptrdiff_t>(std::floor((a.position + h - grid.min) / grid.step));
    const std::size_t lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(first, 0));
    const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(std::max<std::ptrdiff_t>(last, 0)), n - 1);
    local.clear();
    double lattice_sum = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      const double k = std::max(0.0, 1.0 - std::abs(grid.at(i) - a.position) / h) / h;
      local.push_back(k);
      lattice_sum += k;
    }
    lattice_sum *= grid.step;
    if (lattice_sum <= 0.0) continue;
    const double scale = a.weight / lattice_sum;
    for (std::size_t i = lo; i <= hi; ++i) d.values[i] += scale * local[i - lo];
  }
  return d;
}

double l2_norm(const DensityEstimate& d) {
  if (d.values.size() < 2) return 0.0;
  CompensatedSum s;
  for (double v : d.values) s.add(v * v);
  const double ends = 0.5 * (d.values.front() * d.values.front() + d.values.back() * d.values.back());
  return std::sqrt(d.grid.step * (s.value() - ends));
}

SlopeFit fit_line(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "line fit needs >= 2 matching points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "line fit needs distinct abscissae");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (f.intercept + f.slope * x[i]);
      rss += r * r;
    }
    f.stderr_ = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

std::vector<double> dyadic_radii(int from, int to) {
  require(to >= from, "dyadic radii need from <= to");
  std::vector<double> r;
  for (int k = from; k <= to; ++k) r.push_back(std::ldexp(1.0, -k));
  return r;
}

LocalDimension local_dimension(const AtomicMeasure& m, std::span<const double> radii, int samples,
                               std::uint64_t seed) {
  require(radii.size() >= 3, "local dimension needs at least 3 radii");
  require(samples >= 100, "local dimension needs at least 100 samples");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(radii[i] > 0.0, "radii must be positive");
    if (i > 0) require(radii[i] < radii[i - 1], "radii must be decreasing");
  }
  if (radii.back() <= m.merge_tolerance()) {
    throw InvalidArgument("radius below the atom merge tolerance; the measure is atomic at that scale");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LocalDimension out;
  out.radii.assign(radii.begin(), radii.end());
  out.mean_log_mass.assign(radii.size(), 0.0);
  const auto atoms = m.atoms();
  for (int s = 0; s < samples; ++s) {
    const double x = atoms[m.sample_index(unit(rng))].position;
    for (std::size_t k = 0; k < radii.size(); ++k) out.mean_log_mass[k] += std::log(m.ball_mass(x, radii[k]));
  }
  std::vector<double> logr(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    out.mean_log_mass[k] /= samples;
    logr[k] = std::log(radii[k]);
  }
  out.fit = fit_line(logr, out.mean_log_mass);
  return out;
}

std::vector<std::pair<double, double>> ids_curve(const Spectrum1D& eigs, std::span<const double> energies) {
  const AtomicMeasure m = empirical_measure(eigs);
  std::vector<std::pair<double, double>> out;
  out.reserve(energies.size());
  for (double e : energies) out.emplace_back(e, cdf(m, e));
  return out;
}

}  // namespace quasispec
