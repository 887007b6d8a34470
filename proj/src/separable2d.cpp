#include "quasispec/separable2d.hpp"

#include <algorithm>
#include <queue>

#include "quasispec/error.hpp"

namespace quasispec {

BoxSpec2D BoxSpec2D::make(double lambda1, double omega1, double lambda2, double omega2, std::int64_t n) {
  BoxSpec2D s;
  s.n = n;
  s.p1.lambda = lambda1;
  s.p1.omega = omega1;
  s.p1.n_sites = n;
  s.p2.lambda = lambda2;
  s.p2.omega = omega2;
  s.p2.n_sites = n;
  s.validate();
  return s;
}

void BoxSpec2D::validate() const {
  p1.validate();
  p2.validate();
  require(n >= 1 && p1.n_sites == n && p2.n_sites == n, "both factors must share the box size");
}

std::vector<double> eigs2d_from_sums(const Spectrum1D& s1, const Spectrum1D& s2) {
  require(!s1.eigenvalues.empty(), "empty factor spectrum");
  require(s1.size() == s2.size(), "factor spectra must have equal box sizes");
  std::vector<double> out;
  out.reserve(s1.size() * s2.size());
  for (double a : s1.eigenvalues)
    for (double b : s2.eigenvalues) out.push_back(a + b);
  std::sort(out.begin(), out.end());
  return out;
}

DenseMatrix assemble_dense_2d(const BoxSpec2D& spec) {
  spec.validate();
  require(spec.n <= kMaxDenseBox, "dense 2D assembly is limited to N <= 16");
  const auto n = static_cast<std::size_t>(spec.n);
  const std::vector<double> v1 = potential_vector(spec.p1);
  const std::vector<double> v2 = potential_vector(spec.p2);
  DenseMatrix h(n * n);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t row = m * n + k;
      h(row, row) = v1[m] + v2[k];
      if (m + 1 < n) {
        h(row, row + n) = 1.0;
        h(row + n, row) = 1.0;
      }
      if (k + 1 < n) {
        h(row, row + 1) = 1.0;
        h(row + 1, row) = 1.0;
      }
    }
  }
  return h;
}

IntervalSet sumset(const IntervalSet& a, const IntervalSet& b) {
  require(!a.empty() && !b.empty(), "sumset needs nonempty operands");
  const auto ia = a.intervals();
  const auto ib = b.intervals();
  // Row i, a[i] + b[*], is sorted by left endpoint; k-way merge keeps memory O(|a|).
  struct Head {
    double left;
    std::size_t row;
    std::size_t col;
  };
  auto greater = [](const Head& x, const Head& y) { return x.left > y.left; };
  std::priority_queue<Head, std::vector<Head>, decltype(greater)> heap(greater);
  for (std::size_t i = 0; i < ia.size(); ++i) heap.push({ia[i].first + ib[0].first, i, 0});

  std::vector<std::pair<double, double>> merged;
  while (!heap.empty()) {
    const Head h = heap.top();
    heap.pop();
    const double right = ia[h.row].second + ib[h.col].second;
    if (!merged.empty() && h.left <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, right);
    } else {
      merged.emplace_back(h.left, right);
    }
    if (h.col + 1 < ib.size()) heap.push({ia[h.row].first + ib[h.col + 1].first, h.row, h.col + 1});
  }
  return IntervalSet(std::move(merged));
}

std::vector<Gap> gap_report(const IntervalSet& s) {
  std::vector<Gap> gaps;
  const auto iv = s.intervals();
  for (std::size_t i = 1; i < iv.size(); ++i) {
    gaps.push_back({iv[i - 1].second, iv[i].first, iv[i].first - iv[i - 1].second});
  }
  return gaps;
}

}  // namespace quasispec
