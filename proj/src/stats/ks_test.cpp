#include "skewfbm/stats/ks_test.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace skewfbm::stats {

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.27) return 1.0;
  double s = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

namespace {

// P(|i/n - j/m| < D for every lattice point of a uniformly random monotone
// path from (0,0) to (n,m)), with D*n*m = k an integer.
double inside_probability(std::size_t n, std::size_t m, std::int64_t k) {
  const auto inside = [&](std::size_t i, std::size_t j) {
    const std::int64_t v = static_cast<std::int64_t>(i) * static_cast<std::int64_t>(m) -
                           static_cast<std::int64_t>(j) * static_cast<std::int64_t>(n);
    return (v < 0 ? -v : v) < k;
  };
  // u[j] holds the probability mass of paths through (i, j) that stayed inside
  std::vector<double> u(m + 1, 0.0);
  u[0] = 1.0;
  for (std::size_t j = 1; j <= m; ++j) u[j] = inside(0, j) ? u[j - 1] : 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double di = static_cast<double>(i);
    u[0] = inside(i, 0) ? u[0] : 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
      if (!inside(i, j)) {
        u[j] = 0.0;
        continue;
      }
      const double dj = static_cast<double>(j);
      u[j] = u[j] * di / (di + dj) + u[j - 1] * dj / (di + dj);
    }
  }
  return u[m];
}

}  // namespace

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double max_exact_work) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS test needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const std::size_t n = x.size(), m = y.size();
  // D in units of 1/(n m): track i*m - j*n
  std::int64_t best = 0;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    const double v = std::min(x[i], y[j]);
    while (i < n && x[i] == v) ++i;
    while (j < m && y[j] == v) ++j;
    const std::int64_t diff = static_cast<std::int64_t>(i) * static_cast<std::int64_t>(m) -
                              static_cast<std::int64_t>(j) * static_cast<std::int64_t>(n);
    best = std::max(best, diff < 0 ? -diff : diff);
  }
  KsResult r;
  r.n = n;
  r.m = m;
  r.statistic = static_cast<double>(best) / (static_cast<double>(n) * static_cast<double>(m));
  if (static_cast<double>(n) * static_cast<double>(m) <= max_exact_work) {
    r.exact = true;
    r.p_value = std::clamp(1.0 - inside_probability(n, m, best), 0.0, 1.0);
  } else {
    const double ne = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
    const double s = std::sqrt(ne);
    r.p_value = kolmogorov_sf((s + 0.12 + 0.11 / s) * r.statistic);
  }
  return r;
}

}  // namespace skewfbm::stats
