#include "skewfbm/frac/fractional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace skewfbm::frac {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// x^p - y^p for x > y >= 0 without cancellation when x and y are close.
double pow_diff(double x, double y, double p) {
  if (y == 0.0) return std::pow(x, p);
  return std::pow(y, p) * std::expm1(p * std::log1p((x - y) / y));
}

// Weights of f(y0), f(y1) in int_{y0}^{y1} (x-y)^{a-1} f_lin(y) dy,
// with d0 = x - y0 > d1 = x - y1 >= 0.
struct PairWeights {
  double w0;
  double w1;
};

PairWeights integral_cell(double d0, double d1, double a) {
  const double h = d0 - d1;
  const double m0 = pow_diff(d0, d1, a) / a;                        // int v^{a-1}
  const double m1 = d0 * m0 - pow_diff(d0, d1, a + 1.0) / (a + 1.0);  // int v^{a-1}(d0-v)
  const double w1 = m1 / h;
  return {m0 - w1, w1};
}

// Contribution of a non-final cell to int (F - f_lin(y)) (x-y)^{-a-1} dy,
// returned as coefficients (cF, c0, c1) of F, f(y0), f(y1); requires d1 > 0.
struct MarchaudWeights {
  double cf;
  double c0;
  double c1;
};

MarchaudWeights marchaud_cell(double d0, double d1, double a) {
  const double h = d0 - d1;
  const double p0 = -pow_diff(d0, d1, -a) / a;                       // int v^{-a-1}
  const double p1 = d0 * p0 - pow_diff(d0, d1, 1.0 - a) / (1.0 - a);  // int v^{-a-1}(d0-v)
  return {p0, -(p0 - p1 / h), -p1 / h};
}

std::vector<double> integral_left_values(const TimeGrid& g, std::span<const double> f, double a) {
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  const double scale = 1.0 / std::tgamma(a);
  if (g.is_uniform()) {
    const double h = (g.back() - g.front()) / static_cast<double>(g.steps());
    std::vector<PairWeights> w(n);
    for (std::size_t k = 1; k < n; ++k)
      w[k] = integral_cell(static_cast<double>(k) * h, static_cast<double>(k - 1) * h, a);
    for (std::size_t i = 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < i; ++j) s += w[i - j].w0 * f[j] + w[i - j].w1 * f[j + 1];
      out[i] = scale * s;
    }
    return out;
  }
  for (std::size_t i = 1; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      const auto w = integral_cell(g[i] - g[j], g[i] - g[j + 1], a);
      s += w.w0 * f[j] + w.w1 * f[j + 1];
    }
    out[i] = scale * s;
  }
  return out;
}

std::vector<double> marchaud_left_values(const TimeGrid& g, std::span<const double> f, double a) {
  const std::size_t n = g.size();
  std::vector<double> out(n, kNaN);
  const double scale = 1.0 / std::tgamma(1.0 - a);
  const bool uniform = g.is_uniform();
  std::vector<MarchaudWeights> w;
  double h = 0.0;
  if (uniform) {
    h = (g.back() - g.front()) / static_cast<double>(g.steps());
    w.resize(n);
    for (std::size_t k = 2; k < n; ++k)
      w[k] = marchaud_cell(static_cast<double>(k) * h, static_cast<double>(k - 1) * h, a);
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double F = f[i];
    // final cell: F - f_lin(y) = slope * (x - y)
    const double hl = g[i] - g[i - 1];
    double s = (F - f[i - 1]) * std::pow(hl, -a) / (1.0 - a);
    for (std::size_t j = 0; j + 1 < i; ++j) {
      const MarchaudWeights c = uniform ? w[i - j] : marchaud_cell(g[i] - g[j], g[i] - g[j + 1], a);
      s += c.cf * F + c.c0 * f[j] + c.c1 * f[j + 1];
    }
    out[i] = scale * (F * std::pow(g[i] - g.front(), -a) + a * s);
  }
  return out;
}

double subgrid_residual(const GridFunction& f, double a, const std::vector<double>& fine) {
  if (f.size() < 5) return kNaN;
  std::vector<double> nodes, vals;
  std::vector<std::size_t> fine_index;
  for (std::size_t i = 0; i < f.size(); i += 2) {
    nodes.push_back(f.grid[i]);
    vals.push_back(f.values[i]);
    fine_index.push_back(i);
  }
  if (fine_index.back() != f.size() - 1) {
    nodes.push_back(f.grid.back());
    vals.push_back(f.values.back());
    fine_index.push_back(f.size() - 1);
  }
  const auto coarse = marchaud_left_values(TimeGrid(std::move(nodes)), vals, a);
  double r = 0.0;
  for (std::size_t k = 1; k < coarse.size(); ++k) r = std::max(r, std::abs(coarse[k] - fine[fine_index[k]]));
  return r;
}

}  // namespace

GridFunction reflect(const GridFunction& f) {
  const std::size_t n = f.size();
  const double ab = f.grid.front() + f.grid.back();
  std::vector<double> nodes(n), vals(n);
  for (std::size_t k = 0; k < n; ++k) {
    nodes[k] = ab - f.grid[n - 1 - k];
    vals[k] = f.values[n - 1 - k];
  }
  nodes.front() = f.grid.front();
  nodes.back() = f.grid.back();
  return GridFunction(TimeGrid(std::move(nodes)), std::move(vals));
}

GridFunction rl_integral_left(const GridFunction& f, FracOrder alpha) {
  require_finite(f, "rl_integral_left");
  return GridFunction(f.grid, integral_left_values(f.grid, f.values, alpha.value()));
}

GridFunction rl_integral_right(const GridFunction& f, FracOrder alpha) {
  require_finite(f, "rl_integral_right");
  const GridFunction r = reflect(f);
  auto v = integral_left_values(r.grid, r.values, alpha.value());
  std::reverse(v.begin(), v.end());
  return GridFunction(f.grid, std::move(v));
}

DerivativeResult rl_derivative_left(const GridFunction& f, FracOrder alpha) {
  require_finite(f, "rl_derivative_left");
  auto v = marchaud_left_values(f.grid, f.values, alpha.value());
  const double residual = subgrid_residual(f, alpha.value(), v);
  return {GridFunction(f.grid, std::move(v)), residual};
}

DerivativeResult rl_derivative_right(const GridFunction& f, FracOrder alpha) {
  require_finite(f, "rl_derivative_right");
  const GridFunction r = reflect(f);
  auto v = marchaud_left_values(r.grid, r.values, alpha.value());
  const double residual = subgrid_residual(r, alpha.value(), v);
  std::reverse(v.begin(), v.end());
  return {GridFunction(f.grid, std::move(v)), residual};
}

}  // namespace skewfbm::frac
