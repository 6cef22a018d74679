#include "skewfbm/fbm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "skewfbm/core/numerics.hpp"

namespace skewfbm::fbm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Q(x) = int_x^1 y^{-2H} (1 - y)^{H - 1/2} dy with delta = 1 - x passed
// separately. Near y = 1 substitute 1 - y = z^q (q = 1/(H + 1/2)); near
// y = 0 substitute y = w^r (r = 1/(1 - 2H)). Each Jacobian cancels its
// singular factor exactly, leaving smooth integrands.
double tail_integral(double H, double x, double delta) {
  const auto& g = numerics::UnitGauss<32>::get();
  const double q = 1.0 / (H + 0.5);
  auto upper = [&](double width) {  // int_{1-width}^1
    const double z1 = std::pow(width, 1.0 / q);
    double acc = 0.0;
    for (std::size_t k = 0; k < g.x.size(); ++k) acc += g.w[k] * std::pow(1.0 - std::pow(z1 * g.x[k], q), -2.0 * H);
    return acc * q * z1;
  };
  if (x >= 0.5) return upper(delta);

  const double r = 1.0 / (1.0 - 2.0 * H);
  const double m = 0.5 * (x + 1.0);
  const double w0 = std::pow(x, 1.0 / r);
  const double w1 = std::pow(m, 1.0 / r);
  double left = 0.0;
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    const double w = w0 + (w1 - w0) * g.x[k];
    left += g.w[k] * std::pow(1.0 - std::pow(w, r), H - 0.5);
  }
  return left * r * (w1 - w0) + upper(0.5 * delta);
}

}  // namespace

void require_hurst(double H) {
  if (!(H > 0.0 && H < 0.5)) throw std::invalid_argument("H must lie in (0, 1/2)");
}

double covariance(double H, double t, double s) {
  if (t < 0.0 || s < 0.0) throw std::invalid_argument("covariance: times must be non-negative");
  return 0.5 * (std::pow(t, 2.0 * H) + std::pow(s, 2.0 * H) - std::pow(std::abs(t - s), 2.0 * H));
}

double kernel_constant(double H) {
  require_hurst(H);
  return std::sqrt(2.0 * H / ((1.0 - 2.0 * H) * numerics::beta_fn(1.0 - 2.0 * H, H + 0.5)));
}

double kernel_K(double H, double t, double s) {
  if (!(s > 0.0 && s < t)) throw std::invalid_argument("kernel_K requires 0 < s < t");
  return kernel_K(H, t, s, t - s);
}

double kernel_K(double H, double t, double s, double t_minus_s) {
  if (!(s > 0.0 && t_minus_s > 0.0)) throw std::invalid_argument("kernel_K requires 0 < s < t");
  const double c = kernel_constant(H);
  const double first = std::pow(t / s, H - 0.5) * std::pow(t_minus_s, H - 0.5);
  // int_s^t u^{H-3/2}(u-s)^{H-1/2} du = s^{2H-1} Q(s/t)
  const double second = (0.5 - H) * std::pow(s, H - 0.5) * tail_integral(H, s / t, t_minus_s / t);
  return c * (first + second);
}

std::vector<double> kernel_K_row(double H, double t, std::span<const double> s) {
  const double c = kernel_constant(H);
  const auto& g = numerics::UnitGauss<6>::get();
  std::vector<double> out(s.size());
  auto f = [H](double y) { return std::pow(y, -2.0 * H) * std::pow(1.0 - y, H - 0.5); };
  double Q = 0.0;
  for (std::size_t k = s.size(); k-- > 0;) {
    if (!(s[k] > 0.0 && s[k] < t) || (k + 1 < s.size() && !(s[k] < s[k + 1])))
      throw std::invalid_argument("kernel_K_row requires increasing nodes in (0, t)");
    const double x = s[k] / t;
    const double len = k + 1 < s.size() ? (s[k + 1] - s[k]) / t : 0.0;
    const double room = std::min(x, 1.0 - (x + len));
    if (k + 1 == s.size() || len > 0.5 * room) {
      Q = tail_integral(H, x, (t - s[k]) / t);
    } else {
      double acc = 0.0;
      for (std::size_t m = 0; m < g.x.size(); ++m) acc += g.w[m] * f(x + len * g.x[m]);
      Q += acc * len;
    }
    out[k] = c * (std::pow(t / s[k], H - 0.5) * std::pow(t - s[k], H - 0.5) + (0.5 - H) * std::pow(s[k], H - 0.5) * Q);
  }
  return out;
}

double kernel_K_incomplete_beta(double H, double t, double s) {
  if (!(s > 0.0 && s < t)) throw std::invalid_argument("kernel_K requires 0 < s < t");
  const double a = 1.0 - 2.0 * H;
  const double b = H + 0.5;
  const double q = boost::math::ibetac(a, b, s / t) * numerics::beta_fn(a, b);
  const double c = kernel_constant(H);
  return c * (std::pow(t / s, H - 0.5) * std::pow(t - s, H - 0.5) + (0.5 - H) * std::pow(s, H - 0.5) * q);
}

double kernel_K_dt(double H, double t, double s) {
  if (!(s > 0.0 && s < t)) throw std::invalid_argument("kernel_K_dt requires 0 < s < t");
  return kernel_constant(H) * (H - 0.5) * std::pow(t / s, H - 0.5) * std::pow(t - s, H - 1.5);
}

std::vector<QuadNode> graded_rule(double lo, double hi, std::size_t n, double H) {
  if (!(hi > lo)) throw std::invalid_argument("graded_rule requires hi > lo");
  if (n < 2) throw std::invalid_argument("graded_rule needs at least 2 nodes");
  const double q = 1.0 / (2.0 * H);
  const double half = 0.5 * (hi - lo);
  const std::size_t m = n / 2;
  std::vector<QuadNode> rule;
  rule.reserve(2 * m);
  for (std::size_t k = 0; k < m; ++k) {
    const double v = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
    const double w = half * q * std::pow(v, q - 1.0) / static_cast<double>(m);
    const double off = half * std::pow(v, q);
    rule.push_back({lo + off, w, (hi - lo) - off});
  }
  for (std::size_t k = m; k-- > 0;) {
    const double v = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
    const double w = half * q * std::pow(v, q - 1.0) / static_cast<double>(m);
    const double off = half * std::pow(v, q);
    rule.push_back({hi - off, w, off});
  }
  return rule;
}

std::vector<QuadNode> graded_gauss_rule(double lo, double hi, double H) {
  if (!(hi > lo)) throw std::invalid_argument("graded_gauss_rule requires hi > lo");
  const auto& g = numerics::UnitGauss<24>::get();
  const double q = 1.0 / (2.0 * H);
  const double half = 0.5 * (hi - lo);
  std::vector<QuadNode> rule;
  rule.reserve(2 * g.x.size());
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    const double off = half * std::pow(g.x[k], q);
    rule.push_back({lo + off, g.w[k] * half * q * std::pow(g.x[k], q - 1.0), (hi - lo) - off});
  }
  for (std::size_t k = g.x.size(); k-- > 0;) {
    const double off = half * std::pow(g.x[k], q);
    rule.push_back({hi - off, g.w[k] * half * q * std::pow(g.x[k], q - 1.0), off});
  }
  return rule;
}

double kernel_gram(double H, double t, double s, std::size_t n) {
  require_hurst(H);
  const double m = std::min(t, s);
  if (!(m > 0.0)) return 0.0;
  double acc = 0.0;
  for (const auto& node : graded_rule(0.0, m, n, H))
    acc += node.w * kernel_K(H, t, node.x, (t - m) + node.to_hi) * kernel_K(H, s, node.x, (s - m) + node.to_hi);
  return acc;
}

std::vector<double> kstar_apply_at(double H, const GridFunction& phi, std::span<const double> points) {
  require_hurst(H);
  require_finite(phi, "kstar_apply");
  const TimeGrid& g = phi.grid;
  const double T = g.back();
  const auto nodes = g.nodes();
  std::vector<double> out(points.size(), kNaN);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double s = points[p];
    if (!(s > g.front() && s > 0.0 && s < T)) continue;
    // cell i with t_i <= s < t_{i+1}
    const std::size_t i =
        static_cast<std::size_t>(std::upper_bound(nodes.begin(), nodes.end(), s) - nodes.begin()) - 1;
    const double phi_s = phi.values[i];
    double acc = kernel_K(H, T, s) * phi_s;
    double k_prev = (i + 1 < g.size() - 1) ? kernel_K(H, g[i + 1], s) : 0.0;
    for (std::size_t j = i + 1; j + 1 < g.size(); ++j) {
      const double k_next = kernel_K(H, g[j + 1] < T ? g[j + 1] : T, s);
      acc += (phi.values[j] - phi_s) * (k_next - k_prev);
      k_prev = k_next;
    }
    out[p] = acc;
  }
  return out;
}

GridFunction kstar_apply(double H, const GridFunction& phi) {
  return GridFunction(phi.grid, kstar_apply_at(H, phi, phi.grid.nodes()));
}

}  // namespace skewfbm::fbm
