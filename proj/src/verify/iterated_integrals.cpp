#include "skewfbm/verify/iterated_integrals.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "skewfbm/core/numerics.hpp"
#include "skewfbm/fbm/kernel.hpp"

namespace skewfbm::verify {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double exponent_a(const IteratedIntegralSpec& s) { return s.H - 0.5 - s.gamma; }

double sum_w(const IteratedIntegralSpec& s) { return std::accumulate(s.w.begin(), s.w.end(), 0.0); }

double sum_eps(const IteratedIntegralSpec& s) { return std::accumulate(s.eps.begin(), s.eps.end(), 0.0); }

// int_0^L f(x, x, L - x) dx with both offsets exact.
template <class F>
double integrate_offsets(F&& f, double L, double tol) {
  boost::math::quadrature::tanh_sinh<double> ts(12);
  const double half = 0.5 * L;
  auto g = [&](double z, double zc) {
    const double left = z < 0.0 ? -half * zc : half * (1.0 + z);
    const double right = z > 0.0 ? half * zc : half * (1.0 - z);
    if (!(left > 0.0) || !(right > 0.0)) return 0.0;
    return f(left, right);
  };
  return half * ts.integrate(g, tol);
}

// x -> the substitution x = c v^q on (0, c) with Gauss nodes in v.
struct Node {
  double left;   // x
  double right;  // L - x
  double w;
};

// Product rule on (0, L) split at L/2: x = (L/2) v^ql on the left half,
// L - x = (L/2) v^qr on the right half.
std::vector<Node> split_rule(double L, double ql, double qr) {
  const auto& g = numerics::UnitGauss<32>::get();
  const double half = 0.5 * L;
  std::vector<Node> rule;
  rule.reserve(2 * g.x.size());
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    const double off = half * std::pow(g.x[k], ql);
    rule.push_back({off, L - off, g.w[k] * half * ql * std::pow(g.x[k], ql - 1.0)});
  }
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    const double off = half * std::pow(g.x[k], qr);
    rule.push_back({L - off, off, g.w[k] * half * qr * std::pow(g.x[k], qr - 1.0)});
  }
  return rule;
}

struct Nested {
  const IteratedIntegralSpec& s;
  bool abs_kappa;

  double kappa(double x) const {  // x = s - theta
    const double u = s.theta + x;
    double k = fbm::kernel_K(s.H, u, s.theta, x);
    if (s.theta_prime > 0.0) k -= fbm::kernel_K(s.H, u, s.theta_prime, u - s.theta_prime);
    return abs_kappa ? std::abs(k) : k;
  }

  // int_0^L g_j(x) (L - x)^{w_j} level(j + 1, x) dx
  double level(std::size_t j, double L) const {
    if (j == s.w.size()) return 1.0;
    // integer multiples of the reciprocal exponents keep the singular factor
    // polynomial in v and push every other power of the offset to >= 2
    const double qr = std::ceil(3.0 * (s.w[j] + 1.0)) / (s.w[j] + 1.0);
    const double ql = s.eps[j] ? std::ceil(3.0 * (s.H + 0.5)) / (s.H + 0.5) : 3.0;
    double acc = 0.0;
    for (const auto& n : split_rule(L, ql, qr)) {
      double v = n.w * std::pow(n.right, s.w[j]) * level(j + 1, n.left);
      if (s.eps[j]) v *= kappa(n.left);
      acc += v;
    }
    return acc;
  }
};

}  // namespace

void IteratedIntegralSpec::validate() const {
  fbm::require_hurst(H);
  if (w.empty() || w.size() != eps.size()) throw std::invalid_argument("iterated integral: w and eps must have the same nonzero length");
  if (!(theta_prime >= 0.0 && theta_prime < theta && theta < t)) throw std::invalid_argument("iterated integral: need 0 <= theta' < theta < t");
  if (!(gamma > 0.0 && gamma < H)) throw std::invalid_argument("gamma must lie in (0, H)");
  const double a = H - 0.5 - gamma;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (eps[j] != 0 && eps[j] != 1) throw std::invalid_argument("eps flags must be 0 or 1");
    if (!(w[j] + a * eps[j] > -1.0)) throw std::invalid_argument("hypothesis w_j + (H - 1/2 - gamma) eps_j > -1 violated");
  }
}

double pi_gamma(const IteratedIntegralSpec& s) {
  const double a = exponent_a(s);
  double logp = 0.0;
  double W = 0.0, E = 0.0;
  for (std::size_t j = 1; j < s.w.size(); ++j) {
    W += s.w[j - 1];
    E += s.eps[j - 1];
    const double jj = static_cast<double>(j);
    logp += std::lgamma(W + a * E + jj) + std::lgamma(s.w[j] + 1.0) - std::lgamma(W + s.w[j] + a * E + jj + 1.0);
  }
  return std::exp(logp);
}

double iterated_integral_rhs(const IteratedIntegralSpec& s, double C) {
  s.validate();
  const double a = exponent_a(s);
  const double E = sum_eps(s);
  const double m = static_cast<double>(s.w.size());
  double r = std::pow(C, m) * std::pow(s.theta, a * E) * pi_gamma(s) * std::pow(s.t - s.theta, sum_w(s) + a * E + m);
  if (s.theta_prime > 0.0) r *= std::pow((s.theta - s.theta_prime) / (s.theta * s.theta_prime), s.gamma * E);
  return r;
}

double dirichlet_integral(const IteratedIntegralSpec& s) {
  double logv = 0.0;
  for (double w : s.w) logv += std::lgamma(w + 1.0);
  const double m = static_cast<double>(s.w.size());
  const double W = sum_w(s);
  return std::exp(logv - std::lgamma(W + m + 1.0)) * std::pow(s.t - s.theta, W + m);
}

double iterated_integral_numeric(const IteratedIntegralSpec& s, bool abs_kappa) {
  s.validate();
  if (s.w.size() > 3) throw std::invalid_argument("numeric iterated integral is limited to m <= 3");
  return Nested{s, abs_kappa}.level(0, s.t - s.theta);
}

IteratedIntegralBound iterated_integral_bound(const IteratedIntegralSpec& s, double C) {
  IteratedIntegralBound out;
  out.lhs = iterated_integral_numeric(s, true);
  out.rhs = iterated_integral_rhs(s, C);
  out.implied_C = std::pow(out.lhs / iterated_integral_rhs(s, 1.0), 1.0 / static_cast<double>(s.w.size()));
  const bool classical = std::all_of(s.eps.begin(), s.eps.end(), [](int e) { return e == 0; });
  out.classical = classical ? dirichlet_integral(s) : kNaN;
  out.holds = out.lhs <= 1.05 * out.rhs;
  return out;
}

BetaProduct beta_product_bound(std::size_t m, double H, std::size_t d) {
  fbm::require_hurst(H);
  if (m < 1 || d < 1) throw std::invalid_argument("beta product: need m >= 1 and d >= 1");
  const double x = H * static_cast<double>(1 + d);
  if (!(x < 0.5)) throw std::invalid_argument("beta product requires H < 1/(2(1+d))");
  const double a = 0.5 - x;
  const double b = 1.5 - x;
  const std::size_t n = 2 * m;
  const double lfact = std::lgamma(static_cast<double>(n) + 1.0);
  BetaProduct out;
  double lp = lfact;
  for (std::size_t j = 1; j <= n; ++j) lp += std::log(boost::math::beta(a, static_cast<double>(j) * b));
  out.product = std::exp(lp);

  double lt = static_cast<double>(n) * std::lgamma(a) + std::lgamma(b) + lfact - std::lgamma(a + static_cast<double>(n) * b);
  for (std::size_t j = 1; j < n; ++j) lt += std::log(a + static_cast<double>(j) * b);
  out.telescoped = std::exp(lt);

  const double lg = static_cast<double>(n) * std::lgamma(a) + std::lgamma(b) + lfact -
                    std::lgamma(a + static_cast<double>(n) * b) + static_cast<double>(n - 1) * std::log(b) +
                    std::lgamma(static_cast<double>(n) + a / b) - std::lgamma(1.0 + a / b);
  out.gamma_form = std::exp(lg);
  return out;
}

double simplex_moment_direct(double H, std::size_t d) {
  fbm::require_hurst(H);
  if (!(H * static_cast<double>(1 + d) < 0.5)) throw std::invalid_argument("simplex moment requires H < 1/(2(1+d))");
  const double h2 = 2.0 * H;
  const double dd = static_cast<double>(d);
  auto gam = [H](double u, double one_minus_u) { return std::pow(one_minus_u, -0.5 - H) * std::pow(u, 0.5 - H); };
  // u2 = x, 1 - u2 = y; u1 = p, u2 - u1 = q
  auto outer = [&](double u2, double one_minus_u2) {
    auto inner = [&](double u1, double gap) {
      const double A = std::pow(u1, h2);
      const double g2 = std::pow(gap, h2);
      double det;
      if (gap < u1) {
        const double D = A * std::expm1(h2 * std::log1p(gap / u1));  // u2^{2H} - u1^{2H}
        det = -0.25 * D * D + 0.5 * (2.0 * A + D) * g2 - 0.25 * g2 * g2;
      } else {
        const double B = std::pow(u2, h2);
        const double R = 0.5 * (A - B * std::expm1(h2 * std::log1p(-u1 / u2)));
        det = A * B - R * R;
      }
      return gam(u1, one_minus_u2 + gap) * std::pow(det, -0.5 * dd);
    };
    return gam(u2, one_minus_u2) * integrate_offsets(inner, u2, 1e-9);
  };
  return 2.0 * integrate_offsets(outer, 1.0, 1e-8);
}

SimplexMomentReport simplex_moment_bound_check(std::size_t m_max, double H, std::size_t d) {
  if (m_max < 1) throw std::invalid_argument("simplex moment check needs m_max >= 1");
  SimplexMomentReport out;
  const double x = 2.0 * H * static_cast<double>(1 + d);
  for (std::size_t m = 1; m <= m_max; ++m) {
    const auto b = beta_product_bound(m, H, d);
    out.bounds.push_back(b);
    out.normalised.push_back(b.product / std::exp(x * std::lgamma(static_cast<double>(m) + 1.0)));
    out.max_form_mismatch = std::max({out.max_form_mismatch, std::abs(b.telescoped / b.product - 1.0),
                                      std::abs(b.gamma_form / b.product - 1.0)});
  }
  for (std::size_t k = 1; k < out.normalised.size(); ++k) out.growth.push_back(out.normalised[k] / out.normalised[k - 1]);
  out.direct_m1 = simplex_moment_direct(H, d);
  out.direct_below_bound = out.direct_m1 <= out.bounds.front().product;
  return out;
}

}  // namespace skewfbm::verify
