#pragma once

#include <cstddef>
#include <vector>

namespace skewfbm::verify {

/// Parameters of the simplex integral
///   int_{theta < s_m < ... < s_1 < t} prod_j kappa(s_j)^{eps_j} (s_{j-1} - s_j)^{w_j} ds,  s_0 = t,
/// with kappa(s) = K_H(s, theta) - K_H(s, theta'). theta' = 0 drops the
/// second term.
struct IteratedIntegralSpec {
  std::vector<double> w;
  std::vector<int> eps;
  double H = 0.1;
  double gamma = 0.05;
  double theta = 0.5;
  double theta_prime = 0.25;
  double t = 1.0;

  /// Throws unless the sizes agree, 0 <= theta' < theta < t, gamma in (0, H)
  /// and w_j + (H - 1/2 - gamma) eps_j > -1.
  void validate() const;
};

/// prod_{j=1}^{m-1} Gamma(W_j + a E_j + j) Gamma(w_{j+1} + 1) / Gamma(W_{j+1} + a E_j + j + 1),
/// W_j, E_j partial sums, a = H - 1/2 - gamma.
double pi_gamma(const IteratedIntegralSpec& s);

/// C^m ((theta - theta')/(theta theta'))^{gamma E} theta^{aE} Pi (t - theta)^{W + aE + m}.
/// The first factor is omitted when theta' = 0.
double iterated_integral_rhs(const IteratedIntegralSpec& s, double C);

/// prod Gamma(w_j + 1) / Gamma(W + m + 1) (t - theta)^{W + m}: the exact value
/// when every eps_j = 0.
double dirichlet_integral(const IteratedIntegralSpec& s);

/// Nested tanh-sinh quadrature of the left-hand side, m <= 3. Endpoint
/// offsets are passed exactly so the singular factors stay accurate.
/// `abs_kappa` integrates |kappa|^{eps_j} instead of kappa^{eps_j}.
double iterated_integral_numeric(const IteratedIntegralSpec& s, bool abs_kappa = true);

struct IteratedIntegralBound {
  double lhs = 0.0;
  double rhs = 0.0;          // with the supplied C
  double implied_C = 0.0;    // (lhs / rhs_{C=1})^{1/m}
  double classical = 0.0;    // Dirichlet value, NaN unless every eps_j = 0
  bool holds = false;        // lhs <= 1.05 rhs
};

IteratedIntegralBound iterated_integral_bound(const IteratedIntegralSpec& s, double C = 2.0);

/// Beta reduction of the 2m-fold integral over 0 < u_1 < ... < u_{2m} < 1 of
/// prod (1-u_j)^{-1/2-H} u_j^{1/2-H} det Cov(B_{u_1}, ..., B_{u_{2m}})^{-d/2}, with a
/// = 1/2 - H(1+d), b = 3/2 - H(1+d).
struct BetaProduct {
  double product = 0.0;     // (2m)! prod_{j=1}^{2m} B(a, j b)
  double telescoped = 0.0;  // Gamma(a)^{2m} Gamma(b) (2m)! / Gamma(a + 2m b) prod_{j<2m} (a + j b)
  double gamma_form = 0.0;  // closed Gamma form with b^{2m-1} Gamma(2m + a/b) / Gamma(1 + a/b)
};

/// Requires H < 1/(2(1+d)) and m >= 1.
BetaProduct beta_product_bound(std::size_t m, double H, std::size_t d);

/// The m = 1 integral 2 int_{u_1<u_2} ... by nested tanh-sinh quadrature.
double simplex_moment_direct(double H, std::size_t d);

struct SimplexMomentReport {
  std::vector<BetaProduct> bounds;   // m = 1..m_max
  std::vector<double> normalised;    // bound(m) / (m!)^{2H(1+d)}
  std::vector<double> growth;        // normalised(m+1) / normalised(m)
  double direct_m1 = 0.0;
  double max_form_mismatch = 0.0;    // relative, over the three forms
  bool direct_below_bound = false;
};

SimplexMomentReport simplex_moment_bound_check(std::size_t m_max, double H, std::size_t d);

}  // namespace skewfbm::verify
