#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "skewfbm/core/grid.hpp"

namespace skewfbm::fbm {

/// Throws unless 0 < H < 1/2.
void require_hurst(double H);

/// R_H(t, s) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2 for one component.
double covariance(double H, double t, double s);

/// c_H = sqrt(2H / ((1 - 2H) B(1 - 2H, H + 1/2))).
double kernel_constant(double H);

/// Volterra kernel K_H(t, s) for 0 < s < t. The inner integral
/// int_s^t u^{H-3/2} (u - s)^{H-1/2} du is evaluated by Gauss-Legendre
/// quadrature after substitutions that remove both endpoint singularities.
double kernel_K(double H, double t, double s);

/// Same as kernel_K with t - s supplied separately, for nodes so close to t
/// that the difference cannot be recovered from the rounded s.
double kernel_K(double H, double t, double s, double t_minus_s);

/// K_H(t, s_k) for strictly increasing s_k in (0, t). The inner integral is
/// accumulated between neighbouring nodes, which is much cheaper than
/// independent kernel_K calls when the nodes are dense.
std::vector<double> kernel_K_row(double H, double t, std::span<const double> s);

/// Same kernel through the regularised incomplete Beta function. Kept as an
/// independent cross-check of kernel_K.
double kernel_K_incomplete_beta(double H, double t, double s);

/// dK_H/dt (t, s) = c_H (H - 1/2) (t/s)^{H-1/2} (t - s)^{H-3/2}, 0 < s < t.
double kernel_K_dt(double H, double t, double s);

struct QuadNode {
  double x;
  double w;
  double to_hi;  // hi - x, exact even where x rounds to hi
};

/// Midpoint rule on [lo, hi] with n nodes, graded towards the endpoints
/// where the integrand may behave like |u - endpoint|^{2H-1}. The interval
/// is split at its midpoint and each half uses u = end -+ half * v^q with
/// q = 1/(2H).
std::vector<QuadNode> graded_rule(double lo, double hi, std::size_t n, double H);

/// Same grading with 24-point Gauss-Legendre in v on each half. Exact for
/// the integrand classes u^{H-1/2} and u^{2H-1} times smooth functions up to
/// rounding.
std::vector<QuadNode> graded_gauss_rule(double lo, double hi, double H);

/// int_0^{t ^ s} K_H(t, u) K_H(s, u) du with the graded rule of n nodes.
/// Equals covariance(H, t, s) in the limit n -> infinity.
double kernel_gram(double H, double t, double s, std::size_t n);

/// K*_H applied to a step function: phi takes the value phi[j] on
/// [t_j, t_{j+1}). Evaluated exactly (telescoping K_H(t_{j+1}, s) -
/// K_H(t_j, s)) at the requested points s in (0, T), T = last grid node.
/// Points outside (0, T) yield NaN.
std::vector<double> kstar_apply_at(double H, const GridFunction& phi, std::span<const double> points);

/// K*_H phi at the grid nodes; NaN at s = 0 and s = T where K_H(T, s) is
/// singular.
GridFunction kstar_apply(double H, const GridFunction& phi);

}  // namespace skewfbm::fbm
