#pragma once

#include "skewfbm/core/grid.hpp"

namespace skewfbm::frac {

/// Order of a Riemann-Liouville operator, restricted to (0, 1).
class FracOrder {
public:
  explicit FracOrder(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("fractional order must lie in (0, 1)");
  }
  double value() const { return alpha_; }

private:
  double alpha_;
};

// All four operators use product integration: the grid function is
// interpolated linearly between nodes and integrated exactly against the
// singular weight. Results are therefore exact for piecewise-linear inputs;
// on uniform grids the error for smooth inputs is O(h^2) away from the
// endpoint singularities.

/// (I^a_{a+} f)(t_i) at every node; the value at t_0 is 0.
GridFunction rl_integral_left(const GridFunction& f, FracOrder alpha);

/// (I^a_{b-} f)(t_i) at every node; the value at t_n is 0.
GridFunction rl_integral_right(const GridFunction& f, FracOrder alpha);

struct DerivativeResult {
  /// NaN at the endpoint where the (x-a)^{-alpha} term diverges.
  GridFunction value;
  /// Max |D_h f - D_{2h} f| over the nodes shared with the every-other-node
  /// subgrid. NaN when the grid is too small to form the subgrid.
  double residual;
};

/// Marchaud form of D^a_{a+}:
///   [f(x)/(x-a)^a + a * int_a^x (f(x)-f(y))/(x-y)^{a+1} dy] / Gamma(1-a).
DerivativeResult rl_derivative_left(const GridFunction& f, FracOrder alpha);

/// Mirror of rl_derivative_left on [x, b]; undefined at t_n.
DerivativeResult rl_derivative_right(const GridFunction& f, FracOrder alpha);

/// f(a + b - t) on the reflected grid.
GridFunction reflect(const GridFunction& f);

}  // namespace skewfbm::frac
