#pragma once

#include <functional>

#include <Eigen/Dense>

#include "skewfbm/mc/estimator.hpp"
#include "skewfbm/mc/rng.hpp"

namespace skewfbm::verify {

struct LiWeiCheck {
  mc::EstimatorResult moment;  // E |X_1| ... |X_n|
  double bound = 0.0;          // sqrt(perm(Sigma))
  bool holds = false;          // moment <= bound + 3 SE
  bool degenerate = false;     // smallest eigenvalue below 1e-12 * largest
};

/// Monte Carlo estimate of E prod |X_i| for X ~ N(0, cov), n <= 6.
LiWeiCheck gaussian_abs_moment_bound_check(const Eigen::MatrixXd& cov, std::size_t N, mc::SeedSpec seed);

/// Test function g >= 0 for the marginal identity.
struct TestFunction {
  enum class Kind { constant, gaussian };
  Kind kind = Kind::gaussian;
  double width = 1.0;  // g(x) = exp(-x^2 / (2 width^2))
  double operator()(double x) const { return kind == Kind::constant ? 1.0 : std::exp(-0.5 * x * x / (width * width)); }
};

struct MarginalCheck {
  double lhs = 0.0;   // int_{R^n} g(v_1) exp(-1/2 Var[sum v_j Z_j]) dv
  double rhs = 0.0;   // (2 pi)^{(n-1)/2} det^{-1/2} int g(v / sigma_1) exp(-v^2/2) dv
  double sigma1 = 0.0;
  double residual = 0.0;  // relative
};

/// Nested adaptive Gauss-Kronrod on R^n for n in {2, 3}; `tolerance` is the
/// relative tolerance of every level. Throws when a level fails to converge.
MarginalCheck gaussian_marginal_identity_check(const Eigen::MatrixXd& cov, const TestFunction& g, double tolerance = 1e-10);

}  // namespace skewfbm::verify
