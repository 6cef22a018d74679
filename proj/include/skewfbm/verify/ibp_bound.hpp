#pragma once

#include <cstddef>

#include "skewfbm/mc/estimator.hpp"
#include "skewfbm/mc/study_config.hpp"

namespace skewfbm::verify {

/// One-dimensional instance of
///   | E int_theta^t f^{(alpha)}(B_s) kappa(s) ds |,  kappa = (K_H(s, theta) - K_H(s, theta'))^eps,
/// with f(x) = exp(-1/(1 - (x - shift)^2)) on |x - shift| < 1. theta' = 0 selects
/// kappa = K_H(s, theta)^eps and drops the (theta - theta')/(theta theta') factor
/// of the bound.
struct IbpSpec {
  double H = 0.05;
  double gamma = 0.02;
  std::size_t alpha = 1;  // derivative order, 0 or 1
  int eps = 1;
  double theta = 0.5;
  double theta_prime = 0.25;
  double t = 1.0;
  double shift = 0.3;

  /// Throws on H outside (0, 1/2), gamma outside (0, H), ordering of the
  /// times, or H >= (1/2 - gamma) / (1 + 2 alpha).
  void validate() const;
};

/// int_R sup_s |f| dx for the bump; about 0.443993816.
double bump_l1_norm();

double bump_derivative(std::size_t order, double x);

struct IbpReport {
  mc::EstimatorResult lhs;   // MC over joint Gaussian vectors at the quadrature nodes
  double oracle = 0.0;       // same quadrature against the exact marginals
  double rhs_unit = 0.0;     // bound with C = 1
  double implied_C = 0.0;    // (|lhs| / rhs_unit)^{1/(1+alpha)}
  double f_norm = 0.0;
  bool agrees = false;       // |lhs - oracle| <= 3 SE
};

IbpReport ibp_bound_mc_check(const IbpSpec& spec, const mc::McConfig& mc);

/// C^{1+alpha} ||f|| ((theta - theta')/(theta theta'))^{gamma eps} theta^{a eps} ((2 alpha)!)^{1/4}
///   (t - theta)^{-H(1 + 2 alpha) + a eps + 1} / Gamma(-H(2 + 4 alpha) + 2 a eps + 2)^{1/2},  a = H - 1/2 - gamma.
double ibp_rhs(const IbpSpec& spec, double C, double f_norm);

}  // namespace skewfbm::verify
