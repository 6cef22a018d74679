#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "skewfbm/mc/estimator.hpp"
#include "skewfbm/mc/study_config.hpp"
#include "skewfbm/sde/mollified_sde.hpp"

namespace skewfbm::sde {

/// grad phi_eps(x) = -phi_eps(x) x / eps for the mollifier centred at 0.
Eigen::VectorXd mollifier_gradient(double epsilon, std::span<const double> x);

/// Jacobian of x -> alpha phi_eps(x) 1_d; every row equals alpha grad phi_eps(x)^T.
Eigen::MatrixXd drift_jacobian(const SdeSpec& spec, std::span<const double> x);

/// D_s X_t at the grid nodes t_{i+1}, ..., t_n for s = t_i. D_s X_s is not
/// defined (the kernel is singular there) and is not stored.
struct MalliavinPath {
  double s = 0.0;
  std::size_t s_index = 0;
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> values;
};

/// Integrals of u -> K_H(u, theta) over the grid cells from theta onwards,
/// plus the kernel at the nodes after theta. Independent of the path, so one
/// profile serves every path and bandwidth.
struct KernelProfile {
  double theta = 0.0;
  std::size_t first_cell = 0;         // cell with t_j <= theta < t_{j+1}
  std::vector<double> cell_integral;  // [theta or t_j, t_{j+1}] for j >= first_cell
  std::vector<double> node_kernel;    // K_H(t_{j+1}, theta) for j >= first_cell
};

/// to_end = T - theta when known more precisely than the rounded difference.
KernelProfile kernel_profile(double H, const TimeGrid& grid, double theta, double to_end = -1.0);

/// D_s X_t = K_H(t,s) I + R_t with R solved by left-point product
/// integration: R_{k+1} = R_k + J(X_k) (int_cell K_H(u,s) du I + R_k h).
/// Requires s to be an interior grid node. kernel_scale multiplies the
/// inhomogeneous term.
MalliavinPath solve_malliavin(const SdeSpec& spec, const fbm::PathMatrix& solution, double s, double kernel_scale = 1.0);

/// D_theta X_T for an arbitrary theta in (0, T) from a precomputed profile.
Eigen::MatrixXd terminal_malliavin(const SdeSpec& spec, const fbm::PathMatrix& solution, const KernelProfile& profile);

/// Differentiation-time nodes: `cells` equal cells with `order` Gauss nodes
/// each, the first and last cell graded towards 0 and T.
struct ThetaRule {
  std::vector<double> theta;
  std::vector<double> weight;
  std::vector<std::size_t> cell;
  std::vector<double> to_end;  // T - theta, exact near T
  double band = 0.0;  // cell width
};

ThetaRule theta_rule(double T, double H, std::size_t cells, std::size_t order = 8);

struct CompactnessRow {
  double epsilon = 0.0;
  mc::EstimatorResult double_integral;  // pairs in distinct cells only
  mc::EstimatorResult l2_norm;          // int_0^T E|D_theta X_T|^2 dtheta
};

struct CompactnessReport {
  double beta = 0.0;
  std::size_t cells = 0;
  double band = 0.0;
  std::vector<CompactnessRow> rows;
  /// alpha = 0 value of the double integral, d * int int (K - K')^2 / |.|^{1+2 beta}
  double deterministic_reference = 0.0;
  double max_over_min = 0.0;
  bool outside_proven_regime = false;
};

/// Banded proxy of int int E|D_theta X_T - D_theta' X_T|^2 / |theta - theta'|^{1+2 beta}
/// per epsilon. Pairs in the same theta cell are dropped. Paths are shared
/// across epsilon.
CompactnessReport compactness_diagnostic(const SdeSpec& base, std::span<const double> ladder, const mc::McConfig& mc,
                                         double beta, std::size_t cells = 32,
                                         fbm::SamplerMethod method = fbm::SamplerMethod::volterra);

/// d * int int_{distinct cells} (K_H(T,theta) - K_H(T,theta'))^2 / |theta - theta'|^{1+2 beta}
/// on the same nodes.
double kernel_band_integral(double H, double T, std::size_t d, double beta, const ThetaRule& rule);

}  // namespace skewfbm::sde
