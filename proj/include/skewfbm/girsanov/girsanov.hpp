#pragma once

#include <span>
#include <string>
#include <vector>

#include "skewfbm/core/grid.hpp"
#include "skewfbm/fbm/sampler.hpp"
#include "skewfbm/lt/local_time.hpp"
#include "skewfbm/mc/estimator.hpp"
#include "skewfbm/mc/study_config.hpp"

namespace skewfbm::girsanov {

/// 1 / (c_H Gamma(H + 1/2)): converts the fractional-integral composition
/// into the inverse of h -> int_0^t K_H(t, s) h(s) ds for our kernel.
double inverse_normalisation(double H);

/// K_H^{-1} h for h(t) = int_0^t u(r) dr, given u on the grid:
///   s^{H-1/2} I^{1/2-H} [s^{1/2-H} u(s)] * inverse_normalisation(H).
/// The value at s = 0 is NaN (singular prefactor).
GridFunction kh_inverse_of_integral(double H, const GridFunction& u);

/// u_s = alpha phi_eps(B_s - x), one grid function per component (the drift
/// is phi_eps 1_d, so the components coincide).
std::vector<GridFunction> drift_functional(const fbm::PathMatrix& path, const lt::MollifierSpec& spec, double alpha = 1.0);

/// K_H^{-1} applied to the running integral of the drift functional, per
/// component.
std::vector<GridFunction> kh_inverse_of_running_integral(double H, const fbm::PathMatrix& path,
                                                         const lt::MollifierSpec& spec, double alpha = 1.0);

struct DensitySample {
  double xi = 1.0;
  double log_xi = 0.0;
  double stochastic_integral = 0.0;  // sum_c sum_i theta_c(t_i) dW_{i,c}
  double quadratic_term = 0.0;       // int_0^T |theta|^2 ds, trapezoid
};

/// Density for theta given per component on the path grid. The value at
/// t_0 is taken as its limit 0.
DensitySample doleans_exponential(std::span<const GridFunction> theta, const Eigen::MatrixXd& dW);

/// xi_T = exp(-int theta dW - 1/2 int |theta|^2) with theta = K_H^{-1}(alpha int phi_eps(B - x)).
/// The driver must be the one stored with the path (fingerprint checked).
DensitySample doleans_exponential(double H, const fbm::PathMatrix& path, const lt::MollifierSpec& spec,
                                  const fbm::BrownianDriver& driver, double alpha = 1.0);

/// H < 1/(2(1 + d)).
bool in_exponential_moment_regime(double H, std::size_t d);

struct ExpMomentRow {
  double epsilon = 0.0;
  double estimate = 0.0;  // E exp(mu int |theta|^2)
  double std_error = 0.0;
  double log_estimate = 0.0;
  double ess = 0.0;        // Kish ESS of the exponential terms
  bool heavy_tail = false; // ESS below 10% of N
};

struct ExpMomentTable {
  double mu = 0.0;
  std::vector<ExpMomentRow> rows;
  double sup_estimate = 0.0;
  bool outside_regime = false;
};

/// E exp(mu int_0^T (K_H^{-1}(int_0^. phi_{x,eps}(B_u) du)(t))^2 dt) per
/// rung, on shared paths, accumulated in log space.
ExpMomentTable exponential_moment_estimate(const fbm::FbmSpec& fbm, std::span<const double> ladder, double mu,
                                           const mc::McConfig& mc, std::vector<double> center = {});

struct MeanOneReport {
  double alpha = 0.0;
  double epsilon = 0.0;
  mc::EstimatorResult xi;  // plain mean of xi_T, ess from the xi as weights
  double z = 0.0;          // (mean - 1) / se, 0 when se = 0
  double min_xi = 0.0;
  double max_xi = 0.0;
  bool all_exactly_one = false;
  bool within = false;     // |mean - 1| <= 3 se
};

/// Monte Carlo check of E[xi_T] = 1 on Volterra paths.
MeanOneReport mean_one_test(const fbm::FbmSpec& fbm, const lt::MollifierSpec& spec, double alpha, const mc::McConfig& mc);

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

struct CovarianceRow {
  double t = 0.0;
  double s = 0.0;
  double target = 0.0;
  mc::EstimatorResult weighted;    // xi-weighted E[Y_t Y_s]
  mc::EstimatorResult unweighted;  // plain E[Y_t Y_s], for contrast
  bool within = false;
};

struct MeanRow {
  double t = 0.0;
  mc::EstimatorResult weighted;
  bool within = false;
};

struct MeasureChangeReport {
  double alpha = 0.0;
  double epsilon = 0.0;
  std::vector<CovarianceRow> covariance;
  std::vector<MeanRow> mean;
  mc::EstimatorResult xi_mean;
  double ess = 0.0;
  double ess_fraction = 0.0;
  Verdict verdict = Verdict::inconclusive;
  std::string reason;
};

/// Under dQ = xi_T dP, Y = B + alpha int_0^. phi_eps(B_s - x) ds is an fBm.
/// Compares xi-weighted second moments of Y (first component) with R_H at
/// the checkpoint pairs and the weighted means with 0, all within 3 weighted
/// standard errors. ESS below 5% of N makes the verdict inconclusive.
MeasureChangeReport measure_change_covariance_test(const fbm::FbmSpec& fbm, const lt::MollifierSpec& spec, double alpha,
                                                   const mc::McConfig& mc,
                                                   std::vector<std::pair<double, double>> checkpoints = {});

}  // namespace skewfbm::girsanov
