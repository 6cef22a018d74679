#pragma once

#include <span>
#include <string>
#include <vector>

#include "skewfbm/fbm/sampler.hpp"
#include "skewfbm/mc/estimator.hpp"
#include "skewfbm/mc/study_config.hpp"
#include "skewfbm/stats/ks_test.hpp"
#include "skewfbm/stats/regression.hpp"

namespace skewfbm::lt {

/// Gaussian kernel phi_eps(y - center) = (2 pi eps)^{-d/2} exp(-|y - center|^2 / (2 eps)).
struct MollifierSpec {
  double epsilon = 0.5;
  std::vector<double> center{0.0};

  void validate() const;
  std::size_t dim() const { return center.size(); }
};

double mollifier_eval(const MollifierSpec& spec, std::span<const double> y);

/// Default ladder eps_k = 2^{-k}, k = 1..8.
std::vector<double> default_ladder();

struct LocalTimeEstimate {
  TimeGrid grid;
  std::vector<double> values;  // running L_t at each node, L_0 = 0
  MollifierSpec spec;
  mc::SeedSpec provenance;
};

/// Trapezoid running integral of phi_eps(B_s - x) along the path.
LocalTimeEstimate smoothed_local_time(const fbm::PathMatrix& path, const MollifierSpec& spec);
/// Terminal value only; same rule.
double smoothed_local_time_at_end(const fbm::PathMatrix& path, const MollifierSpec& spec);

/// Occupation-measure estimator |{s <= T : |B_s - x|_inf < delta}| / (2 delta)^d
/// with the same trapezoid weights; converges to the local time as delta -> 0.
double occupation_density(const fbm::PathMatrix& path, std::span<const double> x, double delta);

struct CauchyRung {
  double eps_hi = 0.0;  // eps_k
  double eps_lo = 0.0;  // eps_{k+1}
  mc::EstimatorResult gap;  // E|L(eps_k) - L(eps_{k+1})|^2
};

struct CauchyStudy {
  std::vector<mc::EstimatorResult> level;  // E[L_T(eps_k)] per ladder entry
  std::vector<CauchyRung> rungs;
  /// decreasing_within(rungs, 1.0)
  bool decreasing = false;
  bool hd_warning = false;
};

/// Rung k+1 counts as decreasing when its mean is at most rung k's mean plus
/// `sigmas` combined standard errors.
bool decreasing_within(const std::vector<CauchyRung>& rungs, double sigmas);

CauchyStudy local_time_cauchy_study(const fbm::FbmSpec& spec, std::span<const double> x, std::span<const double> ladder,
                                    const mc::McConfig& mc, fbm::SamplerMethod method = fbm::SamplerMethod::cholesky);

/// m!/(2 pi)^{dm/2} K^{d(1-m)/2} prod_{j=1}^m B(j(1-Hd), 1-Hd) t^{m(1-Hd)}.
double moment_bound_rhs(double H, std::size_t d, double t, int m, double K);

struct MomentCheckRow {
  int m = 0;
  mc::EstimatorResult moment;
  double bound = 0.0;
  bool ok = false;  // moment.mean <= bound
};

struct MomentCheck {
  double K = 0.0;
  double epsilon = 0.0;
  std::vector<MomentCheckRow> rows;
  bool ok = false;
};

/// Empirical E[L_T(eps)^m] at x = 0 against moment_bound_rhs with the given K.
MomentCheck moment_bound_check(const fbm::FbmSpec& spec, double epsilon, std::span<const int> orders, double K,
                               const mc::McConfig& mc, fbm::SamplerMethod method = fbm::SamplerMethod::cholesky);

struct SelfSimilarityReport {
  double t = 0.0;
  double epsilon = 0.0;
  stats::KsResult ks;
  bool insufficient_sample = false;
  bool passed = false;  // p-value > 0.01
};

/// Compares samples of L_t^0(eps) on [0, t] with independent samples of
/// t^{1-Hd} L_1^0(eps t^{-2H}) on [0, 1], both on spec.n steps. The
/// bandwidth rescaling makes the two laws identical for every eps, so the
/// test isolates the scaling law from the eps -> 0 bias.
SelfSimilarityReport self_similarity_test(const fbm::FbmSpec& spec, double t, double epsilon, const mc::McConfig& mc,
                                          fbm::SamplerMethod method = fbm::SamplerMethod::cholesky);

struct ExponentRegression {
  std::vector<double> times;
  std::vector<mc::EstimatorResult> mean_local_time;
  stats::LinearFit fit;
  double expected_slope = 0.0;  // 1 - Hd
};

/// Slope of log E[L_t^0(eps)] against log t over `times` (all <= spec.T),
/// read off the running local time of the same paths.
ExponentRegression exponent_regression(const fbm::FbmSpec& spec, std::span<const double> times, double epsilon,
                                       const mc::McConfig& mc, fbm::SamplerMethod method = fbm::SamplerMethod::cholesky);

}  // namespace skewfbm::lt
