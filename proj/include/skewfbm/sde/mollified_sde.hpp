#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewfbm/fbm/sampler.hpp"
#include "skewfbm/mc/estimator.hpp"
#include "skewfbm/mc/study_config.hpp"
#include "skewfbm/stats/regression.hpp"

namespace skewfbm::sde {

enum class Scheme {
  /// drift integrated exactly along the straight line X_i + tau (B_{i+1} - B_i)
  segment,
  /// X_{i+1} = X_i + alpha phi_eps(X_i) 1_d h + (B_{i+1} - B_i)
  euler,
};

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);

/// dX = alpha phi_eps(X) 1_d dt + dB^H, X_0 = x0, mollifier centred at 0.
struct SdeSpec {
  std::vector<double> x0{0.0};
  double alpha = 1.0;
  fbm::FbmSpec fbm;
  double epsilon = 0.5;
  Scheme scheme = Scheme::segment;

  void validate() const;
  /// H < 1/(2(2+d)); specs outside are accepted but marked.
  bool in_proven_regime() const;
  nlohmann::json to_json() const;
};

/// H < 1/(2(2+d)).
bool in_proven_regime(double H, std::size_t d);

/// Solves against a frozen fBm path on spec.fbm's grid. Values are stored as
/// x0 + B_t + (accumulated drift), so alpha = 0 reproduces x0 + B bitwise.
fbm::PathMatrix solve_mollified(const SdeSpec& spec, const fbm::PathMatrix& path);

/// Drift increment of one step from x with noise increment dB over step h,
/// per component (all components share it).
double drift_increment(const SdeSpec& spec, std::span<const double> x, std::span<const double> dB, double h);

struct LadderRung {
  double eps_hi = 0.0;
  double eps_lo = 0.0;
  mc::EstimatorResult gap;  // E|X_T(eps_k) - X_T(eps_{k+1})|^2
};

struct SdeLadder {
  std::vector<LadderRung> rungs;
  /// every rung at most the previous one plus one combined standard error
  bool decreasing = false;
  /// some rung exceeds its predecessor by more than three combined standard errors
  bool regime_warning = false;
  bool outside_proven_regime = false;
  /// terminal-rung solutions, kept when requested
  std::vector<fbm::PathMatrix> terminal;
};

/// Common random numbers: path p uses the same fBm driver for every rung.
SdeLadder convergence_ladder(const SdeSpec& base, std::span<const double> ladder, const mc::McConfig& mc,
                             fbm::SamplerMethod method = fbm::SamplerMethod::volterra, bool keep_terminal = false);

struct HolderReport {
  int m = 0;
  std::vector<double> lags;                 // |t - s|
  std::vector<mc::EstimatorResult> moment;  // E|X_t - X_s|^m averaged over s
  stats::LinearFit fit;                     // log moment against log lag, lag > 0 only
  double expected_min_slope = 0.0;          // min(mH, m(1 - Hd)/2)
  /// smallest C with moment <= C (lag^{m(1-Hd)/2} + lag^{mH}) at every lag > 0
  double fitted_C = 0.0;
};

/// Moments of increments over the ensemble. Lags are given in grid steps;
/// for each lag the increment is averaged over all start nodes.
HolderReport holder_moment_check(const std::vector<fbm::PathMatrix>& ensemble, int m, std::span<const std::size_t> lag_steps,
                                 double H);

}  // namespace skewfbm::sde
