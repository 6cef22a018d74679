#pragma once

#include <span>
#include <vector>

#include "skewfbm/fbm/sampler.hpp"

namespace skewfbm::fbm {

struct ConditionalVariance {
  double variance = 0.0;
  /// Reciprocal condition estimate of the conditioning covariance (1 when empty).
  double rcond = 1.0;
  bool ill_conditioned = false;
};

/// Var[B_t | B_s, s in given] for one fBm component via the Schur complement.
ConditionalVariance conditional_variance(double H, double t, std::span<const double> given);

struct NondeterminismRatio {
  double ratio = 0.0;
  double conditional_variance = 0.0;
  std::size_t conditioning_points = 0;
  double rcond = 1.0;
  bool ill_conditioned = false;
};

/// Var[B_t | B_{t_k} : t_k grid node > 0, |t - t_k| >= r] / r^{2H}.
NondeterminismRatio local_nondeterminism_ratio(const FbmSpec& spec, double t, double r);

/// Minimum ratio over the lattice ts x rs (pairs with r >= t skipped).
double min_nondeterminism_ratio(const FbmSpec& spec, std::span<const double> ts, std::span<const double> rs);

/// Minimum ratio over t in {kT/8 : k = 1..8} and r in {1/64, 1/16, 1/8, 1/4} T.
/// Used as the local non-determinism constant K in moment bounds.
double calibrated_nondeterminism_constant(const FbmSpec& spec);

struct DeterminantChain {
  double log_det = 0.0;    // log det Cov(B_{s_1}, ..., B_{s_m}) from an LU factorisation
  double log_chain = 0.0;  // sum of log Var[B_{s_j} | B_{s_1}, ..., B_{s_{j-1}}]
};

DeterminantChain determinant_chain(double H, std::span<const double> times);
/// Same identity for an arbitrary covariance matrix.
DeterminantChain determinant_chain(const Eigen::MatrixXd& cov);

}  // namespace skewfbm::fbm
