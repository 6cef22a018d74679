#pragma once

#include <utility>
#include <vector>

#include "skewfbm/fbm/sampler.hpp"
#include "skewfbm/mc/estimator.hpp"
#include "skewfbm/mc/study_config.hpp"

namespace skewfbm::fbm {

struct CovarianceCheckpoint {
  std::size_t i = 0;  // grid node of t
  std::size_t j = 0;  // grid node of s
  double t = 0.0;
  double s = 0.0;
  double exact = 0.0;          // R_H(t, s)
  double implied = 0.0;        // covariance implied by the Volterra scheme
  mc::EstimatorResult volterra;
  mc::EstimatorResult cholesky;
  double z_exact = 0.0;        // (volterra - exact) / se
  double z_methods = 0.0;      // (volterra - cholesky) / combined se
  bool within = false;         // both |z| <= 3
};

struct CovarianceStudy {
  std::vector<CovarianceCheckpoint> rows;
  double max_abs_z = 0.0;
  bool passed = false;
};

/// Ten checkpoint pairs on the grid as fractions of T, rounded to nodes.
std::vector<std::pair<double, double>> default_covariance_checkpoints();

/// Sample covariance of Volterra paths against R_H and against an
/// independent set of Cholesky paths, pooling the d components of each path.
CovarianceStudy fbm_covariance_study(const FbmSpec& spec, const mc::McConfig& mc,
                                     std::vector<std::pair<double, double>> checkpoints = {});

}  // namespace skewfbm::fbm
