#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace skewfbm::mc {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x);
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct EstimatorResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
  std::optional<double> ess;  // weighted estimators only
};

/// Mean and standard error (sample std / sqrt(N)) of the values, summed in
/// index order with compensation. Throws on an empty sample.
EstimatorResult estimate(std::span<const double> values);

/// Self-normalised weighted mean sum(w f)/sum(w) with delta-method standard
/// error and Kish effective sample size (sum w)^2 / sum w^2.
EstimatorResult weighted_estimate(std::span<const double> values, std::span<const double> weights);

/// Mean of (w * f) with plain standard error, for unnormalised
/// importance-sampling averages. ESS is reported from the weights.
EstimatorResult importance_estimate(std::span<const double> values, std::span<const double> weights);

double kish_ess(std::span<const double> weights);

/// Sample covariance of two equally sized samples with the standard error of
/// the covariance estimator, computed from the products of centred values.
EstimatorResult covariance_estimate(std::span<const double> x, std::span<const double> y);

}  // namespace skewfbm::mc
