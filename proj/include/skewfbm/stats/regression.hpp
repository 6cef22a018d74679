#pragma once

#include <span>

namespace skewfbm::stats {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = intercept + slope * x; needs at least 2 points.
LinearFit ols(std::span<const double> x, std::span<const double> y);

/// OLS of log y on log x; all values must be positive.
LinearFit loglog_fit(std::span<const double> x, std::span<const double> y);

}  // namespace skewfbm::stats
