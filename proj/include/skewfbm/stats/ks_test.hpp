#pragma once

#include <cstddef>
#include <span>

namespace skewfbm::stats {

struct KsResult {
  double statistic = 0.0;  // sup |F_a - F_b|
  double p_value = 1.0;    // P(D >= statistic) under equal laws
  std::size_t n = 0;
  std::size_t m = 0;
  bool exact = false;      // lattice-path recursion rather than the asymptotic series
};

/// Two-sample Kolmogorov-Smirnov test. The p-value is exact (lattice path
/// counting, continuous laws) when n * m <= max_exact_work and otherwise
/// uses the Kolmogorov limit law with the Stephens correction.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double max_exact_work = 1.0e8);

/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_sf(double x);

}  // namespace skewfbm::stats
