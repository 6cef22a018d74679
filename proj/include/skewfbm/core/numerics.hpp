#pragma once

#include <algorithm>
#include <array>
#include <utility>
#include <cmath>
#include <cstddef>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

namespace skewfbm::numerics {

inline double beta_fn(double a, double b) {
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

inline double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

/// Gauss-Legendre rule mapped to [0, 1].
template <std::size_t N>
struct UnitGauss {
  std::array<double, N> x{};
  std::array<double, N> w{};

  UnitGauss() {
    using rule = boost::math::quadrature::gauss<double, N>;
    const auto& abs = rule::abscissa();
    const auto& wts = rule::weights();
    // boost stores the non-negative half of the symmetric rule
    std::array<std::pair<double, double>, N> nodes{};
    std::size_t k = 0;
    for (std::size_t i = 0; i < abs.size(); ++i) {
      nodes[k++] = {abs[i], wts[i]};
      if (abs[i] != 0.0) nodes[k++] = {-abs[i], wts[i]};
    }
    std::sort(nodes.begin(), nodes.end());
    for (std::size_t i = 0; i < N; ++i) {
      x[i] = 0.5 * (1.0 + nodes[i].first);
      w[i] = 0.5 * nodes[i].second;
    }
  }

  static const UnitGauss& get() {
    static const UnitGauss rule;
    return rule;
  }
};

}  // namespace skewfbm::numerics
