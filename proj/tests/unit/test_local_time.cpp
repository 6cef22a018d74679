#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "skewfbm/lt/local_time.hpp"

using namespace skewfbm;
using namespace skewfbm::lt;

namespace {

fbm::PathMatrix line_path(std::size_t n, double slope) {
  fbm::PathMatrix p;
  p.grid = TimeGrid::uniform(0.0, 1.0, n);
  p.values.resize(static_cast<Eigen::Index>(n + 1), 1);
  for (std::size_t i = 0; i <= n; ++i) p.values(static_cast<Eigen::Index>(i), 0) = slope * p.grid[i];
  return p;
}

fbm::FbmSpec spec(double H, std::size_t n, std::size_t d = 1) {
  fbm::FbmSpec f;
  f.H = H;
  f.n = n;
  f.d = d;
  return f;
}

}  // namespace

TEST_CASE("mollifier is the Gaussian density") {
  const MollifierSpec m{0.3, {0.1, -0.2}};
  const std::vector<double> y{0.4, 0.5};
  const double r2 = 0.09 + 0.49;
  CHECK(mollifier_eval(m, y) == doctest::Approx(std::exp(-r2 / 0.6) / (2 * std::numbers::pi * 0.3)));
  CHECK_THROWS(mollifier_eval(MollifierSpec{0.0, {0.0}}, std::vector<double>{0.0}));
  const auto lad = default_ladder();
  REQUIRE(lad.size() == 8);
  CHECK(lad.front() == 0.5);
  CHECK(lad.back() == std::ldexp(1.0, -8));
}

TEST_CASE("local time of a straight line") {
  // B_s = s: int_0^1 phi_eps(s - x) ds = Phi((1 - x)/sqrt eps) - Phi(-x/sqrt eps)
  const boost::math::normal Z;
  const auto p = line_path(4096, 1.0);
  for (double eps : {0.1, 0.01}) {
    for (double x : {0.0, 0.3}) {
      const double exact = boost::math::cdf(Z, (1 - x) / std::sqrt(eps)) - boost::math::cdf(Z, -x / std::sqrt(eps));
      CHECK(smoothed_local_time_at_end(p, {eps, {x}}) == doctest::Approx(exact).epsilon(1e-6));
      const auto run = smoothed_local_time(p, {eps, {x}});
      CHECK(run.values.back() == smoothed_local_time_at_end(p, {eps, {x}}));
      CHECK(run.values.front() == 0.0);
    }
  }
  // occupation density of the identity path is 1 in the interior
  const std::vector<double> x{0.5};
  CHECK(occupation_density(p, x, 0.05) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("expected local time at zero") {
  // E L_T^0(eps) = int_0^T (2 pi (s^{2H} + eps))^{-1/2} ds
  const double H = 0.2, eps = 0.05;
  boost::math::quadrature::tanh_sinh<double> ts;
  const double exact =
      ts.integrate([&](double s) { return 1.0 / std::sqrt(2 * std::numbers::pi * (std::pow(s, 2 * H) + eps)); }, 0.0, 1.0);
  mc::McConfig mc{3000, 13, 1};
  const std::vector<double> x{0.0};
  const std::vector<double> lad{0.1, eps};
  const auto c = local_time_cauchy_study(spec(H, 512), x, lad, mc, fbm::SamplerMethod::cholesky);
  CHECK(std::abs(c.level[1].mean - exact) < 3.5 * c.level[1].std_error);
}

TEST_CASE("ladder gaps shrink and the decreasing rule") {
  mc::McConfig mc{400, 5, 1};
  const std::vector<double> x{0.0};
  const std::vector<double> lad{0.5, 0.25, 0.125, 0.0625};
  const auto c = local_time_cauchy_study(spec(0.2, 1024), x, lad, mc, fbm::SamplerMethod::cholesky);
  REQUIRE(c.rungs.size() == 3);
  CHECK(c.decreasing);
  CHECK_FALSE(c.hd_warning);
  CHECK(local_time_cauchy_study(spec(0.4, 32, 3), std::vector<double>{0, 0, 0}, lad, {5, 1, 1}).hd_warning);
  std::vector<CauchyRung> r(2);
  r[0].gap = {1.0, 0.1, 10, {}};
  r[1].gap = {1.1, 0.1, 10, {}};
  CHECK(decreasing_within(r, 1.0));
  r[1].gap.mean = 1.2;
  CHECK_FALSE(decreasing_within(r, 1.0));
  CHECK_THROWS_WITH(local_time_cauchy_study(spec(0.2, 32), x, lad, {0, 1, 1}), "empty study");
}

TEST_CASE("moment bound right-hand side") {
  // m = 1: B(1 - Hd, 1 - Hd) t^{1 - Hd} / (2 pi)^{d/2}, independent of K
  const double H = 0.2;
  CHECK(moment_bound_rhs(H, 1, 1.0, 1, 0.3) ==
        doctest::Approx(boost::math::beta(0.8, 0.8) / std::sqrt(2 * std::numbers::pi)));
  CHECK(moment_bound_rhs(H, 1, 1.0, 1, 0.3) == moment_bound_rhs(H, 1, 1.0, 1, 0.9));
  // exact first moment of the local time lies below it
  CHECK(1.0 / ((1 - H) * std::sqrt(2 * std::numbers::pi)) < moment_bound_rhs(H, 1, 1.0, 1, 0.5));
  // m = 2 scales like K^{-1/2} t^{2(1 - H)}
  CHECK(moment_bound_rhs(H, 1, 0.5, 2, 0.25) == doctest::Approx(2.0 * std::pow(0.5, 1.6) * moment_bound_rhs(H, 1, 1.0, 2, 1.0)));
}

TEST_CASE("self-similarity and exponent at small scale") {
  mc::McConfig mc{600, 17, 1};
  const auto s = self_similarity_test(spec(0.2, 512), 0.5, 1.0 / 64, mc, fbm::SamplerMethod::cholesky);
  CHECK(s.ks.n == 600);
  CHECK(s.passed);
  const auto small = self_similarity_test(spec(0.2, 64), 0.5, 0.1, {20, 1, 1});
  CHECK(small.insufficient_sample);
  CHECK_FALSE(small.passed);
  const std::vector<double> times{0.125, 0.25, 0.5, 1.0};
  const auto e = exponent_regression(spec(0.2, 1024), times, 1.0 / 256, mc, fbm::SamplerMethod::cholesky);
  CHECK(e.expected_slope == doctest::Approx(0.8));
  CHECK(std::abs(e.fit.slope - 0.8) < 0.05);
}
