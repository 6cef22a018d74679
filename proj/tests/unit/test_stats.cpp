#include <doctest.h>

#include <cmath>
#include <vector>

#include "skewfbm/mc/estimator.hpp"
#include "skewfbm/mc/rng.hpp"
#include "skewfbm/stats/ks_test.hpp"
#include "skewfbm/stats/regression.hpp"

using namespace skewfbm;

TEST_CASE("Kolmogorov survival function") {
  // scipy.stats.kstwobign.sf
  CHECK(stats::kolmogorov_sf(0.5) == doctest::Approx(0.963945244).epsilon(1e-8));
  CHECK(stats::kolmogorov_sf(1.0) == doctest::Approx(0.269999672).epsilon(1e-8));
  CHECK(stats::kolmogorov_sf(1.36) == doctest::Approx(0.0494858768).epsilon(1e-8));
  CHECK(stats::kolmogorov_sf(2.0) == doctest::Approx(6.70925256e-4).epsilon(1e-7));
}

TEST_CASE("two-sample KS exact p-values") {
  // scipy.stats.ks_2samp(method="exact")
  const std::vector<double> a{0.1, 0.4, 0.7, 1.3, 2.2, 2.9, 3.1};
  const std::vector<double> b{0.5, 0.8, 1.9, 2.5, 3.3, 3.6, 4.0, 4.4};
  const auto r = stats::ks_two_sample(a, b);
  CHECK(r.exact);
  CHECK(r.statistic == doctest::Approx(0.5));
  CHECK(r.p_value == doctest::Approx(0.19254079254079257).epsilon(1e-12));

  const std::vector<double> x{2.040919, -2.555665, 0.418099, -0.56777, -0.452649, -0.215597, -2.019986, -0.231932,
                              -0.865213, 3.323, 0.225787, -0.352631, -0.281287, -0.668046, -1.055151, -0.390801,
                              0.481945, -0.238554, 0.957759, -0.199802, 0.02426, 1.545821, 0.545106, -0.505229,
                              -0.182839, 0.540525, 1.935088, -0.26962, -0.243559, 1.002314, -0.88646, -0.29172,
                              0.882539, 0.58035, 0.091517, 0.670104, -2.828162, 1.021307, -0.959645, -1.66862};
  const std::vector<double> y{0.576446, 1.000545, -0.144767, -0.776406, 0.326125, 0.247253, 1.705598, 1.047408,
                              0.493816, 1.411633, 0.094477, -0.6259, 0.884058, 0.882538, 0.085171, -0.482809,
                              0.529154, -2.193894, 0.990125, 0.791368, -1.338857, 0.361354, -0.6641, 1.057221,
                              -1.734167, -0.614495, 1.00958, 1.456401, -1.858005, -0.19804, 0.62802, -0.309216,
                              1.89064, -0.891227, 0.654532, -0.748406, 1.705963, 0.278349, -0.072251, -1.418185,
                              1.981826, 1.052779, 1.053564, 1.437881, 0.649227, -0.339247, -0.500241, -0.5002,
                              1.670072, -1.160381};
  const auto s = stats::ks_two_sample(x, y);
  CHECK(s.statistic == doctest::Approx(0.215));
  CHECK(s.p_value == doctest::Approx(0.22356088619425982).epsilon(1e-10));
  // the asymptotic branch lands near the exact value
  const auto as = stats::ks_two_sample(x, y, 0.0);
  CHECK_FALSE(as.exact);
  CHECK(as.p_value == doctest::Approx(0.2236).epsilon(0.15));
}

TEST_CASE("KS on identical and disjoint samples") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  CHECK(stats::ks_two_sample(a, a).p_value == doctest::Approx(1.0));
  const std::vector<double> b{6, 7, 8, 9, 10};
  const auto r = stats::ks_two_sample(a, b);
  CHECK(r.statistic == 1.0);
  CHECK(r.p_value == doctest::Approx(2.0 / 252.0));
}

TEST_CASE("least squares recovers an exact line") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9};
  const auto f = stats::ols(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  const std::vector<double> p{0.5, 2.0, 8.0};
  const std::vector<double> q{std::pow(0.5, 0.7), std::pow(2.0, 0.7), std::pow(8.0, 0.7)};
  CHECK(stats::loglog_fit(p, q).slope == doctest::Approx(0.7));
  CHECK_THROWS(stats::loglog_fit(std::vector<double>{-1.0, 1.0}, std::vector<double>{1.0, 1.0}));
}

TEST_CASE("standard error shrinks like N^{-1/2}") {
  // smooth functional cos(Z) of a standard normal
  std::vector<double> se;
  for (std::size_t N : {1000, 10000, 100000}) {
    std::vector<double> v(N);
    for (std::size_t i = 0; i < N; ++i) v[i] = std::cos(mc::Philox({21, i}).normal());
    se.push_back(mc::estimate(v).std_error);
  }
  for (std::size_t k = 1; k < se.size(); ++k) CHECK(se[k - 1] / se[k] == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
}

TEST_CASE("covariance estimator") {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < 20000; ++i) {
    mc::Philox g({8, i});
    const double a = g.normal(), b = g.normal();
    x.push_back(a);
    y.push_back(0.6 * a + 0.8 * b);
  }
  const auto c = mc::covariance_estimate(x, y);
  CHECK(std::abs(c.mean - 0.6) < 3.5 * c.std_error);
  CHECK_THROWS(mc::covariance_estimate(std::vector<double>{1.0}, std::vector<double>{1.0}));
}
