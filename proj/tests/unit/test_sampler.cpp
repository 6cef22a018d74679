#include <doctest.h>

#include <cmath>
#include <vector>

#include "skewfbm/fbm/covariance_study.hpp"
#include "skewfbm/fbm/kernel.hpp"
#include "skewfbm/fbm/nondeterminism.hpp"
#include "skewfbm/fbm/sampler.hpp"
#include "skewfbm/mc/estimator.hpp"

using namespace skewfbm;
using namespace skewfbm::fbm;

namespace {

double rh(double H, double t, double s) {
  return 0.5 * (std::pow(t, 2 * H) + std::pow(s, 2 * H) - std::pow(std::abs(t - s), 2 * H));
}

}  // namespace

TEST_CASE("spec validation") {
  FbmSpec s;
  s.H = 0.6;
  CHECK_THROWS_WITH(s.validate(), "H must lie in (0, 1/2)");
  s.H = 0.2;
  s.n = 1;
  CHECK_THROWS(s.validate());
  CHECK_THROWS(CholeskySampler(0.2, 1.0, 5000));
  CHECK(parse_sampler_method("volterra") == SamplerMethod::volterra);
  CHECK_THROWS(parse_sampler_method("fft"));
}

TEST_CASE("Cholesky factor reproduces the covariance") {
  const CholeskySampler c(0.2, 2.0, 128);
  const Eigen::MatrixXd S = c.factor() * c.factor().transpose();
  double err = 0.0;
  for (int i = 0; i < 128; ++i)
    for (int j = 0; j < 128; ++j) err = std::max(err, std::abs(S(i, j) - rh(0.2, 2.0 * (i + 1) / 128, 2.0 * (j + 1) / 128)));
  CHECK(err < 1e-12);
  CHECK(c.jitter() == 0.0);
}

TEST_CASE("Volterra implied covariance is close to R_H") {
  // worst entries sit next to t = 0 and two cells off the diagonal
  const std::vector<std::pair<double, double>> cases{{0.1, 2.5e-3}, {0.2, 8e-4}, {0.4, 2e-5}};
  for (auto [H, tol] : cases) {
    const VolterraSampler v(H, 1.0, 512);
    const auto C = v.implied_covariance();
    double err = 0.0;
    for (int i = 0; i < 512; i += 3)
      for (int j = 0; j < 512; j += 5) err = std::max(err, std::abs(C(i, j) - rh(H, (i + 1) / 512.0, (j + 1) / 512.0)));
    CHECK(err < tol);
  }
}

TEST_CASE("Volterra paths are a deterministic function of the driver") {
  const VolterraSampler v(0.2, 1.0, 64);
  const mc::SeedSpec seed{11, 4};
  const auto drv = v.draw_driver(seed, 2);
  const auto a = v.assemble(drv);
  const auto b = v.sample(seed, 2);
  CHECK(a.values == b.values);
  CHECK(b.driver_fingerprint == drv.fingerprint());
  CHECK(a.values.row(0).isZero(0.0));
  auto other = drv;
  other.dW(3, 1) += 1e-12;
  CHECK(other.fingerprint() != drv.fingerprint());
}

TEST_CASE("sampled variance at T matches T^{2H}") {
  FbmSpec s;
  s.H = 0.3;
  s.T = 2.0;
  s.n = 64;
  for (auto m : {SamplerMethod::cholesky, SamplerMethod::volterra}) {
    std::vector<double> sq;
    for (std::size_t p = 0; p < 4000; ++p) {
      const double b = simulate_fbm(s, {3, p}, m).values(64, 0);
      sq.push_back(b * b);
    }
    const auto e = mc::estimate(sq);
    CHECK(std::abs(e.mean - std::pow(2.0, 0.6)) < 3.5 * e.std_error);
  }
}

TEST_CASE("cross-method covariance study") {
  FbmSpec s;
  s.H = 0.2;
  s.d = 2;
  s.n = 64;
  mc::McConfig mc{1500, 9, 1};
  const auto r = fbm_covariance_study(s, mc);
  REQUIRE(r.rows.size() == 10);
  CHECK(r.passed);
  for (const auto& row : r.rows) {
    CHECK(row.volterra.count == 3000);  // components pooled
    CHECK(row.exact == doctest::Approx(rh(0.2, row.t, row.s)));
    CHECK(std::abs(row.implied - row.exact) < 2e-3);
  }
  mc.workers = 3;
  const auto r3 = fbm_covariance_study(s, mc);
  for (std::size_t k = 0; k < 10; ++k) CHECK(r3.rows[k].volterra.mean == r.rows[k].volterra.mean);
  mc.paths = 0;
  CHECK_THROWS_WITH(fbm_covariance_study(s, mc), "empty study");
}

TEST_CASE("conditional variance against the two-point formula") {
  const double H = 0.25, t = 0.7, s = 0.3;
  CHECK(conditional_variance(H, t, {}).variance == doctest::Approx(std::pow(t, 2 * H)));
  const std::vector<double> given{s};
  const double r = rh(H, t, s);
  CHECK(conditional_variance(H, t, given).variance == doctest::Approx(std::pow(t, 2 * H) - r * r / std::pow(s, 2 * H)));
}

TEST_CASE("determinant equals the product of conditional variances") {
  const std::vector<double> times{0.05, 0.2, 0.21, 0.5, 0.77, 1.0};
  for (double H : {0.1, 0.3}) {
    const auto c = determinant_chain(H, times);
    CHECK(c.log_det == doctest::Approx(c.log_chain).epsilon(1e-10));
  }
}

TEST_CASE("local non-determinism ratio") {
  FbmSpec s;
  s.H = 0.2;
  const auto r = local_nondeterminism_ratio(s, 0.5, 1.0 / 16);
  CHECK(r.ratio > 0.0);
  CHECK(r.ratio <= 1.0 / std::pow(1.0 / 16, 0.4));
  // conditioning on more points cannot increase the variance
  const auto far = local_nondeterminism_ratio(s, 0.5, 1.0 / 4);
  CHECK(far.conditional_variance >= r.conditional_variance);
  const double K = calibrated_nondeterminism_constant(s);
  CHECK(K > 0.5);
  CHECK(K < 0.7);
}
