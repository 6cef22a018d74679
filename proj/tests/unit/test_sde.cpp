#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "skewfbm/fbm/kernel.hpp"
#include "skewfbm/lt/local_time.hpp"
#include "skewfbm/sde/malliavin.hpp"
#include "skewfbm/stats/ks_test.hpp"

using namespace skewfbm;
using namespace skewfbm::sde;

namespace {

SdeSpec small_spec(double H = 0.1, std::size_t d = 1, std::size_t n = 128) {
  SdeSpec s;
  s.fbm.H = H;
  s.fbm.d = d;
  s.fbm.n = n;
  s.x0.assign(d, 0.0);
  return s;
}

fbm::PathMatrix driver(const SdeSpec& s, std::size_t index, std::uint64_t seed = 11) {
  return fbm::simulate_fbm(s.fbm, {seed, index}, fbm::SamplerMethod::cholesky);
}

// phi_eps along x + tau b, tau in [0, 1], integrated adaptively
double segment_oracle(double eps, std::vector<double> x, std::vector<double> b) {
  auto f = [&](double tau) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) r2 += std::pow(x[c] + tau * b[c], 2);
    return std::pow(2 * std::numbers::pi * eps, -0.5 * x.size()) * std::exp(-0.5 * r2 / eps);
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 12, 1e-14);
}

}  // namespace

TEST_CASE("zero drift reproduces x0 + B bitwise") {
  auto s = small_spec(0.2, 2);
  s.x0 = {0.5, -1.25};
  s.alpha = 0.0;
  const auto B = driver(s, 3);
  for (auto scheme : {Scheme::segment, Scheme::euler}) {
    s.scheme = scheme;
    const auto X = solve_mollified(s, B);
    for (Eigen::Index i = 0; i < X.values.rows(); ++i)
      for (Eigen::Index c = 0; c < 2; ++c) CHECK(X.values(i, c) == s.x0[static_cast<std::size_t>(c)] + B.values(i, c));
  }
}

TEST_CASE("flat mollifier limit") {
  auto s = small_spec(0.1, 1);
  s.x0 = {0.2};
  const auto B = driver(s, 1);
  for (double eps : {1e6, 1e12}) {
    s.epsilon = eps;
    const auto X = solve_mollified(s, B);
    const double bound = std::abs(s.alpha) * s.fbm.T / std::sqrt(2 * std::numbers::pi * eps);
    for (Eigen::Index i = 0; i < X.values.rows(); ++i) CHECK(std::abs(X.values(i, 0) - 0.2 - B.values(i, 0)) <= bound * (1 + 1e-9));
  }
  CHECK(1.0 / std::sqrt(2 * std::numbers::pi * 1e12) < 1e-6);
}

TEST_CASE("segment drift equals the line integral of the mollifier") {
  auto s = small_spec(0.1, 2);
  s.epsilon = 0.05;
  const double h = 0.01;
  for (auto [x, b] : std::vector<std::pair<std::vector<double>, std::vector<double>>>{
           {{0.1, -0.2}, {0.3, 0.5}}, {{-0.4, 0.0}, {0.8, 0.01}}, {{2.0, 2.0}, {-0.1, 0.2}}, {{0.0, 0.0}, {1e-3, -2e-3}}}) {
    const double got = drift_increment(s, x, b, h);
    CHECK(got == doctest::Approx(s.alpha * h * segment_oracle(s.epsilon, x, b)).epsilon(1e-10));
  }
  // vanishing increment falls back to the point value
  s.scheme = Scheme::euler;
  const double pt = drift_increment(s, std::vector<double>{0.1, 0.1}, std::vector<double>{0.0, 0.0}, h);
  s.scheme = Scheme::segment;
  CHECK(drift_increment(s, std::vector<double>{0.1, 0.1}, std::vector<double>{0.0, 0.0}, h) == pt);
  CHECK(parse_scheme("euler") == Scheme::euler);
  CHECK_THROWS_WITH(parse_scheme("rk4"), "unknown scheme 'rk4' (expected segment or euler)");
}

TEST_CASE("grid mismatch is rejected") {
  auto s = small_spec();
  auto other = s;
  other.fbm.n = 64;
  CHECK_THROWS_WITH(solve_mollified(s, driver(other, 0)), "path grid does not match the SDE spec");
  s.x0 = {0.0, 0.0};
  CHECK_THROWS(solve_mollified(s, driver(other, 0)));
}

TEST_CASE("regime flag") {
  CHECK(in_proven_regime(0.1, 1));
  CHECK_FALSE(in_proven_regime(1.0 / 6.0, 1));
  CHECK_FALSE(in_proven_regime(0.3, 2));
  auto s = small_spec(0.3, 2, 32);
  mc::McConfig mc;
  mc.paths = 20;
  const std::vector<double> ladder{0.5, 0.25, 0.125};
  const auto L = convergence_ladder(s, ladder, mc);
  CHECK(L.outside_proven_regime);
  CHECK(L.rungs.size() == 2);
  CHECK(s.to_json()["in_proven_regime"] == false);
  mc.paths = 0;
  CHECK_THROWS_WITH(convergence_ladder(s, ladder, mc), "empty study");
}

TEST_CASE("drift sign flip is an antisymmetry") {
  auto s = small_spec(0.1, 1, 64);
  auto neg = s;
  neg.alpha = -s.alpha;
  const auto B = driver(s, 5);
  auto mB = B;
  mB.values = -B.values;
  const auto X = solve_mollified(s, B);
  const auto Y = solve_mollified(neg, mB);
  CHECK((X.values + Y.values).cwiseAbs().maxCoeff() < 1e-14);

  // in law, with independent drivers
  std::vector<double> a, b;
  for (std::size_t p = 0; p < 800; ++p) {
    a.push_back(solve_mollified(s, driver(s, p, 21)).values(64, 0));
    auto d = driver(s, p, 22);
    d.values = -d.values;
    b.push_back(-solve_mollified(neg, d).values(64, 0));
  }
  CHECK(stats::ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("coupled ladder gaps shrink inside the regime") {
  auto s = small_spec(0.1, 1, 256);
  mc::McConfig mc;
  mc.paths = 300;
  mc.seed = 5;
  const std::vector<double> ladder{0.5, 0.25, 0.125, 0.0625};
  const auto L = convergence_ladder(s, ladder, mc, fbm::SamplerMethod::cholesky, true);
  REQUIRE(L.rungs.size() == 3);
  CHECK(L.rungs[2].gap.mean < L.rungs[0].gap.mean);
  CHECK_FALSE(L.regime_warning);
  CHECK(L.terminal.size() == 300);
  // worker count does not change the table
  mc.workers = 3;
  const auto L3 = convergence_ladder(s, ladder, mc, fbm::SamplerMethod::cholesky);
  for (std::size_t k = 0; k < 3; ++k) CHECK(L3.rungs[k].gap.mean == L.rungs[k].gap.mean);
}

TEST_CASE("Holder moments of the fBm control") {
  auto s = small_spec(0.2, 1, 256);
  s.alpha = 0.0;
  std::vector<fbm::PathMatrix> ens;
  for (std::size_t p = 0; p < 200; ++p) ens.push_back(solve_mollified(s, driver(s, p)));
  const std::vector<std::size_t> lags{0, 1, 2, 4, 8, 16, 32};
  const auto rep = holder_moment_check(ens, 2, lags, 0.2);
  CHECK(rep.moment[0].mean == 0.0);
  CHECK(rep.fit.slope == doctest::Approx(0.4).epsilon(0.05 / 0.4));
  CHECK(rep.expected_min_slope == doctest::Approx(0.4));
  CHECK(std::isfinite(rep.fitted_C));
  CHECK(rep.fitted_C > 0.0);
}

TEST_CASE("Jacobian has identical rows") {
  auto s = small_spec(0.1, 3);
  s.alpha = 1.7;
  s.epsilon = 0.3;
  const std::vector<double> x{0.2, -0.1, 0.4};
  const auto J = drift_jacobian(s, x);
  const double step = 1e-6;
  for (Eigen::Index c = 0; c < 3; ++c) {
    CHECK(J.row(c) == J.row(0));
    auto xp = x, xm = x;
    xp[static_cast<std::size_t>(c)] += step;
    xm[static_cast<std::size_t>(c)] -= step;
    const double fd = s.alpha *
                      (lt::mollifier_eval({0.3, {0, 0, 0}}, xp) - lt::mollifier_eval({0.3, {0, 0, 0}}, xm)) / (2 * step);
    CHECK(J(0, c) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("Malliavin derivative without drift is the kernel") {
  auto s = small_spec(0.15, 2, 64);
  s.alpha = 0.0;
  const auto X = solve_mollified(s, driver(s, 2));
  const double si = X.grid[10];
  const auto D = solve_malliavin(s, X, si);
  REQUIRE(D.values.size() == 54);
  for (std::size_t k = 0; k < D.values.size(); ++k) {
    const double kv = fbm::kernel_K(s.fbm.H, D.times[k], si, D.times[k] - si);
    CHECK(D.values[k](0, 0) == kv);
    CHECK(D.values[k](1, 1) == kv);
    CHECK(D.values[k](0, 1) == 0.0);
  }
  CHECK_THROWS_WITH(solve_malliavin(s, X, 0.5 * (X.grid[3] + X.grid[4])), "differentiation time is not a grid node");
  CHECK_THROWS(solve_malliavin(s, X, 0.0));
}

TEST_CASE("Malliavin solution is linear in the kernel term") {
  auto s = small_spec(0.1, 2, 64);
  s.x0 = {0.1, -0.05};
  s.epsilon = 0.1;
  const auto X = solve_mollified(s, driver(s, 4));
  const auto D1 = solve_malliavin(s, X, X.grid[8]);
  const auto D2 = solve_malliavin(s, X, X.grid[8], 2.0);
  for (std::size_t k = 0; k < D1.values.size(); ++k) CHECK((D2.values[k] - 2.0 * D1.values[k]).norm() < 1e-12 * D1.values[k].norm());
  // fast terminal path agrees with the matrix recursion
  const auto prof = kernel_profile(s.fbm.H, X.grid, X.grid[8]);
  CHECK((terminal_malliavin(s, X, prof) - D1.values.back()).norm() < 1e-12 * D1.values.back().norm());
}

TEST_CASE("Malliavin scheme converges to the integrating-factor solution") {
  // synthetic smooth path in d = 1; D(t) = K(t,s) + int_s^t J(u) K(u,s) exp(int_u^t J) du
  const double H = 0.1, alpha = 2.0, eps = 0.1, s0 = 0.25, T = 1.0;
  auto Xf = [](double u) { return 0.3 + 0.5 * std::sin(4.0 * u); };
  auto Jf = [&](double u) {
    const double x = Xf(u);
    return -alpha * x / eps * std::exp(-0.5 * x * x / eps) / std::sqrt(2 * std::numbers::pi * eps);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double p = H + 0.5;
  auto integrand = [&](double v) {
    const double off = std::pow(v, 1.0 / p);
    const double u = s0 + off;
    const double e = GK::integrate(Jf, u, T, 10, 1e-13);
    return Jf(u) * fbm::kernel_K(H, u, s0, off) * std::exp(e) * std::pow(v, 1.0 / p - 1.0) / p;
  };
  const double oracle =
      fbm::kernel_K(H, T, s0) + GK::integrate(integrand, 0.0, std::pow(T - s0, p), 12, 1e-12);

  std::vector<double> err;
  for (std::size_t n : {128, 256, 512, 1024}) {
    SdeSpec s;
    s.fbm.H = H;
    s.fbm.n = n;
    s.alpha = alpha;
    s.epsilon = eps;
    fbm::PathMatrix X;
    X.grid = s.fbm.grid();
    X.values.resize(static_cast<Eigen::Index>(n + 1), 1);
    for (std::size_t i = 0; i <= n; ++i) X.values(static_cast<Eigen::Index>(i), 0) = Xf(X.grid[i]);
    const auto D = solve_malliavin(s, X, s0);
    err.push_back(std::abs(D.values.back()(0, 0) - oracle));
  }
  for (std::size_t k = 1; k < err.size(); ++k) {
    const double ratio = err[k] / err[k - 1];
    CHECK(ratio > 0.35);
    CHECK(ratio < 0.65);
  }
}

TEST_CASE("compactness diagnostic without drift is deterministic") {
  auto s = small_spec(0.1, 1, 128);
  s.alpha = 0.0;
  mc::McConfig mc;
  mc.paths = 3;
  const std::vector<double> ladder{0.5, 0.125};
  const auto rep = compactness_diagnostic(s, ladder, mc, 0.1, 8, fbm::SamplerMethod::cholesky);
  for (const auto& r : rep.rows) {
    CHECK(r.double_integral.mean == doctest::Approx(rep.deterministic_reference).epsilon(1e-12));
    CHECK(r.double_integral.std_error < 1e-12 * r.double_integral.mean);
    // int_0^T K(T, theta)^2 dtheta = T^{2H}
    CHECK(r.l2_norm.mean == doctest::Approx(1.0).epsilon(2e-3));
  }
  CHECK_THROWS_WITH(compactness_diagnostic(s, ladder, mc, 0.5, 8), "beta must lie in (0, 1/2)");
  CHECK_THROWS(compactness_diagnostic(s, ladder, mc, 0.0, 8));
}

TEST_CASE("band integral matches nested quadrature over distinct cells") {
  const double H = 0.2, beta = 0.1, T = 1.0;
  const std::size_t M = 6;
  const double D = T / M;
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  auto K = [&](double th) { return fbm::kernel_K_incomplete_beta(H, T, th); };
  double oracle = 0.0;
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < i; ++j)
      oracle += GK::integrate(
          [&](double th) {
            const double kt = K(th);
            return GK::integrate([&](double tp) { return std::pow(kt - K(tp), 2) / std::pow(th - tp, 1 + 2 * beta); },
                                 j * D, (j + 1) * D, 8, 1e-9);
          },
          i * D, (i + 1) * D, 8, 1e-9);
  oracle *= 2.0;
  const auto rule = theta_rule(T, H, M);
  CHECK(kernel_band_integral(H, T, 1, beta, rule) == doctest::Approx(oracle).epsilon(0.02));
  CHECK(kernel_band_integral(H, T, 3, beta, rule) == doctest::Approx(3 * kernel_band_integral(H, T, 1, beta, rule)));
}

TEST_CASE("band refinement separates convergent and divergent beta") {
  const double H = 0.2;
  // ratio of successive increments under band halving: about 2^{2 beta - 2H}
  auto growth = [&](double beta) {
    const double a = kernel_band_integral(H, 1.0, 1, beta, theta_rule(1.0, H, 16));
    const double b = kernel_band_integral(H, 1.0, 1, beta, theta_rule(1.0, H, 32));
    const double c = kernel_band_integral(H, 1.0, 1, beta, theta_rule(1.0, H, 64));
    return (c - b) / (b - a);
  };
  CHECK(growth(0.05) == doctest::Approx(std::pow(2.0, -0.3)).epsilon(0.05));
  CHECK(growth(0.45) == doctest::Approx(std::pow(2.0, 0.5)).epsilon(0.05));
}
