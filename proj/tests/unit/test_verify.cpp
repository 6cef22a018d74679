#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "skewfbm/fbm/kernel.hpp"
#include "skewfbm/mc/rng.hpp"
#include "skewfbm/verify/gaussian_identities.hpp"
#include "skewfbm/verify/ibp_bound.hpp"
#include "skewfbm/verify/iterated_integrals.hpp"
#include "skewfbm/verify/permanent.hpp"
#include "skewfbm/verify/shuffle.hpp"
#include "skewfbm/verify/suite.hpp"

using namespace skewfbm;
using namespace skewfbm::verify;
using Q = boost::multiprecision::cpp_rational;

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<std::size_t> place(const std::vector<std::size_t>& slots, const std::vector<std::size_t>& p) {
  std::vector<std::size_t> w(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) w[slots[j]] = p[j];
  return w;
}

Eigen::MatrixXd random_matrix(std::uint64_t seed, Eigen::Index n) {
  mc::Philox r({seed, 0});
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = r.normal();
  return M;
}

}  // namespace

TEST_CASE("shuffle enumeration") {
  CHECK(enumerate_shuffles(1, 1).size() == 2);
  CHECK(enumerate_shuffles(2, 2).size() == 6);
  CHECK(enumerate_shuffles(3, 2).size() == 10);
  for (std::size_t m = 0; m <= 6; ++m)
    for (std::size_t n = 0; n <= 6; ++n) {
      const auto sh = enumerate_shuffles(m, n);
      REQUIRE(sh.size() == binomial(m + n, m));
      for (std::size_t k = 0; k < sh.size(); ++k) {
        const auto& s = sh[k].sigma;
        CHECK(std::is_sorted(s.begin(), s.begin() + static_cast<long>(m)));
        CHECK(std::is_sorted(s.begin() + static_cast<long>(m), s.end()));
        auto sorted = s;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
        if (k > 0) CHECK(sh[k - 1].sigma < s);
      }
    }
  CHECK_THROWS_AS(enumerate_shuffles(7, 6), std::invalid_argument);
}

TEST_CASE("simplex integrals of monomials") {
  // int_{0<s2<s1<1} s1 s2^2 = int_0^1 s1^4/3 = 1/15
  CHECK(simplex_monomial_integral<Q>({1, 2}, Q(0), Q(1)) == Q(1, 15));
  // constant integrand: (t - theta)^m / m!
  CHECK(simplex_monomial_integral<Q>({0, 0, 0}, Q(1, 2), Q(2)) == Q(27, 8) / 6);
  CHECK(simplex_monomial_integral<double>({1, 2}, 0.0, 1.0) == doctest::Approx(1.0 / 15).epsilon(1e-15));
}

TEST_CASE("shuffle identity in exact arithmetic") {
  const Q theta(1, 4), t(3, 2);
  for (std::size_t m = 1; m <= 3; ++m)
    for (std::size_t n = 1; m + n <= 5; ++n) {
      std::vector<std::size_t> p(m + n);
      for (std::size_t j = 0; j < p.size(); ++j) p[j] = j + 1;
      const std::vector<std::size_t> a(p.begin(), p.begin() + static_cast<long>(m)), b(p.begin() + static_cast<long>(m), p.end());
      const Q lhs = simplex_monomial_integral<Q>(a, theta, t) * simplex_monomial_integral<Q>(b, theta, t);
      Q rhs(0);
      for (const auto& s : enumerate_shuffles(m, n)) rhs += simplex_monomial_integral<Q>(place(s.sigma, p), theta, t);
      CHECK(lhs == rhs);
      const auto chk = shuffle_integral_identity_check(m, n, p, 0.25, 1.5);
      CHECK(chk.residual <= 1e-10);
      CHECK(chk.lhs == doctest::Approx(static_cast<double>(lhs)).epsilon(1e-13));
    }
}

TEST_CASE("function j occupies slot sigma(j)") {
  // reading the product as f_{sigma(j)}(w_j) places the inverse permutation,
  // which differs for non-involutive shuffles and breaks the identity
  const std::vector<std::size_t> p{1, 2, 3, 4};
  const Q theta(0), t(1);
  const Q lhs = simplex_monomial_integral<Q>({1, 2}, theta, t) * simplex_monomial_integral<Q>({3, 4}, theta, t);
  Q inverse(0);
  for (const auto& s : enumerate_shuffles(2, 2)) {
    std::vector<std::size_t> w(4);
    for (std::size_t j = 0; j < 4; ++j) w[j] = p[s.sigma[j]];
    inverse += simplex_monomial_integral<Q>(w, theta, t);
  }
  CHECK(inverse != lhs);
  CHECK(shuffle_integral_identity_check(2, 2, p, 0.0, 1.0).residual <= 1e-14);
}

TEST_CASE("partial shuffle decomposition") {
  const auto c = partial_shuffle_check({1, 2}, {1}, 1, 0.25, 1.5);
  CHECK(c.residual <= 1e-10);
  CHECK(c.terms == 2);
  CHECK(c.bound_with_2);
  CHECK(c.smallest_constant == doctest::Approx(std::cbrt(2.0)));
  // exact: nested equals the decomposition for a longer instance
  const std::vector<std::size_t> f{0, 1, 2, 1}, g{2, 0};
  Q dec(0);
  std::vector<std::size_t> merged{2, 1, 2, 0};
  for (const auto& s : enumerate_shuffles(2, 2)) {
    auto word = std::vector<std::size_t>{0, 1};
    const auto rest = place(s.sigma, merged);
    word.insert(word.end(), rest.begin(), rest.end());
    dec += simplex_monomial_integral<Q>(word, Q(1, 3), Q(2));
  }
  CHECK(partial_shuffle_nested<Q>(f, g, 2, Q(1, 3), Q(2)) == dec);
  CHECK_THROWS(partial_shuffle_check({1}, {1}, 0, 0.0, 1.0));
}

TEST_CASE("permanent") {
  Eigen::Matrix2d A;
  A << 2, 3, 5, 7;
  CHECK(permanent(A) == doctest::Approx(2 * 7 + 3 * 5));
  CHECK(permanent(Eigen::MatrixXd::Identity(6, 6)) == 1.0);
  CHECK(permanent(Eigen::MatrixXd::Ones(4, 4)) == doctest::Approx(24.0));
  for (Eigen::Index n : {3, 5, 8}) {
    const auto M = random_matrix(11 + static_cast<std::uint64_t>(n), n);
    CHECK(permanent(M) == doctest::Approx(permanent_bruteforce(M)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(permanent(Eigen::MatrixXd::Ones(11, 11)), std::invalid_argument);
}

TEST_CASE("PSD permanent bound") {
  const Eigen::MatrixXd D = Eigen::Vector3d(0.5, 2.0, 3.0).asDiagonal();
  const auto d = psd_permanent_bound_check(D);
  CHECK(d.permanent == doctest::Approx(3.0));
  CHECK(d.bound == doctest::Approx(18.0));
  const auto ones = psd_permanent_bound_check(Eigen::MatrixXd::Ones(3, 3));
  CHECK(ones.permanent == doctest::Approx(6.0));
  CHECK(ones.bound == doctest::Approx(6.0));
  Eigen::Matrix2d bad;
  bad << 1, 2, 2, 1;
  CHECK_THROWS_WITH(psd_permanent_bound_check(bad), "permanent bound: matrix is not positive semidefinite");
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto V = random_matrix(100 + s, 5);
    const auto c = psd_permanent_bound_check(V * V.transpose());
    CHECK(c.holds);
    CHECK(c.permanent >= 0.0);
  }
  Eigen::Matrix2d base;
  base << 1.0, 0.3, 0.3, 2.0;
  const std::vector<std::size_t> mult{2, 1};
  const auto R = repeated_row_covariance(base, mult);
  REQUIRE(R.rows() == 3);
  CHECK(R(0, 1) == 1.0);
  CHECK(R(1, 2) == doctest::Approx(0.3));
  CHECK(R(2, 2) == 2.0);
}

TEST_CASE("Li-Wei absolute moment bound") {
  Eigen::MatrixXd S(1, 1);
  S << 4.0;
  const auto c = gaussian_abs_moment_bound_check(S, 40000, {3, 0});
  CHECK(c.holds);
  CHECK(c.bound == doctest::Approx(2.0));
  CHECK(std::abs(c.moment.mean - 2.0 * std::sqrt(2.0 / M_PI)) <= 4.0 * c.moment.std_error);
  CHECK_FALSE(c.degenerate);
  const auto r1 = gaussian_abs_moment_bound_check(Eigen::MatrixXd::Ones(2, 2), 1000, {3, 0});
  CHECK(r1.degenerate);
  CHECK_THROWS(gaussian_abs_moment_bound_check(Eigen::MatrixXd::Identity(7, 7), 10, {3, 0}));
  CHECK_THROWS_WITH(gaussian_abs_moment_bound_check(S, 0, {3, 0}), "empty study");
}

TEST_CASE("marginal identity") {
  // independent unit variances, g Gaussian of width 1: both sides equal 2 pi / sqrt(2)
  const auto c = gaussian_marginal_identity_check(Eigen::Matrix2d::Identity(), TestFunction{}, 1e-10);
  CHECK(c.lhs == doctest::Approx(2.0 * M_PI / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(c.residual <= 1e-6);
  CHECK(c.sigma1 == doctest::Approx(1.0));
  Eigen::Matrix3d S;
  S << 1, .5, .2, .5, 1, .3, .2, .3, 1;
  const auto fine = gaussian_marginal_identity_check(S, TestFunction{}, 1e-8);
  CHECK(fine.residual <= 1e-4);
  CHECK(fine.sigma1 * fine.sigma1 == doctest::Approx(1.0 / S.inverse()(0, 0)));
  Eigen::Matrix2d sing;
  sing << 1, 1, 1, 1;
  CHECK_THROWS(gaussian_marginal_identity_check(sing, TestFunction{}, 1e-8));
  CHECK_THROWS(gaussian_marginal_identity_check(Eigen::Matrix4d::Identity(), TestFunction{}, 1e-8));
}

TEST_CASE("marginal identity residual shrinks under refinement") {
  Eigen::Matrix2d S;
  S << 1.0, 0.7, 0.7, 1.5;
  const TestFunction g{TestFunction::Kind::gaussian, 0.4};
  const auto coarse = gaussian_marginal_identity_check(S, g, 1e-3);
  const auto fine = gaussian_marginal_identity_check(S, g, 1e-10);
  CHECK(fine.residual <= coarse.residual);
  CHECK(fine.residual <= 1e-9);
}

TEST_CASE("iterated integral: hypothesis and trivial case") {
  IteratedIntegralSpec s;
  s.w = {0.0};
  s.eps = {0};
  const auto b = iterated_integral_bound(s, 1.0);
  CHECK(b.lhs == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(b.rhs == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(b.classical == doctest::Approx(0.5));
  s.w = {-0.5};
  s.eps = {1};  // -0.5 + (0.1 - 0.5 - 0.05) = -0.95 is allowed
  CHECK_NOTHROW(s.validate());
  s.w = {-0.6};
  CHECK_THROWS_WITH(s.validate(), "hypothesis w_j + (H - 1/2 - gamma) eps_j > -1 violated");
  s.w = {0.0, 0.0};
  CHECK_THROWS(s.validate());
}

TEST_CASE("classical Dirichlet case") {
  IteratedIntegralSpec s;
  s.w = {-0.3, -0.3};
  s.eps = {0, 0};
  const auto b = iterated_integral_bound(s, 1.0);
  CHECK(b.lhs == doctest::Approx(b.classical).epsilon(1e-7));
  // exact value is Pi (t-theta)^{W+m} / (W + m)
  CHECK(b.classical == doctest::Approx(b.rhs / 1.4).epsilon(1e-12));
}

TEST_CASE("iterated integral against tanh-sinh") {
  IteratedIntegralSpec s;
  s.H = 0.2;
  s.gamma = 0.05;
  s.w = {-0.4};
  s.eps = {1};
  auto kap = [&](double u, double off) {
    return fbm::kernel_K(s.H, u, s.theta, off) - fbm::kernel_K(s.H, u, s.theta_prime);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  // left offset u - theta from the complement on (-1, 1)
  const double half = 0.5 * (s.t - s.theta);
  const double oracle = half * ts.integrate([&](double z, double zc) {
    const double left = z < 0 ? -half * zc : half * (1 + z);
    const double right = z > 0 ? half * zc : half * (1 - z);
    return kap(s.theta + left, left) * std::pow(right, s.w[0]);
  }, 1e-12);
  CHECK(iterated_integral_numeric(s, false) == doctest::Approx(oracle).epsilon(1e-9));

  // m = 2 with nested tanh-sinh
  s.w = {0.2, -0.3};
  s.eps = {0, 1};
  const double nested = ts.integrate([&](double s1) {
    boost::math::quadrature::tanh_sinh<double> inner;
    return std::pow(s.t - s1, 0.2) * inner.integrate([&](double s2) {
      if (!(s2 > s.theta && s2 < s1)) return 0.0;
      return kap(s2, s2 - s.theta) * std::pow(s1 - s2, -0.3);
    }, s.theta, s1, 1e-10);
  }, s.theta, s.t, 1e-9);
  CHECK(iterated_integral_numeric(s, false) == doctest::Approx(nested).epsilon(1e-6));
}

TEST_CASE("Beta product against Gamma oracle") {
  for (auto [H, d] : {std::pair{0.1, std::size_t{1}}, {0.05, 2}, {0.15, 1}})
    for (std::size_t m = 1; m <= 3; ++m) {
      const double a = 0.5 - H * (1 + d), b = 1.5 - H * (1 + d);
      double oracle = std::tgamma(2.0 * m + 1);
      for (std::size_t j = 1; j <= 2 * m; ++j) oracle *= std::tgamma(a) * std::tgamma(j * b) / std::tgamma(a + j * b);
      const auto r = beta_product_bound(m, H, d);
      CHECK(r.product == doctest::Approx(oracle).epsilon(1e-12));
      CHECK(r.telescoped == doctest::Approx(oracle).epsilon(1e-12));
      CHECK(r.gamma_form == doctest::Approx(oracle).epsilon(1e-12));
    }
  CHECK_THROWS_WITH(beta_product_bound(1, 0.2, 2), "beta product requires H < 1/(2(1+d))");
  const auto rep = simplex_moment_bound_check(2, 0.1, 1);
  CHECK(rep.direct_below_bound);
  CHECK(rep.direct_m1 > 0.0);
}

TEST_CASE("integration-by-parts bound instance") {
  CHECK(bump_l1_norm() == doctest::Approx(0.443993816).epsilon(1e-8));
  // derivative against central differences
  for (double x : {-0.7, 0.1, 0.55}) {
    const double h = 1e-6;
    CHECK(bump_derivative(1, x) == doctest::Approx((bump_derivative(0, x + h) - bump_derivative(0, x - h)) / (2 * h)).epsilon(1e-6));
  }
  IbpSpec s;
  s.H = 0.2;
  CHECK_THROWS_WITH(s.validate(), "hypothesis H < (1/2 - gamma)/(d + 2|alpha|) violated");
  s.alpha = 0;
  CHECK_NOTHROW(s.validate());

  mc::McConfig mc{4000, 5, 1};
  IbpSpec base;
  const auto one = ibp_bound_mc_check(base, mc);
  mc.workers = 3;
  const auto three = ibp_bound_mc_check(base, mc);
  CHECK(one.lhs.mean == three.lhs.mean);
  CHECK(one.agrees);
  CHECK(std::isfinite(one.implied_C));
  CHECK(ibp_rhs(base, 2.0, 1.0) == doctest::Approx(4.0 * ibp_rhs(base, 1.0, 1.0)));
  IbpSpec sentinel;
  sentinel.theta_prime = 0.0;
  CHECK(ibp_rhs(sentinel, 1.0, 1.0) > 0.0);
}

TEST_CASE("suite filter") {
  SuiteOptions o;
  o.only = "shuffles";
  const auto rows = run_verify_suite(o);
  REQUIRE_FALSE(rows.empty());
  for (const auto& r : rows) CHECK(r.group == "shuffles");
  CHECK(all_passed(rows));
  CHECK(suite_csv(rows).rfind("name,group,passed,detail\n", 0) == 0);
  o.only = "nonsense";
  CHECK_THROWS_WITH(run_verify_suite(o), "unknown verify group 'nonsense'");
}
