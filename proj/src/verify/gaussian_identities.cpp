#include "skewfbm/verify/gaussian_identities.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "skewfbm/verify/permanent.hpp"

namespace skewfbm::verify {

LiWeiCheck gaussian_abs_moment_bound_check(const Eigen::MatrixXd& cov, std::size_t N, mc::SeedSpec seed) {
  if (cov.rows() > 6) throw std::invalid_argument("absolute-moment check is limited to n <= 6");
  if (!is_psd(cov)) throw std::invalid_argument("covariance is not positive semidefinite");
  if (N == 0) throw std::invalid_argument("empty study");
  const auto n = cov.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd root = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
  LiWeiCheck out;
  out.degenerate = ev.minCoeff() < 1e-12 * ev.maxCoeff();
  mc::Philox rng(seed);
  std::vector<double> v(N);
  Eigen::VectorXd z(n);
  for (std::size_t k = 0; k < N; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    v[k] = (root * z).cwiseAbs().prod();
  }
  out.moment = mc::estimate(v);
  out.bound = std::sqrt(permanent(cov));
  out.holds = out.moment.mean <= out.bound + 3.0 * out.moment.std_error;
  return out;
}

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

double integrate_line(const std::function<double(double)>& f, double tol) {
  double err = 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  const double v = GK::integrate(f, -inf, inf, 15, tol, &err);
  if (!(err <= std::max(1e3 * tol * std::abs(v), 1e-300))) throw std::runtime_error("marginal identity: quadrature did not converge");
  return v;
}

}  // namespace

MarginalCheck gaussian_marginal_identity_check(const Eigen::MatrixXd& cov, const TestFunction& g, double tolerance) {
  const auto n = cov.rows();
  if (n != 2 && n != 3) throw std::invalid_argument("marginal identity check supports n = 2 or 3");
  if (!is_psd(cov)) throw std::invalid_argument("covariance is not positive semidefinite");
  const double det = cov.determinant();
  if (!(det > 1e-14)) throw std::invalid_argument("marginal identity: variables must be linearly independent");
  // Var[sum v_j Z_j] = v^T cov v
  auto q = [&](const Eigen::Vector3d& v) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) acc += v(i) * cov(i, j) * v(j);
    return acc;
  };
  MarginalCheck out;
  out.lhs = integrate_line(
      [&](double v1) {
        return g(v1) * integrate_line(
                           [&](double v2) {
                             if (n == 2) return std::exp(-0.5 * q({v1, v2, 0.0}));
                             return integrate_line([&](double v3) { return std::exp(-0.5 * q({v1, v2, v3})); }, tolerance);
                           },
                           tolerance);
      },
      tolerance);
  const Eigen::MatrixXd S22 = cov.bottomRightCorner(n - 1, n - 1);
  const Eigen::VectorXd s21 = cov.col(0).tail(n - 1);
  out.sigma1 = std::sqrt(cov(0, 0) - s21.dot(S22.ldlt().solve(s21)));
  const double line = integrate_line([&](double v) { return g(v / out.sigma1) * std::exp(-0.5 * v * v); }, tolerance);
  out.rhs = std::pow(2.0 * std::numbers::pi, 0.5 * static_cast<double>(n - 1)) / std::sqrt(det) * line;
  out.residual = std::abs(out.lhs - out.rhs) / std::abs(out.rhs);
  return out;
}

}  // namespace skewfbm::verify
