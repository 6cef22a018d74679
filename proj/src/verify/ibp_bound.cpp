#include "skewfbm/verify/ibp_bound.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "skewfbm/core/numerics.hpp"
#include "skewfbm/fbm/kernel.hpp"
#include "skewfbm/mc/parallel.hpp"

namespace skewfbm::verify {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

struct Node {
  double s;
  double from_theta;
  double w;
};

// Gauss on (theta, t) split at the midpoint; the left half uses
// s - theta = half v^q with q = 1/(H + 1/2) against the kernel singularity.
std::vector<Node> nodes(const IbpSpec& sp) {
  const auto& g = numerics::UnitGauss<24>::get();
  const double half = 0.5 * (sp.t - sp.theta);
  const double q = 1.0 / (sp.H + 0.5);
  std::vector<Node> out;
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    const double off = half * std::pow(g.x[k], q);
    out.push_back({sp.theta + off, off, g.w[k] * half * q * std::pow(g.x[k], q - 1.0)});
  }
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    const double off = half * (1.0 + g.x[k]);
    out.push_back({sp.theta + off, off, g.w[k] * half});
  }
  return out;
}

double kappa(const IbpSpec& sp, const Node& n) {
  if (sp.eps == 0) return 1.0;
  double k = fbm::kernel_K(sp.H, n.s, sp.theta, n.from_theta);
  if (sp.theta_prime > 0.0) k -= fbm::kernel_K(sp.H, n.s, sp.theta_prime);
  return k;
}

}  // namespace

void IbpSpec::validate() const {
  fbm::require_hurst(H);
  if (!(gamma > 0.0 && gamma < H)) throw std::invalid_argument("gamma must lie in (0, H)");
  if (alpha > 1) throw std::invalid_argument("derivative order must be 0 or 1");
  if (eps != 0 && eps != 1) throw std::invalid_argument("eps must be 0 or 1");
  if (!(theta_prime >= 0.0 && theta_prime < theta && theta < t)) throw std::invalid_argument("need 0 <= theta' < theta < t");
  if (!(H < (0.5 - gamma) / (1.0 + 2.0 * static_cast<double>(alpha))))
    throw std::invalid_argument("hypothesis H < (1/2 - gamma)/(d + 2|alpha|) violated");
}

double bump_derivative(std::size_t order, double x) {
  if (!(std::abs(x) < 1.0)) return 0.0;
  const double u = 1.0 - x * x;
  const double b = std::exp(-1.0 / u);
  if (order == 0) return b;
  if (order == 1) return b * (-2.0 * x / (u * u));
  throw std::invalid_argument("derivative order must be 0 or 1");
}

double bump_l1_norm() {
  static const double v = GK::integrate([](double x) { return bump_derivative(0, x); }, -1.0, 1.0, 10, 1e-14);
  return v;
}

double ibp_rhs(const IbpSpec& sp, double C, double f_norm) {
  sp.validate();
  const double a = sp.H - 0.5 - sp.gamma;
  const double al = static_cast<double>(sp.alpha);
  const double e = sp.eps;
  double r = std::pow(C, 1.0 + al) * f_norm * std::pow(sp.theta, a * e) *
             std::pow(std::tgamma(2.0 * al + 1.0), 0.25) *
             std::pow(sp.t - sp.theta, -sp.H * (1.0 + 2.0 * al) + a * e + 1.0) /
             std::sqrt(std::tgamma(-sp.H * (2.0 + 4.0 * al) + 2.0 * a * e + 2.0));
  if (sp.theta_prime > 0.0) r *= std::pow((sp.theta - sp.theta_prime) / (sp.theta * sp.theta_prime), sp.gamma * e);
  return r;
}

IbpReport ibp_bound_mc_check(const IbpSpec& sp, const mc::McConfig& mc) {
  sp.validate();
  if (mc.paths == 0) throw std::invalid_argument("empty study");
  const auto rule = nodes(sp);
  const auto n = static_cast<Eigen::Index>(rule.size());
  Eigen::VectorXd wk(n);
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    wk(i) = rule[static_cast<std::size_t>(i)].w * kappa(sp, rule[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j <= i; ++j)
      cov(i, j) = cov(j, i) = fbm::covariance(sp.H, rule[static_cast<std::size_t>(i)].s, rule[static_cast<std::size_t>(j)].s);
  }
  // nodes cluster at theta, so factor through the eigen-decomposition
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::MatrixXd root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  const auto values = mc::parallel_map(mc.paths, mc.workers, [&](std::size_t i) {
    mc::Philox rng(mc.substream(mc::tags::verify, i));
    Eigen::VectorXd z(n);
    for (Eigen::Index k = 0; k < n; ++k) z(k) = rng.normal();
    const Eigen::VectorXd B = root * z;
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) acc += wk(k) * bump_derivative(sp.alpha, B(k) - sp.shift);
    return acc;
  });

  IbpReport out;
  out.lhs = mc::estimate(values);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double sd = std::sqrt(cov(k, k));
    auto integrand = [&](double x) {
      const double z = x / sd;
      return bump_derivative(sp.alpha, x - sp.shift) * std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
    };
    out.oracle += wk(k) * GK::integrate(integrand, sp.shift - 1.0, sp.shift + 1.0, 10, 1e-12);
  }
  out.f_norm = bump_l1_norm();
  out.rhs_unit = ibp_rhs(sp, 1.0, out.f_norm);
  out.implied_C = std::pow(std::abs(out.lhs.mean) / out.rhs_unit, 1.0 / (1.0 + static_cast<double>(sp.alpha)));
  out.agrees = std::abs(out.lhs.mean - out.oracle) <= 3.0 * out.lhs.std_error;
  return out;
}

}  // namespace skewfbm::verify
