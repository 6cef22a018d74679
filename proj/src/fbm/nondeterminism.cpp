#include "skewfbm/fbm/nondeterminism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "skewfbm/fbm/kernel.hpp"

namespace skewfbm::fbm {

namespace {

constexpr double kIllConditioned = 1e-13;

Eigen::MatrixXd covariance_matrix(double H, std::span<const double> times) {
  const auto m = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd C(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) C(i, j) = C(j, i) = covariance(H, times[i], times[j]);
  return C;
}

}  // namespace

ConditionalVariance conditional_variance(double H, double t, std::span<const double> given) {
  require_hurst(H);
  ConditionalVariance out;
  out.variance = covariance(H, t, t);
  if (given.empty()) return out;
  const Eigen::MatrixXd S = covariance_matrix(H, given);
  Eigen::VectorXd c(static_cast<Eigen::Index>(given.size()));
  for (std::size_t k = 0; k < given.size(); ++k) c(static_cast<Eigen::Index>(k)) = covariance(H, t, given[k]);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("conditioning covariance is not factorisable");
  out.rcond = ldlt.rcond();
  out.ill_conditioned = out.rcond < kIllConditioned;
  out.variance -= c.dot(ldlt.solve(c));
  return out;
}

NondeterminismRatio local_nondeterminism_ratio(const FbmSpec& spec, double t, double r) {
  spec.validate();
  if (!(r > 0.0 && r < t && t <= spec.T)) throw std::invalid_argument("need 0 < r < t <= T");
  const TimeGrid g = spec.grid();
  std::vector<double> given;
  for (std::size_t k = 1; k < g.size(); ++k)
    if (std::abs(t - g[k]) >= r * (1.0 - 1e-12)) given.push_back(g[k]);
  const auto cv = conditional_variance(spec.H, t, given);
  NondeterminismRatio out;
  out.conditional_variance = cv.variance;
  out.ratio = cv.variance / std::pow(r, 2.0 * spec.H);
  out.conditioning_points = given.size();
  out.rcond = cv.rcond;
  out.ill_conditioned = cv.ill_conditioned;
  return out;
}

double min_nondeterminism_ratio(const FbmSpec& spec, std::span<const double> ts, std::span<const double> rs) {
  double best = std::numeric_limits<double>::infinity();
  for (double t : ts)
    for (double r : rs)
      if (r < t) best = std::min(best, local_nondeterminism_ratio(spec, t, r).ratio);
  if (!std::isfinite(best)) throw std::invalid_argument("empty (t, r) lattice");
  return best;
}

double calibrated_nondeterminism_constant(const FbmSpec& spec) {
  std::vector<double> ts, rs;
  for (int k = 1; k <= 8; ++k) ts.push_back(spec.T * k / 8.0);
  for (double r : {1.0 / 64, 1.0 / 16, 1.0 / 8, 1.0 / 4}) rs.push_back(spec.T * r);
  return min_nondeterminism_ratio(spec, ts, rs);
}

DeterminantChain determinant_chain(const Eigen::MatrixXd& cov) {
  DeterminantChain out;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(cov);
  const Eigen::VectorXd u = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < u.size(); ++i) out.log_det += std::log(std::abs(u(i)));
  for (Eigen::Index j = 0; j < cov.rows(); ++j) {
    double v = cov(j, j);
    if (j > 0) {
      const Eigen::MatrixXd S = cov.topLeftCorner(j, j);
      const Eigen::VectorXd c = cov.col(j).head(j);
      v -= c.dot(S.ldlt().solve(c));
    }
    out.log_chain += std::log(v);
  }
  return out;
}

DeterminantChain determinant_chain(double H, std::span<const double> times) {
  require_hurst(H);
  return determinant_chain(covariance_matrix(H, times));
}

}  // namespace skewfbm::fbm
